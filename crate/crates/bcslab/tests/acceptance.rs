//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test is a self-contained pass/fail gate with its tolerance and time
//! budget pinned in the code. Oracles are independent of the code under
//! test: exhaustive sweeps, explicit enumeration, or text-level replay.

use bcslab::assign::OperatorAssignment;
use bcslab::bcs::{classical_solve_bruteforce, derive_game, magic_square, Bcs, Constraint, GameSpec, Lit, SupportEntry};
use bcslab::game::{chsh_game, chsh_optimal_strategy, game_value, strategy_from_assignment};
use bcslab::reduce::{
    coloring_to_bcs, game_to_bcs, harden_3sat, max_occurrence, occurrence_reduce,
    one_in_three_gadget, prism, reduce_3sat_to_1in3, reduce_3sat_to_3coloring,
    reduce_ksat_to_3sat, ColoringInstance,
};
use bcslab::rewrite::{
    certify_gadget, check_extendibility, complete, verify_certificate, Boundary, GadgetKind,
    MembershipResult, NcPoly,
};
use bcslab::solve::{classical_game_value, solve_2sat, solve_backtracking, solve_hornsat};
use bcslab::{clifford_bcs, mermin_peres_assignment, verify_assignment};
use num::{BigInt, BigRational, One};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Residual tolerance for floating point verification and game values.
const TOL: f64 = 1e-9;
/// cos^2(pi/8), the optimal quantum winning probability of the CHSH game.
const CHSH_QUANTUM: f64 = 0.8535533905932737;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bcslab"))
}

fn run_with_stdin(cmd: &mut Command, input: &[u8]) -> (i32, Vec<u8>) {
    use std::io::Write;
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child.stdin.take().expect("piped").write_all(input).expect("stdin accepts input");
    let out = child.wait_with_output().expect("binary runs");
    (out.status.code().expect("no signal"), out.stdout)
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn c01_magic_square_classically_unsatisfiable() {
    let t0 = Instant::now();
    let (code, square) = run_with_stdin(bin().args(["gen", "magic-square"]), b"");
    assert_eq!(code, 0);
    let (code, out) = run_with_stdin(bin().args(["solve", "--classical"]), &square);
    assert_eq!(code, 1, "unsatisfiable systems exit 1");
    let v: serde_json::Value = serde_json::from_slice(&out).expect("solve emits JSON");
    assert_eq!(v["sat"], serde_json::json!(false));
    let (code, out) = run_with_stdin(bin().args(["solve", "--parity"]), &square);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_slice(&out).expect("solve emits JSON");
    assert_eq!(v["sat"], serde_json::json!(false));
    assert!(t0.elapsed() < Duration::from_secs(1), "budget 1s, took {:?}", t0.elapsed());
}

#[test]
fn c02_grid_assignment_verifies_and_wins_always() {
    let t0 = Instant::now();
    let b = magic_square();
    let a = mermin_peres_assignment();
    let symbolic = verify_assignment(&b, &a, 0.0).expect("names match");
    assert!(symbolic.pass, "symbolic verification is exact");
    assert_eq!(symbolic.max_residual(), 0.0);
    let dense = a.to_dense().expect("two qubits expand");
    assert_eq!(dense.dim(), 4);
    let numeric = verify_assignment(&b, &dense, TOL).expect("names match");
    assert!(numeric.pass, "dense residual {}", numeric.max_residual());
    let strat = strategy_from_assignment(&b, &a, TOL).expect("verified assignments convert");
    assert_eq!(strat.dim, 4, "two shared EPR pairs");
    let v = game_value(&derive_game(&b), &strat);
    assert!((v - 1.0).abs() < TOL, "perfect strategy, got {v}");
    assert!(t0.elapsed() < Duration::from_secs(1), "budget 1s, took {:?}", t0.elapsed());
}

#[test]
fn c03_classical_and_quantum_game_values() {
    let t0 = Instant::now();
    let square_game = derive_game(&magic_square());
    assert_eq!(classical_game_value(&square_game), rational(17, 18));
    let chsh = chsh_game();
    assert_eq!(classical_game_value(&chsh), rational(3, 4));
    let v = game_value(&chsh, &chsh_optimal_strategy());
    assert!((v - CHSH_QUANTUM).abs() < TOL, "got {v}");
    assert!(t0.elapsed() < Duration::from_secs(5), "budget 5s, took {:?}", t0.elapsed());
}

#[test]
fn c04_gadget_certificates() {
    let t0 = Instant::now();

    // prism: all nine per-color commutators of the non-adjacent pair
    let b = coloring_to_bcs(&prism(), 3).expect("three colors");
    let cert = certify_gadget(&b, "a", "e", GadgetKind::Commute, 8).expect("certifies");
    assert_eq!(cert.targets.len(), 9);
    verify_certificate(&cert).expect("replays from text");

    // the triple system commutator
    let b = one_in_three_gadget();
    let cert = certify_gadget(&b, "x", "y", GadgetKind::Commute, 6).expect("certifies");
    assert_eq!(cert.targets.len(), 1);
    verify_certificate(&cert).expect("replays from text");

    // the grid anticommutator of the diagonal pair
    let b = magic_square();
    let cert = certify_gadget(&b, "x2", "x4", GadgetKind::Anticommute, 6).expect("certifies");
    assert_eq!(cert.targets.len(), 1);
    verify_certificate(&cert).expect("replays from text");

    // triangle: color class sums and all adjacent commutators as plain
    // membership proofs
    let mut g = ColoringInstance::new();
    for v in ["u", "v", "w"] {
        g.add_vertex(v).expect("distinct");
    }
    g.add_edge("u", "v").expect("known");
    g.add_edge("v", "w").expect("known");
    g.add_edge("u", "w").expect("known");
    let b = coloring_to_bcs(&g, 3).expect("three colors");
    let sys = complete(&b.to_polynomial_relations(), 6);
    let id = |n: &str| b.var(n).expect("indicator exists") as u32;
    let mut targets = Vec::new();
    for alpha in 0..3 {
        let mut sum = NcPoly::scalar(-num::complex::Complex::one());
        for v in ["u", "v", "w"] {
            sum = &sum + &NcPoly::letter(id(&format!("{v}_{alpha}")));
        }
        targets.push(sum);
    }
    for alpha in 0..3 {
        for beta in 0..3 {
            targets.push(NcPoly::commutator(
                id(&format!("u_{alpha}")),
                id(&format!("v_{beta}")),
            ));
        }
    }
    for target in &targets {
        let MembershipResult::Proved(proof) = sys.prove_membership(target) else {
            panic!("triangle identity not certified")
        };
        assert!(sys.verify(&proof), "replay mismatch");
    }

    assert!(t0.elapsed() < Duration::from_secs(300), "budget 5min, took {:?}", t0.elapsed());
}

#[test]
fn c05_gadget_boundaries_extend() {
    let t0 = Instant::now();
    let b = coloring_to_bcs(&prism(), 3).expect("three colors");
    let groups = |v: &str| {
        Boundary::Group((0..3).map(|c| format!("{v}_{c}")).collect())
    };
    let report = check_extendibility(&b, &[groups("a"), groups("e")]).expect("boundary known");
    assert_eq!(report.cases.len(), 9);
    assert!(report.all_extend);
    let b = one_in_three_gadget();
    let report = check_extendibility(
        &b,
        &[Boundary::Var("x".to_string()), Boundary::Var("y".to_string())],
    )
    .expect("boundary known");
    assert_eq!(report.cases.len(), 4);
    assert!(report.all_extend);
    assert!(t0.elapsed() < Duration::from_secs(1), "budget 1s, took {:?}", t0.elapsed());
}

#[test]
fn c06_complete_graph_systems() {
    let t0 = Instant::now();
    for n in 2..=6usize {
        let (b, a) = clifford_bcs(n);
        let pairs = n * (n - 1) / 2;
        assert_eq!(b.num_vars(), n + 7 * pairs, "rank {n} variable count");
        assert_eq!(b.constraints().len(), 6 * pairs, "rank {n} constraint count");
        assert_eq!(a.dim(), 1 << (n / 2 + 1), "rank {n} dimension");
        let report = verify_assignment(&b, &a, 0.0).expect("names match");
        assert!(report.pass, "rank {n} verifies symbolically");
        let OperatorAssignment::Pauli { ops, .. } = &a else {
            panic!("construction is symbolic")
        };
        for j in 1..=n {
            for k in j + 1..=n {
                let x = &ops[&format!("x{j}")];
                let y = &ops[&format!("x{k}")];
                let sign = x.commutation_sign(y).expect("same register width");
                assert_eq!(sign, -1, "x{j}, x{k} anticommute");
            }
        }
    }
    assert!(t0.elapsed() < Duration::from_secs(10), "budget 10s, took {:?}", t0.elapsed());
}

/// All clauses over three variables with distinct variables, widths 1..=3.
fn clauses3() -> Vec<Vec<Lit>> {
    let mut out = Vec::new();
    for v in 0..3 {
        for neg in [false, true] {
            out.push(vec![Lit { var: v, neg }]);
        }
    }
    for v in 0..3 {
        for w in v + 1..3 {
            for nv in [false, true] {
                for nw in [false, true] {
                    out.push(vec![Lit { var: v, neg: nv }, Lit { var: w, neg: nw }]);
                }
            }
        }
    }
    for mask in 0..8u32 {
        out.push(
            (0..3)
                .map(|v| Lit { var: v, neg: mask >> v & 1 == 1 })
                .collect(),
        );
    }
    assert_eq!(out.len(), 26);
    out
}

/// Bit b of the result says whether assignment b (bit v = variable v)
/// satisfies the clause.
fn clause_mask(lits: &[Lit]) -> u8 {
    let mut m = 0u8;
    for a in 0..8u8 {
        if lits.iter().any(|l| (a >> l.var & 1 == 1) != l.neg) {
            m |= 1 << a;
        }
    }
    m
}

fn clause_bcs(nvars: usize, clauses: &[&Vec<Lit>]) -> Bcs {
    let mut b = Bcs::new(bcslab::Domain::Bool01);
    for v in 0..nvars {
        b.add_var(&format!("x{v}")).expect("fresh");
    }
    for lits in clauses {
        b.add_constraint(Constraint::Clause { lits: (*lits).clone() }).expect("valid");
    }
    b
}

/// Complete 3-colorability decision: domain propagation plus backtracking on
/// the smallest open domain. Colors of the first vertex and its first
/// neighbor are fixed, which is harmless up to color permutation.
fn colorable3(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j as u32);
        adj[j].push(i as u32);
    }
    let mut dom: Vec<u8> = vec![0b111; n];
    dom[0] = 0b001;
    if let Some(&w) = adj[0].first() {
        dom[w as usize] = 0b010;
    }

    fn propagate(dom: &mut [u8], adj: &[Vec<u32>], mut queue: Vec<u32>) -> bool {
        while let Some(v) = queue.pop() {
            let d = dom[v as usize];
            for &w in &adj[v as usize] {
                let old = dom[w as usize];
                let new = old & !d;
                if new == 0 {
                    return false;
                }
                if new != old {
                    dom[w as usize] = new;
                    if new.count_ones() == 1 {
                        queue.push(w);
                    }
                }
            }
        }
        true
    }

    fn solve(dom: &mut Vec<u8>, adj: &[Vec<u32>]) -> bool {
        let mut best: Option<(u32, usize)> = None;
        for (v, d) in dom.iter().enumerate() {
            let k = d.count_ones();
            if k > 1 && best.map_or(true, |(bk, _)| k < bk) {
                best = Some((k, v));
                if k == 2 {
                    break;
                }
            }
        }
        let Some((_, v)) = best else { return true };
        let d = dom[v];
        for c in 0..3 {
            if d >> c & 1 == 0 {
                continue;
            }
            let mut next = dom.clone();
            next[v] = 1 << c;
            if propagate(&mut next, adj, vec![v as u32]) && solve(&mut next, adj) {
                return true;
            }
        }
        false
    }

    let seeds: Vec<u32> = (0..n as u32).filter(|&v| dom[v as usize].count_ones() == 1).collect();
    let mut dom = dom;
    propagate(&mut dom, adj.as_slice(), seeds) && solve(&mut dom, adj.as_slice())
}

fn random_clause_set(rng: &mut ChaCha8Rng, nvars: usize, max_width: usize) -> Vec<Vec<Lit>> {
    let nclauses = rng.gen_range(0..=6);
    (0..nclauses)
        .map(|_| {
            let width = rng.gen_range(1..=max_width.min(nvars));
            let mut vars: Vec<usize> = (0..nvars).collect();
            vars.shuffle(rng);
            vars.truncate(width);
            vars.into_iter().map(|var| Lit { var, neg: rng.gen_bool(0.5) }).collect()
        })
        .collect()
}

#[test]
fn c07_reductions_preserve_satisfiability() {
    let t0 = Instant::now();
    let base = clauses3();
    let masks: Vec<u8> = base.iter().map(|c| clause_mask(c)).collect();

    // every set of at most four distinct clauses over three variables
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..26 {
        sets.push(vec![a]);
        for b in a + 1..26 {
            sets.push(vec![a, b]);
            for c in b + 1..26 {
                sets.push(vec![a, b, c]);
                for d in c + 1..26 {
                    sets.push(vec![a, b, c, d]);
                }
            }
        }
    }
    assert_eq!(sets.len(), 17_902);

    let mut colored = 0usize;
    for set in &sets {
        let src_sat = set.iter().fold(0xffu8, |m, &i| m & masks[i]) != 0;
        let clauses: Vec<&Vec<Lit>> = set.iter().map(|&i| &base[i]).collect();
        let b = clause_bcs(3, &clauses);

        let (g, _) = reduce_3sat_to_3coloring(&b).expect("within width");
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let tgt = colorable3(g.num_vertices(), &edges);
        assert_eq!(src_sat, tgt, "coloring mismatch on {set:?}");
        colored += 1;

        let (out, _) = reduce_3sat_to_1in3(&b).expect("within width");
        assert_eq!(
            src_sat,
            solve_backtracking(&out, &BTreeMap::new()).is_some(),
            "triple encoding mismatch on {set:?}"
        );

        let (out, _) = reduce_ksat_to_3sat(&b).expect("clause system");
        assert_eq!(
            src_sat,
            solve_backtracking(&out, &BTreeMap::new()).is_some(),
            "width reduction mismatch on {set:?}"
        );

        let (out, _) = harden_3sat(&b).expect("within width");
        assert_eq!(
            src_sat,
            solve_backtracking(&out, &BTreeMap::new()).is_some(),
            "hardening mismatch on {set:?}"
        );

        let (out, _) = occurrence_reduce(&b, 3).expect("limit is legal");
        assert_eq!(
            src_sat,
            solve_backtracking(&out, &BTreeMap::new()).is_some(),
            "occurrence split mismatch on {set:?}"
        );
    }
    assert_eq!(colored, 17_902);

    // random instances on up to six variables
    let mut rng = ChaCha8Rng::seed_from_u64(407);
    for round in 0..50 {
        let nvars = rng.gen_range(3..=6);
        let wide = random_clause_set(&mut rng, nvars, 5.min(nvars));
        let narrow: Vec<Vec<Lit>> =
            wide.iter().map(|c| c[..c.len().min(3)].to_vec()).collect();

        let nb = clause_bcs(nvars, &narrow.iter().collect::<Vec<_>>());
        let narrow_sat = classical_solve_bruteforce(&nb).is_some();
        let (g, _) = reduce_3sat_to_3coloring(&nb).expect("within width");
        let edges: Vec<(usize, usize)> = g.edges().collect();
        assert_eq!(narrow_sat, colorable3(g.num_vertices(), &edges), "round {round}");
        let (out, _) = reduce_3sat_to_1in3(&nb).expect("within width");
        assert_eq!(narrow_sat, classical_solve_bruteforce(&out).is_some(), "round {round}");
        let (out, _) = harden_3sat(&nb).expect("within width");
        assert_eq!(narrow_sat, classical_solve_bruteforce(&out).is_some(), "round {round}");
        let (out, _) = occurrence_reduce(&nb, 3).expect("limit is legal");
        assert_eq!(narrow_sat, classical_solve_bruteforce(&out).is_some(), "round {round}");

        let wb = clause_bcs(nvars, &wide.iter().collect::<Vec<_>>());
        let wide_sat = classical_solve_bruteforce(&wb).is_some();
        let (out, _) = reduce_ksat_to_3sat(&wb).expect("clause system");
        assert_eq!(wide_sat, classical_solve_bruteforce(&out).is_some(), "round {round}");
    }

    // encoding a game as a system preserves having a perfect strategy
    for round in 0..10 {
        let answers_a = vec![rng.gen_range(2..=3), rng.gen_range(2..=3)];
        let answers_b = vec![2usize, 2];
        let mut support = Vec::new();
        for s in 0..2 {
            for t in 0..2 {
                let mut win = std::collections::BTreeSet::new();
                for a in 0..answers_a[s] {
                    for bb in 0..answers_b[t] {
                        if rng.gen_bool(0.6) {
                            win.insert((a, bb));
                        }
                    }
                }
                support.push(SupportEntry { s, t, p: rational(1, 4), win });
            }
        }
        let g = GameSpec { answers_a, answers_b, support };
        let perfect = classical_game_value(&g).is_one();
        let b = game_to_bcs(&g);
        assert_eq!(
            perfect,
            classical_solve_bruteforce(&b).is_some(),
            "game encoding mismatch on round {round}"
        );
    }

    assert!(t0.elapsed() < Duration::from_secs(120), "budget 2min, took {:?}", t0.elapsed());
}

/// All clauses over `nvars` variables with width at most two.
fn clauses2(nvars: usize) -> Vec<Vec<Lit>> {
    let mut out = Vec::new();
    for v in 0..nvars {
        for neg in [false, true] {
            out.push(vec![Lit { var: v, neg }]);
        }
    }
    for v in 0..nvars {
        for w in v + 1..nvars {
            for nv in [false, true] {
                for nw in [false, true] {
                    out.push(vec![Lit { var: v, neg: nv }, Lit { var: w, neg: nw }]);
                }
            }
        }
    }
    out
}

/// All Horn clauses (at most one positive literal) over three variables.
fn horn_clauses3() -> Vec<Vec<Lit>> {
    let mut out = Vec::new();
    for lits in clauses3() {
        if lits.iter().filter(|l| !l.neg).count() <= 1 {
            out.push(lits);
        }
    }
    out
}

fn assert_model_satisfies(b: &Bcs, model: &[bool]) {
    assert!(b.satisfied_by(model), "returned assignment violates a constraint");
}

#[test]
fn c08_polynomial_time_solvers_match_brute_force() {
    let t0 = Instant::now();
    let mut checked = 0usize;

    // exhaustive: every set of at most three binary clauses over four
    // variables, and every set of at most four Horn clauses over three
    let base2 = clauses2(4);
    assert_eq!(base2.len(), 32);
    let mut idx: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..base2.len() {
        idx.push(vec![a]);
        for b in a + 1..base2.len() {
            idx.push(vec![a, b]);
            for c in b + 1..base2.len() {
                idx.push(vec![a, b, c]);
            }
        }
    }
    for set in &idx {
        let clauses: Vec<&Vec<Lit>> = set.iter().map(|&i| &base2[i]).collect();
        let b = clause_bcs(4, &clauses);
        let oracle = classical_solve_bruteforce(&b).is_some();
        match solve_2sat(&b).expect("binary clauses") {
            Some(model) => {
                assert!(oracle, "implication graph found a model where none exists");
                assert_model_satisfies(&b, &model);
            }
            None => assert!(!oracle, "implication graph missed a model"),
        }
        checked += 1;
    }

    let horn = horn_clauses3();
    assert_eq!(horn.len(), 19);
    let mut idx: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..horn.len() {
        idx.push(vec![a]);
        for b in a + 1..horn.len() {
            idx.push(vec![a, b]);
            for c in b + 1..horn.len() {
                idx.push(vec![a, b, c]);
                for d in c + 1..horn.len() {
                    idx.push(vec![a, b, c, d]);
                }
            }
        }
    }
    for set in &idx {
        let clauses: Vec<&Vec<Lit>> = set.iter().map(|&i| &horn[i]).collect();
        let b = clause_bcs(3, &clauses);
        let oracle = classical_solve_bruteforce(&b).is_some();
        match solve_hornsat(&b).expect("Horn clauses") {
            Some(model) => {
                assert!(oracle, "pebbling found a model where none exists");
                assert_model_satisfies(&b, &model);
            }
            None => assert!(!oracle, "pebbling missed a model"),
        }
        checked += 1;
    }
    assert!(checked >= 10_000, "exhaustive corpora too small: {checked}");

    // random larger instances
    let mut rng = ChaCha8Rng::seed_from_u64(408);
    for _ in 0..250 {
        let nvars = rng.gen_range(5..=8);
        let all = clauses2(nvars);
        let count = rng.gen_range(0..=12);
        let picked: Vec<&Vec<Lit>> = (0..count).map(|_| &all[rng.gen_range(0..all.len())]).collect();
        let b = clause_bcs(nvars, &picked);
        let oracle = classical_solve_bruteforce(&b).is_some();
        match solve_2sat(&b).expect("binary clauses") {
            Some(model) => {
                assert!(oracle);
                assert_model_satisfies(&b, &model);
            }
            None => assert!(!oracle),
        }
    }
    for _ in 0..250 {
        let nvars = rng.gen_range(5..=8);
        let count = rng.gen_range(0..=12);
        let picked: Vec<Vec<Lit>> = (0..count)
            .map(|_| {
                let width = rng.gen_range(1..=3);
                let mut vars: Vec<usize> = (0..nvars).collect();
                vars.shuffle(&mut rng);
                vars.truncate(width);
                let pos = rng.gen_range(0..=width); // position of the positive literal, if any
                vars.into_iter()
                    .enumerate()
                    .map(|(i, var)| Lit { var, neg: i != pos })
                    .collect()
            })
            .collect();
        let b = clause_bcs(nvars, &picked.iter().collect::<Vec<_>>());
        let oracle = classical_solve_bruteforce(&b).is_some();
        match solve_hornsat(&b).expect("Horn clauses") {
            Some(model) => {
                assert!(oracle);
                assert_model_satisfies(&b, &model);
            }
            None => assert!(!oracle),
        }
    }

    assert!(t0.elapsed() < Duration::from_secs(60), "budget 1min, took {:?}", t0.elapsed());
}

fn corpus() -> Vec<(String, String)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .expect("corpus directory ships with the tests")
        .map(|e| e.expect("readable").path())
        .filter(|p| p.extension().is_some_and(|x| x == "bcs"))
        .collect();
    files.sort();
    assert!(files.len() >= 20, "corpus shrank to {} files", files.len());
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().expect("named").to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).expect("readable"))
        })
        .collect()
}

#[test]
fn c09_occurrence_reduction_bounds_and_preserves() {
    let t0 = Instant::now();
    for (name, text) in corpus() {
        let b = Bcs::parse(&text).expect("corpus parses");
        let (out, _) = occurrence_reduce(&b, 3).expect("limit is legal");
        assert!(max_occurrence(&out) <= 3, "{name}: occurrence above three");
        assert_eq!(
            classical_solve_bruteforce(&b).is_some(),
            classical_solve_bruteforce(&out).is_some(),
            "{name}: satisfiability changed"
        );
    }
    assert!(t0.elapsed() < Duration::from_secs(10), "budget 10s, took {:?}", t0.elapsed());
}

#[test]
fn c10_round_trip_and_determinism() {
    for (name, text) in corpus() {
        let b = Bcs::parse(&text).expect("corpus parses");
        let canon = b.to_text();
        let again = Bcs::parse(&canon).expect("canonical form parses");
        assert_eq!(again.to_text(), canon, "{name}: canonical form not a fixpoint");
        assert_eq!(
            b.var_names().iter().collect::<std::collections::BTreeSet<_>>(),
            again.var_names().iter().collect::<std::collections::BTreeSet<_>>(),
            "{name}: variable names changed"
        );
        assert_eq!(b.constraints().len(), again.constraints().len(), "{name}");
        assert_eq!(
            classical_solve_bruteforce(&b).is_some(),
            classical_solve_bruteforce(&again).is_some(),
            "{name}: satisfiability changed"
        );
    }

    // identical invocations, byte-identical output
    for args in [
        vec!["gen", "magic-square"],
        vec!["certify", "--gadget", "onein3", "--pair", "x,y", "--degree", "6"],
        vec!["gen", "chsh"],
    ] {
        let (c1, o1) = run_with_stdin(bin().args(&args), b"");
        let (c2, o2) = run_with_stdin(bin().args(&args), b"");
        assert_eq!(c1, c2, "{args:?}: exit codes differ");
        assert_eq!(o1, o2, "{args:?}: output differs between runs");
    }
}
