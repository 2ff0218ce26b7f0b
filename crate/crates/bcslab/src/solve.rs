//! Classical solvers over constraint systems: the polynomial special cases,
//! exact optimal game values, and a propagating backtracking search.

use crate::bcs::{Bcs, Constraint, GameSpec, VarId};
use num::{BigRational, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("constraint {index} is a {found} constraint, expected {expected}")]
    WrongKind { index: usize, found: &'static str, expected: &'static str },
    #[error("constraint {index}: {msg}")]
    WrongShape { index: usize, msg: String },
}

// ---------------------------------------------------------------------------
// 2-SAT via the implication graph

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SccStats {
    /// Total directed edges examined; exactly the edge count when the
    /// traversal is linear.
    pub edge_visits: usize,
}

struct ImplicationGraph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl ImplicationGraph {
    fn new(nodes: usize) -> ImplicationGraph {
        ImplicationGraph { adj: vec![Vec::new(); nodes], edges: 0 }
    }

    fn add_edge(&mut self, from: usize, to: usize) {
        self.adj[from].push(to);
        self.edges += 1;
    }

    /// Strongly connected components, iteratively. Components are numbered in
    /// completion order, which is a reverse topological order of the
    /// condensation: an edge between components always goes from a higher
    /// component id to a lower one.
    fn scc(&self) -> (Vec<usize>, SccStats) {
        const UNSEEN: usize = usize::MAX;
        let n = self.adj.len();
        let mut disc = vec![UNSEEN; n];
        let mut low = vec![0usize; n];
        let mut comp = vec![UNSEEN; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut frames: Vec<(usize, usize)> = Vec::new();
        let mut next_disc = 0usize;
        let mut next_comp = 0usize;
        let mut edge_visits = 0usize;
        for root in 0..n {
            if disc[root] != UNSEEN {
                continue;
            }
            disc[root] = next_disc;
            low[root] = next_disc;
            next_disc += 1;
            stack.push(root);
            on_stack[root] = true;
            frames.push((root, 0));
            while let Some(&(v, ci)) = frames.last() {
                if ci < self.adj[v].len() {
                    frames.last_mut().expect("nonempty").1 += 1;
                    let w = self.adj[v][ci];
                    edge_visits += 1;
                    if disc[w] == UNSEEN {
                        disc[w] = next_disc;
                        low[w] = next_disc;
                        next_disc += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    frames.pop();
                    if low[v] == disc[v] {
                        loop {
                            let w = stack.pop().expect("scc stack");
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                    if let Some(&(u, _)) = frames.last() {
                        low[u] = low[u].min(low[v]);
                    }
                }
            }
        }
        (comp, SccStats { edge_visits })
    }
}

/// Solves a system of clauses of width one or two. A variable is set true
/// exactly when the component of its positive literal completes before the
/// component of its negative literal.
pub fn solve_2sat(b: &Bcs) -> Result<Option<Vec<bool>>, SolveError> {
    let n = b.num_vars();
    let mut g = ImplicationGraph::new(2 * n);
    let node = |l: crate::bcs::Lit| 2 * l.var + usize::from(l.neg);
    for (index, c) in b.constraints().iter().enumerate() {
        let Constraint::Clause { lits } = c else {
            return Err(SolveError::WrongKind {
                index,
                found: c.kind(),
                expected: "clause",
            });
        };
        match lits[..] {
            [l] => g.add_edge(node(l) ^ 1, node(l)),
            [l1, l2] => {
                g.add_edge(node(l1) ^ 1, node(l2));
                g.add_edge(node(l2) ^ 1, node(l1));
            }
            _ => {
                return Err(SolveError::WrongShape {
                    index,
                    msg: format!("clause of width {} is not 2-SAT", lits.len()),
                })
            }
        }
    }
    let (comp, stats) = g.scc();
    assert_eq!(stats.edge_visits, g.edges, "every edge is visited exactly once");
    let mut a = vec![false; n];
    for v in 0..n {
        if comp[2 * v] == comp[2 * v + 1] {
            return Ok(None);
        }
        a[v] = comp[2 * v] < comp[2 * v + 1];
    }
    debug_assert!(b.satisfied_by(&a));
    Ok(Some(a))
}

// ---------------------------------------------------------------------------
// Horn satisfiability by pebbling

struct HornClause {
    head: Option<VarId>,
    body: Vec<VarId>,
}

/// Solves a system of clauses with at most one positive literal each by unit
/// propagation. The returned model, when one exists, is the minimal one: it
/// sets exactly the variables forced in every model.
pub fn solve_hornsat(b: &Bcs) -> Result<Option<Vec<bool>>, SolveError> {
    let n = b.num_vars();
    let mut horn: Vec<HornClause> = Vec::new();
    for (index, c) in b.constraints().iter().enumerate() {
        let Constraint::Clause { lits } = c else {
            return Err(SolveError::WrongKind {
                index,
                found: c.kind(),
                expected: "clause",
            });
        };
        let mut lits = lits.clone();
        lits.sort();
        lits.dedup();
        let positives: Vec<VarId> =
            lits.iter().filter(|l| !l.neg).map(|l| l.var).collect();
        if positives.len() > 1 {
            return Err(SolveError::WrongShape {
                index,
                msg: format!("{} positive literals is not Horn", positives.len()),
            });
        }
        horn.push(HornClause {
            head: positives.first().copied(),
            body: lits.iter().filter(|l| l.neg).map(|l| l.var).collect(),
        });
    }
    // counter pebbling: a clause fires once its whole body is pebbled
    let mut counters: Vec<usize> = horn.iter().map(|h| h.body.len()).collect();
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, h) in horn.iter().enumerate() {
        for &v in &h.body {
            watch[v].push(i);
        }
    }
    let mut pebbled = vec![false; n];
    let mut queue: Vec<VarId> = Vec::new();
    let fire = |i: usize,
                    pebbled: &mut Vec<bool>,
                    queue: &mut Vec<VarId>|
     -> bool {
        match horn[i].head {
            None => false,
            Some(h) => {
                if !pebbled[h] {
                    pebbled[h] = true;
                    queue.push(h);
                }
                true
            }
        }
    };
    for i in 0..horn.len() {
        if counters[i] == 0 && !fire(i, &mut pebbled, &mut queue) {
            return Ok(None);
        }
    }
    while let Some(v) = queue.pop() {
        for idx in watch[v].clone() {
            counters[idx] -= 1;
            if counters[idx] == 0 && !fire(idx, &mut pebbled, &mut queue) {
                return Ok(None);
            }
        }
    }
    debug_assert!(b.satisfied_by(&pebbled));
    Ok(Some(pebbled))
}

// ---------------------------------------------------------------------------
// parity systems over GF(2)

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityOutcome {
    pub assignment: Vec<bool>,
    /// The system has exactly 2^log2_count solutions.
    pub log2_count: usize,
}

/// Gaussian elimination over GF(2) with word-packed rows. Free variables are
/// set to zero, so the reported assignment is the first solution in
/// elimination order.
pub fn solve_parity_gf2(b: &Bcs) -> Result<Option<ParityOutcome>, SolveError> {
    let n = b.num_vars();
    let width = n.div_ceil(64);
    let mut rows: Vec<(Vec<u64>, bool)> = Vec::new();
    for (index, c) in b.constraints().iter().enumerate() {
        let Constraint::Parity { vars, odd } = c else {
            return Err(SolveError::WrongKind {
                index,
                found: c.kind(),
                expected: "parity",
            });
        };
        let mut bits = vec![0u64; width];
        for &v in vars {
            bits[v / 64] ^= 1 << (v % 64);
        }
        rows.push((bits, *odd));
    }
    let get = |bits: &[u64], col: usize| bits[col / 64] >> (col % 64) & 1 == 1;
    let mut rank = 0usize;
    let mut pivot_col = Vec::new();
    for col in 0..n {
        let Some(pivot) = (rank..rows.len()).find(|&r| get(&rows[r].0, col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (pivot_bits, pivot_rhs) = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && get(&row.0, col) {
                for (dst, src) in row.0.iter_mut().zip(&pivot_bits) {
                    *dst ^= src;
                }
                row.1 ^= pivot_rhs;
            }
        }
        pivot_col.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|(_, rhs)| *rhs) {
        return Ok(None);
    }
    let mut assignment = vec![false; n];
    for (r, &col) in pivot_col.iter().enumerate() {
        // after full reduction the row mentions its pivot and free columns
        // only, and the free columns stay zero
        assignment[col] = rows[r].1;
    }
    debug_assert!(b.satisfied_by(&assignment));
    Ok(Some(ParityOutcome { assignment, log2_count: n - rank }))
}

// ---------------------------------------------------------------------------
// exact classical game value

/// Maximum winning probability over deterministic strategies, computed by
/// enumerating the second player's response functions and picking the first
/// player's best reply pointwise.
pub fn classical_game_value(g: &GameSpec) -> BigRational {
    let t_count = g.answers_b.len();
    assert!(t_count <= 20, "too many second-player questions: {t_count}");
    let combos: u64 = g
        .answers_b
        .iter()
        .try_fold(1u64, |acc, &k| {
            let next = acc.checked_mul(k as u64)?;
            (next <= 1 << 20).then_some(next)
        })
        .expect("too many second-player strategies");
    let mut by_s: BTreeMap<usize, Vec<&crate::bcs::SupportEntry>> = BTreeMap::new();
    for e in &g.support {
        by_s.entry(e.s).or_default().push(e);
    }
    let mut best = BigRational::zero();
    let mut fb = vec![0usize; t_count];
    for _ in 0..combos {
        let mut total = BigRational::zero();
        for (&s, entries) in &by_s {
            let mut best_reply = BigRational::zero();
            for a in 0..g.answers_a[s] {
                let mut mass = BigRational::zero();
                for e in entries {
                    if e.win.contains(&(a, fb[e.t])) {
                        mass += &e.p;
                    }
                }
                best_reply = best_reply.max(mass);
            }
            total += best_reply;
        }
        best = best.max(total);
        // mixed-radix increment
        for t in 0..t_count {
            fb[t] += 1;
            if fb[t] < g.answers_b[t] {
                break;
            }
            fb[t] = 0;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// general backtracking search

fn propagate(b: &Bcs, a: &mut [Option<bool>]) -> bool {
    loop {
        let mut changed = false;
        for c in b.constraints() {
            match c {
                Constraint::Parity { vars, odd } => {
                    let mut acc = *odd;
                    let mut open = None;
                    let mut open_count = 0usize;
                    for &v in vars {
                        match a[v] {
                            Some(x) => acc ^= x,
                            None => {
                                open = Some(v);
                                open_count += 1;
                            }
                        }
                    }
                    match open_count {
                        0 if acc => return false,
                        1 => {
                            a[open.expect("open var")] = Some(acc);
                            changed = true;
                        }
                        _ => {}
                    }
                }
                Constraint::Clause { lits } => {
                    if lits.iter().any(|l| a[l.var] == Some(!l.neg)) {
                        continue;
                    }
                    let open: Vec<_> =
                        lits.iter().filter(|l| a[l.var].is_none()).collect();
                    match open[..] {
                        [] => return false,
                        [l] => {
                            a[l.var] = Some(!l.neg);
                            changed = true;
                        }
                        _ => {}
                    }
                }
                Constraint::ExactlyOne { vars } => {
                    let trues = vars.iter().filter(|&&v| a[v] == Some(true)).count();
                    let open: Vec<VarId> =
                        vars.iter().copied().filter(|&v| a[v].is_none()).collect();
                    if trues > 1 {
                        return false;
                    }
                    if trues == 1 {
                        for v in open {
                            a[v] = Some(false);
                            changed = true;
                        }
                    } else {
                        match open[..] {
                            [] => return false,
                            [v] => {
                                a[v] = Some(true);
                                changed = true;
                            }
                            _ => {}
                        }
                    }
                }
                Constraint::Table { vars, allowed } => {
                    let live: Vec<&Vec<bool>> = allowed
                        .iter()
                        .filter(|row| {
                            vars.iter()
                                .zip(row.iter())
                                .all(|(&v, &bit)| a[v].is_none() || a[v] == Some(bit))
                        })
                        .collect();
                    if live.is_empty() {
                        return false;
                    }
                    for (i, &v) in vars.iter().enumerate() {
                        if a[v].is_none() && live.iter().all(|row| row[i] == live[0][i]) {
                            a[v] = Some(live[0][i]);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(b: &Bcs, mut a: Vec<Option<bool>>) -> Option<Vec<bool>> {
    if !propagate(b, &mut a) {
        return None;
    }
    match a.iter().position(|x| x.is_none()) {
        None => Some(a.into_iter().map(|x| x.expect("complete")).collect()),
        Some(v) => [false, true].into_iter().find_map(|val| {
            let mut next = a.clone();
            next[v] = Some(val);
            search(b, next)
        }),
    }
}

/// Backtracking search with constraint propagation. Branches on the lowest
/// unassigned variable, false first, so the returned model is the
/// lexicographically least one extending the pins.
pub fn solve_backtracking(
    b: &Bcs,
    pins: &BTreeMap<VarId, bool>,
) -> Option<Vec<bool>> {
    let mut a = vec![None; b.num_vars()];
    for (&v, &val) in pins {
        a[v] = Some(val);
    }
    let model = search(b, a);
    if let Some(m) = &model {
        debug_assert!(b.satisfied_by(m));
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcs::{classical_solve_bruteforce, derive_game, magic_square, Domain, Lit};
    use num::One;
    use proptest::prelude::*;

    fn all_models(b: &Bcs) -> Vec<Vec<bool>> {
        let n = b.num_vars();
        (0..1u64 << n)
            .map(|m| (0..n).map(|i| (m >> (n - 1 - i)) & 1 == 1).collect::<Vec<bool>>())
            .filter(|a| b.satisfied_by(a))
            .collect()
    }

    fn clause_system(n: usize, clauses: &[Vec<(usize, bool)>]) -> Bcs {
        let mut b = Bcs::new(Domain::Bool01);
        for i in 0..n {
            b.add_var(&format!("v{i}")).unwrap();
        }
        for lits in clauses {
            b.add_constraint(Constraint::Clause {
                lits: lits.iter().map(|&(v, neg)| Lit { var: v, neg }).collect(),
            })
            .unwrap();
        }
        b
    }

    #[test]
    fn two_sat_chains_force_values() {
        // v0 and (v0 -> v1) and (v1 -> v2)
        let b = clause_system(
            3,
            &[
                vec![(0, false)],
                vec![(0, true), (1, false)],
                vec![(1, true), (2, false)],
            ],
        );
        assert_eq!(solve_2sat(&b).unwrap(), Some(vec![true; 3]));
    }

    #[test]
    fn two_sat_detects_contradiction() {
        let b = clause_system(1, &[vec![(0, false)], vec![(0, true)]]);
        assert_eq!(solve_2sat(&b).unwrap(), None);
        let p = magic_square();
        assert!(matches!(
            solve_2sat(&p),
            Err(SolveError::WrongKind { index: 0, .. })
        ));
    }

    #[test]
    fn hornsat_minimal_model_is_forced_intersection() {
        // the fact v0 plus rules v0 -> v1 and (v1 and v2) -> v3
        let b = clause_system(
            5,
            &[
                vec![(0, false)],
                vec![(0, true), (1, false)],
                vec![(1, true), (2, true), (3, false)],
            ],
        );
        let model = solve_hornsat(&b).unwrap().unwrap();
        assert_eq!(model, vec![true, true, false, false, false]);
        let intersection = all_models(&b)
            .into_iter()
            .reduce(|x, y| x.iter().zip(&y).map(|(&p, &q)| p && q).collect())
            .unwrap();
        assert_eq!(model, intersection);
    }

    #[test]
    fn hornsat_unsat_when_false_is_pebbled() {
        let b = clause_system(
            2,
            &[
                vec![(0, false)],
                vec![(0, true), (1, false)],
                vec![(0, true), (1, true)],
            ],
        );
        assert_eq!(solve_hornsat(&b).unwrap(), None);
    }

    #[test]
    fn parity_first_solution_in_elimination_order() {
        let mut b = Bcs::new(Domain::Bool01);
        b.add_var("x").unwrap();
        b.add_var("y").unwrap();
        b.add_constraint(Constraint::Parity { vars: vec![0, 1], odd: true }).unwrap();
        let out = solve_parity_gf2(&b).unwrap().unwrap();
        assert_eq!(out.assignment, vec![true, false]);
        assert_eq!(out.log2_count, 1);
    }

    #[test]
    fn parity_magic_square_is_inconsistent() {
        assert_eq!(solve_parity_gf2(&magic_square()).unwrap(), None);
    }

    #[test]
    fn game_value_of_magic_square() {
        let g = derive_game(&magic_square());
        let v = classical_game_value(&g);
        assert_eq!(v, BigRational::new(17.into(), 18.into()));
    }

    #[test]
    fn game_value_of_satisfiable_system_is_one() {
        let mut b = Bcs::new(Domain::Bool01);
        b.add_var("u").unwrap();
        b.add_var("v").unwrap();
        b.add_constraint(Constraint::Clause { lits: vec![Lit::pos(0), Lit::pos(1)] })
            .unwrap();
        b.add_constraint(Constraint::ExactlyOne { vars: vec![0, 1] }).unwrap();
        assert!(classical_game_value(&derive_game(&b)).is_one());
    }

    #[test]
    fn backtracking_respects_pins() {
        let b = magic_square();
        let no_pins = solve_backtracking(&b, &BTreeMap::new());
        assert_eq!(no_pins, None);
        let mut relaxed = Bcs::new(Domain::BoolPM);
        for k in 1..=9 {
            relaxed.add_var(&format!("x{k}")).unwrap();
        }
        for c in &b.constraints()[..5] {
            relaxed.add_constraint(c.clone()).unwrap();
        }
        let pins: BTreeMap<VarId, bool> = [(0, true)].into_iter().collect();
        let m = solve_backtracking(&relaxed, &pins).unwrap();
        assert!(m[0]);
        assert!(relaxed.satisfied_by(&m));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn two_sat_matches_brute_force(
            raw in proptest::collection::vec(
                (0..5usize, any::<bool>(), 0..5usize, any::<bool>(), any::<bool>()),
                1..14,
            )
        ) {
            let clauses: Vec<Vec<(usize, bool)>> = raw
                .into_iter()
                .map(|(v1, n1, v2, n2, unit)| {
                    if unit { vec![(v1, n1)] } else { vec![(v1, n1), (v2, n2)] }
                })
                .collect();
            let b = clause_system(5, &clauses);
            let got = solve_2sat(&b).unwrap();
            let brute = classical_solve_bruteforce(&b);
            prop_assert_eq!(got.is_some(), brute.is_some());
            if let Some(a) = got {
                prop_assert!(b.satisfied_by(&a));
            }
        }

        #[test]
        fn hornsat_matches_brute_force(
            raw in proptest::collection::vec(
                (proptest::option::of(0..5usize), 0u32..32),
                1..12,
            )
        ) {
            let clauses: Vec<Vec<(usize, bool)>> = raw
                .into_iter()
                .filter_map(|(head, body)| {
                    let mut lits: Vec<(usize, bool)> =
                        (0..5).filter(|i| body >> i & 1 == 1).map(|v| (v, true)).collect();
                    if let Some(h) = head {
                        lits.retain(|&(v, _)| v != h);
                        lits.push((h, false));
                    }
                    (!lits.is_empty()).then_some(lits)
                })
                .collect();
            prop_assume!(!clauses.is_empty());
            let b = clause_system(5, &clauses);
            let got = solve_hornsat(&b).unwrap();
            let models = all_models(&b);
            prop_assert_eq!(got.is_some(), !models.is_empty());
            if let Some(m) = got {
                let intersection = models
                    .into_iter()
                    .reduce(|x, y| x.iter().zip(&y).map(|(&p, &q)| p && q).collect())
                    .unwrap();
                prop_assert_eq!(m, intersection);
            }
        }

        #[test]
        fn parity_count_matches_brute_force(
            rows in proptest::collection::vec((1u32..64, any::<bool>()), 1..8)
        ) {
            let mut b = Bcs::new(Domain::Bool01);
            for i in 0..6 {
                b.add_var(&format!("v{i}")).unwrap();
            }
            for (mask, odd) in rows {
                let vars: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
                b.add_constraint(Constraint::Parity { vars, odd }).unwrap();
            }
            let brute = all_models(&b).len();
            match solve_parity_gf2(&b).unwrap() {
                None => prop_assert_eq!(brute, 0),
                Some(out) => {
                    prop_assert!(b.satisfied_by(&out.assignment));
                    prop_assert_eq!(brute, 1usize << out.log2_count);
                }
            }
        }

        #[test]
        fn backtracking_finds_the_lex_least_model(
            masks in proptest::collection::vec((0u32..64, 0u32..64), 1..6),
            ones in proptest::collection::vec(1u32..64, 0..3),
            pin_bits in 0u32..8,
        ) {
            let mut b = Bcs::new(Domain::Bool01);
            for i in 0..6 {
                b.add_var(&format!("v{i}")).unwrap();
            }
            for (mask, negs) in masks {
                let lits: Vec<Lit> = (0..6)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|v| Lit { var: v, neg: negs >> v & 1 == 1 })
                    .collect();
                if !lits.is_empty() {
                    b.add_constraint(Constraint::Clause { lits }).unwrap();
                }
            }
            for mask in ones {
                let vars: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
                b.add_constraint(Constraint::ExactlyOne { vars }).unwrap();
            }
            let pins: BTreeMap<VarId, bool> =
                (0..2usize).filter(|i| pin_bits >> i & 1 == 1)
                    .map(|i| (i, pin_bits >> (i + 2) & 1 == 1))
                    .collect();
            let got = solve_backtracking(&b, &pins);
            let want = all_models(&b)
                .into_iter()
                .find(|m| pins.iter().all(|(&v, &val)| m[v] == val));
            prop_assert_eq!(got, want);
        }
    }
}
