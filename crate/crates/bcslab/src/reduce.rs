//! Reductions between constraint satisfaction problems that preserve both
//! classical and operator satisfiability.
//!
//! A plain Karp reduction can lose operator solutions: variables that shared
//! a constraint in the source may end up in disjoint constraints of the
//! target, so their operators are no longer forced to commute. Each
//! reduction here therefore attaches commutativity gadgets (prisms for
//! coloring, triple chains for exactly-one systems, fresh three-literal
//! clauses for clause systems) to the pairs whose locality the classical
//! construction breaks. Every reduction returns a trace recording the
//! attached gadgets and their fresh names.

use crate::bcs::{Bcs, BcsError, Constraint, Domain, GameSpec, Lit, VarId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("input must use the 01 domain")]
    WrongDomain,
    #[error("constraint {index} is a {kind} constraint; clause form is required")]
    NotClause { index: usize, kind: &'static str },
    #[error("clause {index} has {width} literals, more than {max}")]
    TooWide { index: usize, width: usize, max: usize },
    #[error("occurrence limit must be at least 3, got {0}")]
    LimitTooSmall(usize),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),
    #[error("self loop on {0:?}")]
    SelfLoop(String),
    #[error(transparent)]
    Name(#[from] BcsError),
    #[error("{0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// graphs

/// An undirected graph with named vertices, the input of the coloring
/// problems.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColoringInstance {
    vertices: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl ColoringInstance {
    pub fn new() -> ColoringInstance {
        ColoringInstance::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<usize, ReduceError> {
        if self.index.contains_key(name) {
            return Err(ReduceError::DuplicateVertex(name.to_string()));
        }
        let id = self.vertices.len();
        self.vertices.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn vertex_name(&self, id: usize) -> &str {
        &self.vertices[id]
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<(), ReduceError> {
        let i = self.vertex(a).ok_or_else(|| ReduceError::UnknownVertex(a.to_string()))?;
        let j = self.vertex(b).ok_or_else(|| ReduceError::UnknownVertex(b.to_string()))?;
        if i == j {
            return Err(ReduceError::SelfLoop(a.to_string()));
        }
        self.edges.insert((i.min(j), i.max(j)));
        Ok(())
    }

    fn add_edge_ids(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.edges.insert((i.min(j), i.max(j)));
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Text form: one `v <name>` line per vertex in order, then one
    /// `e <name> <name>` line per edge, sorted. `#` starts a comment.
    pub fn parse(text: &str) -> Result<ColoringInstance, ReduceError> {
        let mut g = ColoringInstance::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let fail = |msg: String| ReduceError::Parse { line, msg };
            match fields[0] {
                "v" if fields.len() == 2 => {
                    g.add_vertex(fields[1]).map_err(|e| fail(e.to_string()))?;
                }
                "e" if fields.len() == 3 => {
                    g.add_edge(fields[1], fields[2]).map_err(|e| fail(e.to_string()))?;
                }
                "v" | "e" => {
                    return Err(fail(format!("malformed {:?} line", fields[0])));
                }
                other => {
                    return Err(fail(format!("unknown directive {other:?}")));
                }
            }
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.vertices {
            out.push_str("v ");
            out.push_str(name);
            out.push('\n');
        }
        for &(i, j) in &self.edges {
            out.push_str("e ");
            out.push_str(&self.vertices[i]);
            out.push(' ');
            out.push_str(&self.vertices[j]);
            out.push('\n');
        }
        out
    }

    /// Finds a proper `k`-coloring by backtracking in vertex order, trying
    /// only canonical colorings (each vertex may open at most one new color
    /// class), or reports that none exists.
    pub fn color(&self, k: usize) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        if n == 0 {
            return Some(Vec::new());
        }
        if k == 0 {
            return None;
        }
        let mut earlier: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in &self.edges {
            earlier[j].push(i);
        }
        let mut colors = vec![usize::MAX; n];
        fn go(
            v: usize,
            used: usize,
            k: usize,
            earlier: &[Vec<usize>],
            colors: &mut Vec<usize>,
        ) -> bool {
            if v == colors.len() {
                return true;
            }
            let cap = used.min(k - 1);
            for c in 0..=cap {
                if earlier[v].iter().any(|&u| colors[u] == c) {
                    continue;
                }
                colors[v] = c;
                if go(v + 1, used.max(c + 1), k, earlier, colors) {
                    return true;
                }
            }
            colors[v] = usize::MAX;
            false
        }
        go(0, 0, k, &earlier, &mut colors).then_some(colors)
    }
}

/// The triangular prism: triangles a-b-c and d-e-f joined by the rungs a-d,
/// b-e, c-f. The pair (a, e) is not adjacent; as a gadget the prism forces
/// the operators of a and e to commute while leaving every classical color
/// pair for them extendible.
pub fn prism() -> ColoringInstance {
    let mut g = ColoringInstance::new();
    for v in ["a", "b", "c", "d", "e", "f"] {
        g.add_vertex(v).expect("distinct");
    }
    for (x, y) in [
        ("a", "b"),
        ("a", "c"),
        ("b", "c"),
        ("d", "e"),
        ("d", "f"),
        ("e", "f"),
        ("a", "d"),
        ("b", "e"),
        ("c", "f"),
    ] {
        g.add_edge(x, y).expect("known vertices");
    }
    g
}

/// The triple system forcing x and y to commute in any operator assignment:
/// exactly-one constraints over {x, u1, u4}, {y, u2, u4}, {u1, u2, u3}.
/// Every classical value pair for (x, y) extends to the u's.
pub fn one_in_three_gadget() -> Bcs {
    let mut b = Bcs::new(Domain::Bool01);
    for name in ["x", "y", "u1", "u2", "u3", "u4"] {
        b.add_var(name).expect("distinct");
    }
    for triple in [["x", "u1", "u4"], ["y", "u2", "u4"], ["u1", "u2", "u3"]] {
        let vars = triple.iter().map(|n| b.var(n).expect("added")).collect();
        b.add_constraint(Constraint::ExactlyOne { vars }).expect("valid");
    }
    b
}

// ---------------------------------------------------------------------------
// traces

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetRecord {
    pub kind: String,
    /// Existing variables or vertices the gadget is attached to.
    pub attached: Vec<String>,
    /// Names created by the gadget.
    pub fresh: Vec<String>,
}

/// What a reduction did: how source variables map into the target and which
/// gadgets were attached where.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub kind: String,
    pub var_map: BTreeMap<String, String>,
    pub gadgets: Vec<GadgetRecord>,
}

impl ReductionTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<ReductionTrace, ReduceError> {
        serde_json::from_str(text).map_err(|e| ReduceError::Invalid(e.to_string()))
    }
}

fn record(kind: &str, attached: Vec<String>, fresh: Vec<String>) -> GadgetRecord {
    GadgetRecord { kind: kind.to_string(), attached, fresh }
}

/// Hands out names that are new to the construction, appending underscores
/// until free.
struct FreshNamer {
    taken: BTreeSet<String>,
}

impl FreshNamer {
    fn new<I: IntoIterator<Item = String>>(existing: I) -> FreshNamer {
        FreshNamer { taken: existing.into_iter().collect() }
    }

    fn claim(&mut self, base: String) -> String {
        let mut name = base;
        while self.taken.contains(&name) {
            name.push('_');
        }
        self.taken.insert(name.clone());
        name
    }
}

fn clause_view(b: &Bcs, max: usize) -> Result<Vec<Vec<Lit>>, ReduceError> {
    if b.domain() != Domain::Bool01 {
        return Err(ReduceError::WrongDomain);
    }
    let mut out = Vec::new();
    for (index, c) in b.constraints().iter().enumerate() {
        let Constraint::Clause { lits } = c else {
            return Err(ReduceError::NotClause { index, kind: c.kind() });
        };
        if lits.len() > max {
            return Err(ReduceError::TooWide { index, width: lits.len(), max });
        }
        out.push(lits.clone());
    }
    Ok(out)
}

/// Pads a clause to exactly three literals by repeating the last one.
fn pad3(lits: &[Lit]) -> [Lit; 3] {
    match *lits {
        [a] => [a, a, a],
        [a, b] => [a, b, b],
        [a, b, c] => [a, b, c],
        _ => unreachable!("clause width checked"),
    }
}

// ---------------------------------------------------------------------------
// encodings into constraint systems

/// The system of a k-coloring problem: one indicator variable per vertex and
/// color with an exactly-one constraint per vertex, and a binary clause per
/// edge and color forbidding the shared color.
pub fn coloring_to_bcs(g: &ColoringInstance, k: usize) -> Result<Bcs, ReduceError> {
    if k == 0 {
        return Err(ReduceError::Invalid("at least one color is needed".to_string()));
    }
    let mut b = Bcs::new(Domain::Bool01);
    for name in g.vertices() {
        for alpha in 0..k {
            b.add_var(&format!("{name}_{alpha}"))?;
        }
    }
    for v in 0..g.num_vertices() {
        let vars = (0..k).map(|alpha| v * k + alpha).collect();
        b.add_constraint(Constraint::ExactlyOne { vars })?;
    }
    for (i, j) in g.edges() {
        for alpha in 0..k {
            b.add_constraint(Constraint::Clause {
                lits: vec![Lit::neg(i * k + alpha), Lit::neg(j * k + alpha)],
            })?;
        }
    }
    Ok(b)
}

/// The system of a marking problem given by contexts: each context is a set
/// of names, exactly one of which must be marked. Names may repeat across
/// contexts.
pub fn ks_to_bcs(sets: &[Vec<String>]) -> Result<Bcs, ReduceError> {
    let mut b = Bcs::new(Domain::Bool01);
    for (index, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(ReduceError::Invalid(format!("context {index} is empty")));
        }
        let mut vars = Vec::with_capacity(set.len());
        for name in set {
            vars.push(b.ensure_var(name)?);
        }
        b.add_constraint(Constraint::ExactlyOne { vars })
            .map_err(|e| ReduceError::Invalid(format!("context {index}: {e}")))?;
    }
    Ok(b)
}

/// The system whose satisfiability says a game has a perfect classical (or,
/// for operator assignments, perfect entangled projective) strategy: an
/// indicator per question and answer, exactly-one per question, and a zero
/// product for every losing answer pair in the support.
pub fn game_to_bcs(g: &GameSpec) -> Bcs {
    let mut b = Bcs::new(Domain::Bool01);
    for (s, &m) in g.answers_a.iter().enumerate() {
        for a in 0..m {
            b.add_var(&format!("x{s}_{a}")).expect("generated names are distinct");
        }
    }
    for (t, &m) in g.answers_b.iter().enumerate() {
        for ans in 0..m {
            b.add_var(&format!("y{t}_{ans}")).expect("generated names are distinct");
        }
    }
    let xs: Vec<usize> = {
        let mut acc = 0;
        g.answers_a.iter().map(|&m| { let s = acc; acc += m; s }).collect()
    };
    let a_total: usize = g.answers_a.iter().sum();
    let ys: Vec<usize> = {
        let mut acc = a_total;
        g.answers_b.iter().map(|&m| { let s = acc; acc += m; s }).collect()
    };
    for (s, &m) in g.answers_a.iter().enumerate() {
        b.add_constraint(Constraint::ExactlyOne { vars: (0..m).map(|a| xs[s] + a).collect() })
            .expect("valid");
    }
    for (t, &m) in g.answers_b.iter().enumerate() {
        b.add_constraint(Constraint::ExactlyOne {
            vars: (0..m).map(|ans| ys[t] + ans).collect(),
        })
        .expect("valid");
    }
    for e in &g.support {
        for a in 0..g.answers_a[e.s] {
            for ans in 0..g.answers_b[e.t] {
                if !e.win.contains(&(a, ans)) {
                    b.add_constraint(Constraint::Clause {
                        lits: vec![Lit::neg(xs[e.s] + a), Lit::neg(ys[e.t] + ans)],
                    })
                    .expect("valid");
                }
            }
        }
    }
    b
}

// ---------------------------------------------------------------------------
// clause system to 3-coloring

/// Reduces a clause system (width at most three) to 3-colorability.
///
/// The classical core is standard: a base triangle F, T, B; per variable an
/// adjacent pair `x.pos`, `x.neg` both joined to B; per clause two stacked
/// or-triangles whose output vertex is pinned away from the F and B colors.
/// On top of that, a prism is attached to every non-adjacent pair of
/// vertices appearing around the same clause (its six gadget vertices, its
/// literal vertices, and F, T, B) and to every pair of a literal vertex with
/// F or T, so that in any operator 3-coloring the relevant vertex operators
/// commute and the classical argument applies unchanged.
pub fn reduce_3sat_to_3coloring(
    b: &Bcs,
) -> Result<(ColoringInstance, ReductionTrace), ReduceError> {
    let clauses = clause_view(b, 3)?;
    let mut g = ColoringInstance::new();
    let mut gadgets = Vec::new();

    let base_f = g.add_vertex("F")?;
    let base_t = g.add_vertex("T")?;
    let base_b = g.add_vertex("B")?;
    g.add_edge_ids(base_f, base_t);
    g.add_edge_ids(base_f, base_b);
    g.add_edge_ids(base_t, base_b);
    gadgets.push(record(
        "base",
        vec![],
        vec!["F".to_string(), "T".to_string(), "B".to_string()],
    ));

    let mut var_map = BTreeMap::new();
    let mut pos = Vec::with_capacity(b.num_vars());
    let mut neg = Vec::with_capacity(b.num_vars());
    for name in b.var_names() {
        let p = g.add_vertex(&format!("{name}.pos"))?;
        let q = g.add_vertex(&format!("{name}.neg"))?;
        g.add_edge_ids(p, q);
        g.add_edge_ids(p, base_b);
        g.add_edge_ids(q, base_b);
        var_map.insert(name.clone(), format!("{name}.pos"));
        gadgets.push(record(
            "variable",
            vec![name.clone()],
            vec![format!("{name}.pos"), format!("{name}.neg")],
        ));
        pos.push(p);
        neg.push(q);
    }
    let lit_vertex = |l: Lit| if l.neg { neg[l.var] } else { pos[l.var] };

    // pairs that get a prism, collected before any prism edges exist
    let mut wanted: BTreeSet<(usize, usize)> = BTreeSet::new();

    for (j, lits) in clauses.iter().enumerate() {
        let [l1, l2, l3] = pad3(lits);
        let names: Vec<String> = ["p1", "q1", "r1", "p2", "q2", "r2"]
            .iter()
            .map(|s| format!("c{j}.{s}"))
            .collect();
        let mut ids = Vec::with_capacity(6);
        for name in &names {
            ids.push(g.add_vertex(name)?);
        }
        let (p1, q1, r1, p2, q2, r2) = (ids[0], ids[1], ids[2], ids[3], ids[4], ids[5]);
        for (u, v) in [(p1, q1), (p1, r1), (q1, r1), (p2, q2), (p2, r2), (q2, r2)] {
            g.add_edge_ids(u, v);
        }
        g.add_edge_ids(p1, lit_vertex(l1));
        g.add_edge_ids(q1, lit_vertex(l2));
        g.add_edge_ids(p2, r1);
        g.add_edge_ids(q2, lit_vertex(l3));
        g.add_edge_ids(r2, base_f);
        g.add_edge_ids(r2, base_b);
        gadgets.push(record(
            "clause",
            [l1, l2, l3].iter().map(|&l| g.vertex_name(lit_vertex(l)).to_string()).collect(),
            names,
        ));

        let mut around: BTreeSet<usize> = ids.iter().copied().collect();
        around.extend([l1, l2, l3].iter().map(|&l| lit_vertex(l)));
        around.extend([base_f, base_t, base_b]);
        let around: Vec<usize> = around.into_iter().collect();
        for (i, &u) in around.iter().enumerate() {
            for &v in &around[i + 1..] {
                wanted.insert((u, v));
            }
        }
    }
    for v in 0..b.num_vars() {
        for lit in [pos[v], neg[v]] {
            for base in [base_f, base_t] {
                wanted.insert((lit.min(base), lit.max(base)));
            }
        }
    }
    wanted.retain(|&(u, v)| !g.has_edge(u, v));

    for (k, &(u, v)) in wanted.iter().enumerate() {
        let names: Vec<String> =
            ["b", "c", "d", "f"].iter().map(|s| format!("pr{k}.{s}")).collect();
        let mut fresh = Vec::with_capacity(4);
        for name in &names {
            fresh.push(g.add_vertex(name)?);
        }
        let (fb, fc, fd, ff) = (fresh[0], fresh[1], fresh[2], fresh[3]);
        for (x, y) in [
            (u, fb),
            (u, fc),
            (fb, fc),
            (fd, v),
            (fd, ff),
            (v, ff),
            (u, fd),
            (fb, v),
            (fc, ff),
        ] {
            g.add_edge_ids(x, y);
        }
        gadgets.push(record(
            "prism",
            vec![g.vertex_name(u).to_string(), g.vertex_name(v).to_string()],
            names,
        ));
    }

    let trace = ReductionTrace { kind: "3sat_to_3coloring".to_string(), var_map, gadgets };
    Ok((g, trace))
}

// ---------------------------------------------------------------------------
// clause system to exactly-one triples

/// Reduces a clause system (width at most three) to a system of exactly-one
/// constraints over at most three variables.
///
/// Globally: a constant-zero variable (pinned through a complementary pair
/// one.a, one.b) and a negation companion `x.not` for every variable. Per
/// clause with literal terms t1, t2, t3: fresh u1..u6 and the five triples
/// {t1,u1,u4}, {t2,u2,u4}, {u1,u2,u3}, {u4,u5,u6}, {t3,u5,zero}. The first
/// three already force t1 and t2 to commute in operator assignments; the
/// pairs (t1,t3) and (t2,t3) each get a fresh copy of the same triple gadget.
pub fn reduce_3sat_to_1in3(b: &Bcs) -> Result<(Bcs, ReductionTrace), ReduceError> {
    let clauses = clause_view(b, 3)?;
    let mut out = Bcs::new(Domain::Bool01);
    for name in b.var_names() {
        out.add_var(name)?;
    }
    let mut namer = FreshNamer::new(b.var_names().iter().cloned());
    let mut gadgets = Vec::new();

    let zero_n = namer.claim("zero".to_string());
    let onea_n = namer.claim("one.a".to_string());
    let oneb_n = namer.claim("one.b".to_string());
    let zero = out.add_var(&zero_n)?;
    let onea = out.add_var(&onea_n)?;
    let oneb = out.add_var(&oneb_n)?;
    out.add_constraint(Constraint::ExactlyOne { vars: vec![onea, oneb] })?;
    out.add_constraint(Constraint::ExactlyOne { vars: vec![zero, onea, oneb] })?;
    gadgets.push(record("constants", vec![], vec![zero_n, onea_n, oneb_n]));

    let mut nots = Vec::with_capacity(b.num_vars());
    for v in 0..b.num_vars() {
        let name = b.var_name(v);
        let not_n = namer.claim(format!("{name}.not"));
        let not = out.add_var(&not_n)?;
        out.add_constraint(Constraint::ExactlyOne { vars: vec![v, not] })?;
        gadgets.push(record("negation", vec![name.to_string()], vec![not_n]));
        nots.push(not);
    }
    let term = |l: Lit| if l.neg { nots[l.var] } else { l.var };

    for (j, lits) in clauses.iter().enumerate() {
        let [l1, l2, l3] = pad3(lits);
        let (t1, t2, t3) = (term(l1), term(l2), term(l3));
        let u: Vec<VarId> = (1..=6)
            .map(|i| -> Result<VarId, ReduceError> {
                Ok(out.add_var(&namer.claim(format!("u{j}.{i}")))?)
            })
            .collect::<Result<_, _>>()?;
        for vars in [
            vec![t1, u[0], u[3]],
            vec![t2, u[1], u[3]],
            vec![u[0], u[1], u[2]],
            vec![u[3], u[4], u[5]],
            vec![t3, u[4], zero],
        ] {
            out.add_constraint(Constraint::ExactlyOne { vars })?;
        }
        gadgets.push(record(
            "chain",
            [t1, t2, t3].iter().map(|&v| out.var_name(v).to_string()).collect(),
            u.iter().map(|&v| out.var_name(v).to_string()).collect(),
        ));

        for (tag, a) in [("xz", t1), ("yz", t2)] {
            if a == t3 {
                continue;
            }
            let gv: Vec<VarId> = (1..=4)
                .map(|i| -> Result<VarId, ReduceError> {
                    Ok(out.add_var(&namer.claim(format!("g{j}.{tag}.{i}")))?)
                })
                .collect::<Result<_, _>>()?;
            for vars in [
                vec![a, gv[0], gv[3]],
                vec![t3, gv[1], gv[3]],
                vec![gv[0], gv[1], gv[2]],
            ] {
                out.add_constraint(Constraint::ExactlyOne { vars })?;
            }
            gadgets.push(record(
                "commutativity",
                vec![out.var_name(a).to_string(), out.var_name(t3).to_string()],
                gv.iter().map(|&v| out.var_name(v).to_string()).collect(),
            ));
        }
    }

    let var_map = b.var_names().iter().map(|n| (n.clone(), n.clone())).collect();
    let trace = ReductionTrace { kind: "3sat_to_1in3".to_string(), var_map, gadgets };
    Ok((out, trace))
}

// ---------------------------------------------------------------------------
// wide clauses to width three

/// Splits every clause wider than three into the usual chain with fresh link
/// variables, then restores the lost locality: for every pair of variables
/// of the chain (original or link) that do not share one of its clauses, a
/// fresh clause u or v or z with a new variable z is added.
pub fn reduce_ksat_to_3sat(b: &Bcs) -> Result<(Bcs, ReductionTrace), ReduceError> {
    let clauses = clause_view(b, usize::MAX)?;
    let mut out = Bcs::new(Domain::Bool01);
    for name in b.var_names() {
        out.add_var(name)?;
    }
    let mut namer = FreshNamer::new(b.var_names().iter().cloned());
    let mut gadgets = Vec::new();

    for (j, lits) in clauses.iter().enumerate() {
        let k = lits.len();
        if k <= 3 {
            out.add_constraint(Constraint::Clause { lits: lits.clone() })?;
            continue;
        }
        let links: Vec<VarId> = (1..=k - 3)
            .map(|i| -> Result<VarId, ReduceError> {
                Ok(out.add_var(&namer.claim(format!("y{j}.{i}")))?)
            })
            .collect::<Result<_, _>>()?;
        let mut chain: Vec<Vec<Lit>> = Vec::with_capacity(k - 2);
        chain.push(vec![lits[0], lits[1], Lit::pos(links[0])]);
        for i in 1..k - 3 {
            chain.push(vec![Lit::neg(links[i - 1]), lits[i + 1], Lit::pos(links[i])]);
        }
        chain.push(vec![Lit::neg(links[k - 4]), lits[k - 2], lits[k - 1]]);

        let mut cooccur: BTreeSet<(VarId, VarId)> = BTreeSet::new();
        for c in &chain {
            for (i, a) in c.iter().enumerate() {
                for bb in &c[i + 1..] {
                    let (u, v) = (a.var.min(bb.var), a.var.max(bb.var));
                    cooccur.insert((u, v));
                }
            }
            out.add_constraint(Constraint::Clause { lits: c.clone() })?;
        }
        gadgets.push(record(
            "chain",
            lits.iter().map(|l| out.var_name(l.var).to_string()).collect(),
            links.iter().map(|&v| out.var_name(v).to_string()).collect(),
        ));

        let mut universe: BTreeSet<VarId> = lits.iter().map(|l| l.var).collect();
        universe.extend(&links);
        let universe: Vec<VarId> = universe.into_iter().collect();
        let mut m = 0;
        for (i, &u) in universe.iter().enumerate() {
            for &v in &universe[i + 1..] {
                if cooccur.contains(&(u, v)) {
                    continue;
                }
                let z = out.add_var(&namer.claim(format!("z{j}.{m}")))?;
                m += 1;
                out.add_constraint(Constraint::Clause {
                    lits: vec![Lit::pos(u), Lit::pos(v), Lit::pos(z)],
                })?;
                gadgets.push(record(
                    "commutativity",
                    vec![out.var_name(u).to_string(), out.var_name(v).to_string()],
                    vec![out.var_name(z).to_string()],
                ));
            }
        }
    }

    let var_map = b.var_names().iter().map(|n| (n.clone(), n.clone())).collect();
    let trace = ReductionTrace { kind: "ksat_to_3sat".to_string(), var_map, gadgets };
    Ok((out, trace))
}

// ---------------------------------------------------------------------------
// hardening

/// Adds a clause x or y or h with a fresh h for every pair of variables that
/// never share a clause. Classical satisfiability is untouched (h picks up
/// the slack), but operator assignments of the result are forced to be
/// pairwise commuting, hence essentially classical.
pub fn harden_3sat(b: &Bcs) -> Result<(Bcs, ReductionTrace), ReduceError> {
    let clauses = clause_view(b, 3)?;
    let mut out = Bcs::new(Domain::Bool01);
    for name in b.var_names() {
        out.add_var(name)?;
    }
    for lits in &clauses {
        out.add_constraint(Constraint::Clause { lits: lits.clone() })?;
    }
    let mut namer = FreshNamer::new(b.var_names().iter().cloned());
    let mut cooccur: BTreeSet<(VarId, VarId)> = BTreeSet::new();
    for lits in &clauses {
        let scope: Vec<VarId> = {
            let s: BTreeSet<VarId> = lits.iter().map(|l| l.var).collect();
            s.into_iter().collect()
        };
        for (i, &u) in scope.iter().enumerate() {
            for &v in &scope[i + 1..] {
                cooccur.insert((u, v));
            }
        }
    }
    let mut gadgets = Vec::new();
    let mut m = 0;
    for u in 0..b.num_vars() {
        for v in u + 1..b.num_vars() {
            if cooccur.contains(&(u, v)) {
                continue;
            }
            let h = out.add_var(&namer.claim(format!("h{m}")))?;
            m += 1;
            out.add_constraint(Constraint::Clause {
                lits: vec![Lit::pos(u), Lit::pos(v), Lit::pos(h)],
            })?;
            gadgets.push(record(
                "commutativity",
                vec![out.var_name(u).to_string(), out.var_name(v).to_string()],
                vec![out.var_name(h).to_string()],
            ));
        }
    }
    let var_map = b.var_names().iter().map(|n| (n.clone(), n.clone())).collect();
    let trace = ReductionTrace { kind: "harden_3sat".to_string(), var_map, gadgets };
    Ok((out, trace))
}

// ---------------------------------------------------------------------------
// occurrence bounding

fn remap_constraint(c: &Constraint, f: &dyn Fn(VarId) -> VarId) -> Constraint {
    match c {
        Constraint::Parity { vars, odd } => {
            Constraint::Parity { vars: vars.iter().map(|&v| f(v)).collect(), odd: *odd }
        }
        Constraint::Clause { lits } => Constraint::Clause {
            lits: lits.iter().map(|l| Lit { var: f(l.var), neg: l.neg }).collect(),
        },
        Constraint::ExactlyOne { vars } => {
            Constraint::ExactlyOne { vars: vars.iter().map(|&v| f(v)).collect() }
        }
        Constraint::Table { vars, allowed } => Constraint::Table {
            vars: vars.iter().map(|&v| f(v)).collect(),
            allowed: allowed.clone(),
        },
    }
}

struct TreeBuilder<'a> {
    v: VarId,
    vname: &'a str,
    limit: usize,
    counter: usize,
    namer: &'a mut FreshNamer,
    out: &'a mut Bcs,
    replace: &'a mut BTreeMap<(usize, VarId), VarId>,
    equalities: &'a mut Vec<(VarId, VarId)>,
    fresh: Vec<String>,
}

impl TreeBuilder<'_> {
    /// Creates a copy node covering `range`; leaves absorb the occurrences,
    /// inner nodes split the range between two children.
    fn build(&mut self, range: &[usize]) -> Result<VarId, ReduceError> {
        self.counter += 1;
        let name = self.namer.claim(format!("{}.t{}", self.vname, self.counter));
        let id = self.out.add_var(&name)?;
        self.fresh.push(name);
        if range.len() <= self.limit - 1 {
            for &ci in range {
                self.replace.insert((ci, self.v), id);
            }
        } else {
            let mid = range.len().div_ceil(2);
            let l = self.build(&range[..mid])?;
            let r = self.build(&range[mid..])?;
            self.equalities.push((id, l));
            self.equalities.push((id, r));
        }
        Ok(id)
    }
}

/// Bounds how many constraints any variable takes part in. A variable in
/// more than `limit` constraints is replaced by a binary tree of copies
/// joined by even-parity (equality) constraints: the original keeps its name
/// at the root with two tree links, inner copies carry three links, and each
/// leaf copy serves at most `limit - 1` of the original occurrences plus its
/// tree link. Equalities force equal operators, so both classical and
/// operator satisfiability are preserved exactly.
pub fn occurrence_reduce(b: &Bcs, limit: usize) -> Result<(Bcs, ReductionTrace), ReduceError> {
    if limit < 3 {
        return Err(ReduceError::LimitTooSmall(limit));
    }
    let n = b.num_vars();
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in b.constraints().iter().enumerate() {
        for v in c.scope() {
            inc[v].push(i);
        }
    }
    let mut out = Bcs::new(b.domain());
    for name in b.var_names() {
        out.add_var(name)?;
    }
    let mut namer = FreshNamer::new(b.var_names().iter().cloned());
    let mut replace: BTreeMap<(usize, VarId), VarId> = BTreeMap::new();
    let mut equalities: Vec<(VarId, VarId)> = Vec::new();
    let mut gadgets = Vec::new();
    for v in 0..n {
        if inc[v].len() <= limit {
            continue;
        }
        let vname = b.var_name(v).to_string();
        let mut builder = TreeBuilder {
            v,
            vname: &vname,
            limit,
            counter: 0,
            namer: &mut namer,
            out: &mut out,
            replace: &mut replace,
            equalities: &mut equalities,
            fresh: Vec::new(),
        };
        let mid = inc[v].len().div_ceil(2);
        let range = inc[v].clone();
        let l = builder.build(&range[..mid])?;
        let r = builder.build(&range[mid..])?;
        let fresh = std::mem::take(&mut builder.fresh);
        equalities.push((v, l));
        equalities.push((v, r));
        gadgets.push(record("copy_tree", vec![vname], fresh));
    }
    for (i, c) in b.constraints().iter().enumerate() {
        let mapped = remap_constraint(c, &|v| replace.get(&(i, v)).copied().unwrap_or(v));
        out.add_constraint(mapped)?;
    }
    for (a, c) in equalities {
        out.add_constraint(Constraint::Parity { vars: vec![a, c], odd: false })?;
    }
    let var_map = b.var_names().iter().map(|nm| (nm.clone(), nm.clone())).collect();
    let trace = ReductionTrace { kind: "occurrence_reduce".to_string(), var_map, gadgets };
    Ok((out, trace))
}

/// Largest number of constraints any single variable takes part in.
pub fn max_occurrence(b: &Bcs) -> usize {
    let mut occ = vec![0usize; b.num_vars()];
    for c in b.constraints() {
        for v in c.scope() {
            occ[v] += 1;
        }
    }
    occ.into_iter().max().unwrap_or(0)
}
