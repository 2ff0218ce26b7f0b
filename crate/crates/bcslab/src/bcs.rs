//! Binary constraint systems and their nonlocal games.
//!
//! A system is a list of named binary variables plus constraints over them.
//! Two value domains are supported: ordinary 0/1 bits and the +-1 domain used
//! for parity systems, where a stored bit b stands for (-1)^b. Satisfaction,
//! the text format, derived games, and the translation to noncommutative
//! polynomial relations all live here.

use crate::rewrite::poly::{coef_real, NcPoly};
use num::{BigRational, One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Variables take values 0 and 1.
    Bool01,
    /// Variables take values +1 and -1; a stored bit b means (-1)^b.
    BoolPM,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Bool01 => "01",
            Domain::BoolPM => "pm",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lit {
    pub var: VarId,
    pub neg: bool,
}

impl Lit {
    pub fn pos(var: VarId) -> Lit {
        Lit { var, neg: false }
    }

    pub fn neg(var: VarId) -> Lit {
        Lit { var, neg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// XOR of the variables equals `odd`. Over the +-1 domain this says the
    /// product of the variables is (-1)^odd.
    Parity { vars: Vec<VarId>, odd: bool },
    /// At least one literal holds (0/1 domain only).
    Clause { lits: Vec<Lit> },
    /// Exactly one of the variables is 1 (0/1 domain only).
    ExactlyOne { vars: Vec<VarId> },
    /// The scope tuple must be one of the allowed rows (0/1 domain only).
    Table { vars: Vec<VarId>, allowed: Vec<Vec<bool>> },
}

impl Constraint {
    pub fn kind(&self) -> &'static str {
        match self {
            Constraint::Parity { .. } => "parity",
            Constraint::Clause { .. } => "clause",
            Constraint::ExactlyOne { .. } => "one",
            Constraint::Table { .. } => "table",
        }
    }

    /// Distinct variables in first-occurrence order.
    pub fn scope(&self) -> Vec<VarId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |v: VarId| {
            if seen.insert(v) {
                out.push(v);
            }
        };
        match self {
            Constraint::Parity { vars, .. } | Constraint::ExactlyOne { vars } => {
                vars.iter().copied().for_each(&mut push)
            }
            Constraint::Table { vars, .. } => vars.iter().copied().for_each(&mut push),
            Constraint::Clause { lits } => lits.iter().map(|l| l.var).for_each(&mut push),
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BcsError {
    #[error("invalid variable name {0:?}")]
    BadName(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVar(String),
    #[error("unknown variable {0:?}")]
    UnknownVar(String),
    #[error("variable id {0} out of range")]
    BadVarId(usize),
    #[error("{0} constraints are not allowed over the {1} domain")]
    KindNotAllowed(&'static str, &'static str),
    #[error("{0}")]
    Malformed(String),
}

fn name_ok(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('-')
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '#' | ':' | '=' | ','))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bcs {
    domain: Domain,
    vars: Vec<String>,
    index: BTreeMap<String, VarId>,
    constraints: Vec<Constraint>,
}

impl Bcs {
    pub fn new(domain: Domain) -> Bcs {
        Bcs { domain, vars: Vec::new(), index: BTreeMap::new(), constraints: Vec::new() }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.vars[id]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add_var(&mut self, name: &str) -> Result<VarId, BcsError> {
        if !name_ok(name) {
            return Err(BcsError::BadName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(BcsError::DuplicateVar(name.to_string()));
        }
        let id = self.vars.len();
        self.vars.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Adds the variable if it is new, otherwise returns the existing id.
    pub fn ensure_var(&mut self, name: &str) -> Result<VarId, BcsError> {
        match self.var(name) {
            Some(id) => Ok(id),
            None => self.add_var(name),
        }
    }

    fn check_vars(&self, vars: &[VarId], distinct: bool) -> Result<(), BcsError> {
        for &v in vars {
            if v >= self.vars.len() {
                return Err(BcsError::BadVarId(v));
            }
        }
        if distinct {
            let set: BTreeSet<_> = vars.iter().collect();
            if set.len() != vars.len() {
                return Err(BcsError::Malformed(
                    "repeated variable in constraint scope".to_string(),
                ));
            }
        }
        Ok(())
    }

    pub fn add_constraint(&mut self, c: Constraint) -> Result<(), BcsError> {
        if self.domain == Domain::BoolPM && !matches!(c, Constraint::Parity { .. }) {
            return Err(BcsError::KindNotAllowed(c.kind(), "pm"));
        }
        match &c {
            Constraint::Parity { vars, .. } | Constraint::ExactlyOne { vars } => {
                if vars.is_empty() {
                    return Err(BcsError::Malformed(format!("empty {} constraint", c.kind())));
                }
                self.check_vars(vars, true)?;
            }
            Constraint::Clause { lits } => {
                if lits.is_empty() {
                    return Err(BcsError::Malformed("empty clause".to_string()));
                }
                let vars: Vec<VarId> = lits.iter().map(|l| l.var).collect();
                self.check_vars(&vars, false)?;
            }
            Constraint::Table { vars, allowed } => {
                if vars.is_empty() || allowed.is_empty() {
                    return Err(BcsError::Malformed("empty table constraint".to_string()));
                }
                self.check_vars(vars, true)?;
                if allowed.iter().any(|row| row.len() != vars.len()) {
                    return Err(BcsError::Malformed("table row width mismatch".to_string()));
                }
            }
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn constraint_satisfied(&self, c: &Constraint, a: &[bool]) -> bool {
        match c {
            Constraint::Parity { vars, odd } => {
                vars.iter().fold(false, |p, &v| p ^ a[v]) == *odd
            }
            Constraint::Clause { lits } => lits.iter().any(|l| a[l.var] ^ l.neg),
            Constraint::ExactlyOne { vars } => vars.iter().filter(|&&v| a[v]).count() == 1,
            Constraint::Table { vars, allowed } => allowed
                .iter()
                .any(|row| vars.iter().zip(row).all(|(&v, &b)| a[v] == b)),
        }
    }

    pub fn satisfied_by(&self, a: &[bool]) -> bool {
        assert_eq!(a.len(), self.vars.len(), "assignment length mismatch");
        self.constraints.iter().all(|c| self.constraint_satisfied(c, a))
    }

    /// Unordered pairs of distinct variables sharing a constraint scope.
    /// Operators assigned to such pairs are required to commute.
    pub fn commutation_pairs(&self) -> BTreeSet<(VarId, VarId)> {
        let mut out = BTreeSet::new();
        for c in &self.constraints {
            let scope = c.scope();
            for (i, &u) in scope.iter().enumerate() {
                for &v in &scope[i + 1..] {
                    out.insert((u.min(v), u.max(v)));
                }
            }
        }
        out
    }

    /// Sum over the falsifying scope tuples of the ordered indicator product
    /// prod_i (bit_i ? x_i : 1 - x_i).
    fn falsifier_sum(&self, vars: &[VarId], sat: impl Fn(u32) -> bool) -> NcPoly {
        let m = vars.len();
        assert!(m <= 16, "scope too large to expand");
        let mut acc = NcPoly::zero();
        for tuple in 0..1u32 << m {
            if sat(tuple) {
                continue;
            }
            let mut prod = NcPoly::one();
            for (i, &v) in vars.iter().enumerate() {
                let x = NcPoly::letter(v as u32);
                let f = if (tuple >> i) & 1 == 1 { x } else { &NcPoly::one() - &x };
                prod = &prod * &f;
            }
            acc = &acc + &prod;
        }
        acc
    }

    /// The polynomial that vanishes exactly on the satisfying assignments of
    /// the constraint, with variables read as 0/1 values or as +-1 values
    /// according to the domain.
    pub fn constraint_polynomial(&self, c: &Constraint) -> NcPoly {
        match (self.domain, c) {
            (Domain::BoolPM, Constraint::Parity { vars, odd }) => {
                let mut prod = NcPoly::one();
                for &v in vars {
                    prod = &prod * &NcPoly::letter(v as u32);
                }
                let sign = if *odd { 1 } else { -1 };
                &prod + &NcPoly::scalar(coef_real(sign))
            }
            (Domain::Bool01, Constraint::Parity { vars, odd }) => {
                self.falsifier_sum(vars, |tuple| (tuple.count_ones() & 1 == 1) == *odd)
            }
            (_, Constraint::ExactlyOne { vars }) => {
                let mut acc = &NcPoly::zero() - &NcPoly::one();
                for &v in vars {
                    acc = &acc + &NcPoly::letter(v as u32);
                }
                acc
            }
            (_, Constraint::Clause { lits }) => {
                let mut prod = NcPoly::one();
                for l in lits {
                    let x = NcPoly::letter(l.var as u32);
                    let f = if l.neg { x } else { &NcPoly::one() - &x };
                    prod = &prod * &f;
                }
                prod
            }
            (_, Constraint::Table { vars, allowed }) => self.falsifier_sum(vars, |tuple| {
                allowed.iter().any(|row| {
                    row.iter().enumerate().all(|(i, &b)| ((tuple >> i) & 1 == 1) == b)
                })
            }),
        }
    }

    /// The defining relations of the system's operator algebra: one
    /// polynomial per constraint, then the square relation of each variable,
    /// then a commutator for every pair of variables sharing a constraint.
    pub fn to_polynomial_relations(&self) -> Vec<NcPoly> {
        let mut out: Vec<NcPoly> =
            self.constraints.iter().map(|c| self.constraint_polynomial(c)).collect();
        for v in 0..self.vars.len() {
            let x = NcPoly::letter(v as u32);
            let sq = &x * &x;
            let fixed = match self.domain {
                Domain::Bool01 => x,
                Domain::BoolPM => NcPoly::one(),
            };
            out.push(&sq - &fixed);
        }
        for (j, k) in self.commutation_pairs() {
            out.push(NcPoly::commutator(k as u32, j as u32));
        }
        out
    }

    pub fn render_poly(&self, p: &NcPoly) -> String {
        p.render(&|g| self.vars[g as usize].clone())
    }
}

/// The parity system whose rows and columns overlap like a 3x3 grid: every
/// row has even product, the first two columns even, the last column odd.
/// Classically unsatisfiable, but operator-satisfiable in dimension four.
pub fn magic_square() -> Bcs {
    let mut b = Bcs::new(Domain::BoolPM);
    let ids: Vec<VarId> =
        (1..=9).map(|k| b.add_var(&format!("x{k}")).expect("fresh")).collect();
    let lines: [([usize; 3], bool); 6] = [
        ([0, 1, 2], false),
        ([3, 4, 5], false),
        ([6, 7, 8], false),
        ([0, 3, 6], false),
        ([1, 4, 7], false),
        ([2, 5, 8], true),
    ];
    for (cells, odd) in lines {
        let vars = cells.iter().map(|&i| ids[i]).collect();
        b.add_constraint(Constraint::Parity { vars, odd }).expect("valid");
    }
    b
}

/// First satisfying assignment in lexicographic order (variable 0 is the most
/// significant bit, false before true), if any.
pub fn classical_solve_bruteforce(b: &Bcs) -> Option<Vec<bool>> {
    let n = b.num_vars();
    assert!(n <= 30, "brute force limited to 30 variables, got {n}");
    (0..1u64 << n)
        .map(|m| (0..n).map(|i| (m >> (n - 1 - i)) & 1 == 1).collect::<Vec<bool>>())
        .find(|a| b.satisfied_by(a))
}

// ---------------------------------------------------------------------------
// text format

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

impl Bcs {
    /// Parses the line-oriented text format. Variable ids follow declaration
    /// order; `#` starts a comment; the domain line, if present, must come
    /// before every other declaration.
    pub fn parse(text: &str) -> Result<Bcs, ParseError> {
        let mut domain: Option<Domain> = None;
        let mut b = Bcs::new(Domain::Bool01);
        let err = |line: usize, col: usize, msg: String| ParseError { line, col, msg };
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let content = raw.split('#').next().unwrap_or("");
            let toks = tokens(content);
            if toks.is_empty() {
                continue;
            }
            let (kcol, keyword) = toks[0];
            let args = &toks[1..];
            let lookup = |b: &Bcs, col: usize, name: &str| -> Result<VarId, ParseError> {
                b.var(name)
                    .ok_or_else(|| err(line_no, col, format!("unknown variable {name:?}")))
            };
            match keyword {
                "domain" => {
                    if domain.is_some() {
                        return Err(err(line_no, kcol, "repeated domain line".to_string()));
                    }
                    if !b.vars.is_empty() || !b.constraints.is_empty() {
                        return Err(err(
                            line_no,
                            kcol,
                            "domain line must precede all declarations".to_string(),
                        ));
                    }
                    let d = match args {
                        [(_, "01")] => Domain::Bool01,
                        [(_, "pm")] => Domain::BoolPM,
                        _ => {
                            return Err(err(
                                line_no,
                                kcol,
                                "expected `domain 01` or `domain pm`".to_string(),
                            ))
                        }
                    };
                    domain = Some(d);
                    b.domain = d;
                }
                "var" => {
                    if args.is_empty() {
                        return Err(err(line_no, kcol, "var line needs a name".to_string()));
                    }
                    for &(col, name) in args {
                        b.add_var(name).map_err(|e| err(line_no, col, e.to_string()))?;
                    }
                }
                "parity" => {
                    let eq = args.iter().position(|&(_, t)| t == "=").ok_or_else(|| {
                        err(line_no, kcol, "parity line needs `= 0` or `= 1`".to_string())
                    })?;
                    let mut vars = Vec::new();
                    for &(col, name) in &args[..eq] {
                        vars.push(lookup(&b, col, name)?);
                    }
                    let odd = match args[eq + 1..] {
                        [(_, "0")] => false,
                        [(_, "1")] => true,
                        _ => {
                            return Err(err(
                                line_no,
                                args[eq].0,
                                "expected a single 0 or 1 after `=`".to_string(),
                            ))
                        }
                    };
                    b.add_constraint(Constraint::Parity { vars, odd })
                        .map_err(|e| err(line_no, kcol, e.to_string()))?;
                }
                "clause" => {
                    let mut lits = Vec::new();
                    for &(col, tok) in args {
                        let (neg, name) = match tok.strip_prefix('-') {
                            Some(rest) => (true, rest),
                            None => (false, tok),
                        };
                        lits.push(Lit { var: lookup(&b, col, name)?, neg });
                    }
                    b.add_constraint(Constraint::Clause { lits })
                        .map_err(|e| err(line_no, kcol, e.to_string()))?;
                }
                "one" => {
                    let mut vars = Vec::new();
                    for &(col, name) in args {
                        vars.push(lookup(&b, col, name)?);
                    }
                    b.add_constraint(Constraint::ExactlyOne { vars })
                        .map_err(|e| err(line_no, kcol, e.to_string()))?;
                }
                "table" => {
                    let colon = args.iter().position(|&(_, t)| t == ":").ok_or_else(|| {
                        err(line_no, kcol, "table line needs `:` before the rows".to_string())
                    })?;
                    let mut vars = Vec::new();
                    for &(col, name) in &args[..colon] {
                        vars.push(lookup(&b, col, name)?);
                    }
                    let row_text: String = args[colon + 1..]
                        .iter()
                        .map(|&(_, t)| t)
                        .collect::<Vec<_>>()
                        .join("");
                    let rcol = args.get(colon + 1).map(|&(c, _)| c).unwrap_or(args[colon].0);
                    if row_text.is_empty() {
                        return Err(err(line_no, rcol, "table needs at least one row".to_string()));
                    }
                    let mut allowed = Vec::new();
                    for row in row_text.split(',') {
                        if row.len() != vars.len() || !row.chars().all(|c| c == '0' || c == '1')
                        {
                            return Err(err(
                                line_no,
                                rcol,
                                format!("bad table row {row:?} for {} variables", vars.len()),
                            ));
                        }
                        let bits: Vec<bool> = row.chars().map(|c| c == '1').collect();
                        if !allowed.contains(&bits) {
                            allowed.push(bits);
                        }
                    }
                    b.add_constraint(Constraint::Table { vars, allowed })
                        .map_err(|e| err(line_no, kcol, e.to_string()))?;
                }
                other => {
                    return Err(err(line_no, kcol, format!("unknown directive {other:?}")));
                }
            }
        }
        Ok(b)
    }

    /// Canonical text form: the domain line, variables sorted by name, then
    /// the constraints in order. Parsing the output reproduces the system up
    /// to variable numbering.
    pub fn to_text(&self) -> String {
        let mut out = format!("domain {}\n", self.domain);
        for name in self.index.keys() {
            out.push_str(&format!("var {name}\n"));
        }
        for c in &self.constraints {
            let name = |v: &VarId| self.vars[*v].clone();
            match c {
                Constraint::Parity { vars, odd } => {
                    let names: Vec<String> = vars.iter().map(name).collect();
                    out.push_str(&format!(
                        "parity {} = {}\n",
                        names.join(" "),
                        u8::from(*odd)
                    ));
                }
                Constraint::Clause { lits } => {
                    let toks: Vec<String> = lits
                        .iter()
                        .map(|l| {
                            let n = &self.vars[l.var];
                            if l.neg { format!("-{n}") } else { n.clone() }
                        })
                        .collect();
                    out.push_str(&format!("clause {}\n", toks.join(" ")));
                }
                Constraint::ExactlyOne { vars } => {
                    let names: Vec<String> = vars.iter().map(name).collect();
                    out.push_str(&format!("one {}\n", names.join(" ")));
                }
                Constraint::Table { vars, allowed } => {
                    let names: Vec<String> = vars.iter().map(name).collect();
                    let mut rows: Vec<String> = allowed
                        .iter()
                        .map(|row| {
                            row.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>()
                        })
                        .collect();
                    rows.sort();
                    out.push_str(&format!(
                        "table {} : {}\n",
                        names.join(" "),
                        rows.join(",")
                    ));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// derived nonlocal games

/// A two-player game: the referee draws a pair of questions from `support`,
/// one player answers from a finite set per question, and a win predicate is
/// given per question pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSpec {
    pub answers_a: Vec<usize>,
    pub answers_b: Vec<usize>,
    pub support: Vec<SupportEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportEntry {
    pub s: usize,
    pub t: usize,
    pub p: BigRational,
    pub win: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GameWire {
    answers_a: Vec<usize>,
    answers_b: Vec<usize>,
    support: Vec<SupportWire>,
}

#[derive(Serialize, Deserialize)]
struct SupportWire {
    s: usize,
    t: usize,
    p: String,
    win: Vec<(usize, usize)>,
}

impl GameSpec {
    pub fn new(
        answers_a: Vec<usize>,
        answers_b: Vec<usize>,
        support: Vec<SupportEntry>,
    ) -> Result<GameSpec, String> {
        let g = GameSpec { answers_a, answers_b, support };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.answers_a.is_empty() || self.answers_b.is_empty() {
            return Err("no questions".to_string());
        }
        if self.answers_a.iter().chain(&self.answers_b).any(|&k| k == 0) {
            return Err("every question needs at least one answer".to_string());
        }
        let mut seen = BTreeSet::new();
        let mut total = BigRational::zero();
        for e in &self.support {
            if e.s >= self.answers_a.len() || e.t >= self.answers_b.len() {
                return Err(format!("question pair ({}, {}) out of range", e.s, e.t));
            }
            if !seen.insert((e.s, e.t)) {
                return Err(format!("repeated question pair ({}, {})", e.s, e.t));
            }
            if e.p <= BigRational::zero() {
                return Err(format!("nonpositive probability on ({}, {})", e.s, e.t));
            }
            for &(a, bb) in &e.win {
                if a >= self.answers_a[e.s] || bb >= self.answers_b[e.t] {
                    return Err(format!(
                        "winning answer ({a}, {bb}) out of range on ({}, {})",
                        e.s, e.t
                    ));
                }
            }
            total += &e.p;
        }
        if !total.is_one() {
            return Err(format!("probabilities sum to {total}, not 1"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let wire = GameWire {
            answers_a: self.answers_a.clone(),
            answers_b: self.answers_b.clone(),
            support: self
                .support
                .iter()
                .map(|e| SupportWire {
                    s: e.s,
                    t: e.t,
                    p: e.p.to_string(),
                    win: e.win.iter().copied().collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<GameSpec, String> {
        let wire: GameWire = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let support = wire
            .support
            .into_iter()
            .map(|e| -> Result<SupportEntry, String> {
                Ok(SupportEntry {
                    s: e.s,
                    t: e.t,
                    p: e.p.parse().map_err(|_| format!("bad probability {:?}", e.p))?,
                    win: e.win.into_iter().collect(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        GameSpec::new(wire.answers_a, wire.answers_b, support)
    }
}

/// The constraint-versus-variable game of a system: one player receives a
/// constraint and answers a scope assignment (bit j of the answer is the
/// value of the j-th scope variable), the other receives a variable from that
/// scope and answers its value. They win when the assignment satisfies the
/// constraint and both agree on the shared variable. Question pairs are
/// uniform over (constraint, scope member) incidences.
pub fn derive_game(b: &Bcs) -> GameSpec {
    let n_inc: usize = b.constraints().iter().map(|c| c.scope().len()).sum();
    assert!(n_inc > 0, "system has no constraints");
    let p = BigRational::new(1.into(), (n_inc as i64).into());
    let answers_a: Vec<usize> =
        b.constraints().iter().map(|c| 1usize << c.scope().len()).collect();
    let answers_b = vec![2usize; b.num_vars()];
    let mut support = Vec::new();
    for (s, c) in b.constraints().iter().enumerate() {
        let scope = c.scope();
        for (j, &t) in scope.iter().enumerate() {
            let mut win = BTreeSet::new();
            for a in 0..1usize << scope.len() {
                let mut full = vec![false; b.num_vars()];
                for (k, &v) in scope.iter().enumerate() {
                    full[v] = (a >> k) & 1 == 1;
                }
                if b.constraint_satisfied(c, &full) {
                    win.insert((a, (a >> j) & 1));
                }
            }
            support.push(SupportEntry { s, t, p: p.clone(), win });
        }
    }
    GameSpec::new(answers_a, answers_b, support).expect("derived game is valid")
}
