//! Operator assignments for constraint systems and their verification.
//!
//! An assignment names one operator per variable, either symbolically as a
//! Pauli word or as an explicit dense matrix. Verification checks three
//! things: each constraint holds as an operator identity, each operator is a
//! binary observable for the domain, and operators sharing a constraint
//! commute. Symbolic parity checks are exact group arithmetic; everything
//! else falls back to dense evaluation.

use crate::bcs::{Bcs, Constraint, Domain, VarId};
use crate::linalg::{cre, identity, operator_norm, CMatrix, C64};
use crate::pauli::PauliWord;
use crate::rewrite::poly::NcPoly;
use num::{Complex, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest matrix dimension the dense fallback will build.
pub const MAX_VERIFY_DIM: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignError {
    #[error("no operator assigned to variable {0:?}")]
    MissingOperator(String),
    #[error("operator {name:?} acts on {got} qubits, expected {expected}")]
    QubitMismatch { name: String, expected: usize, got: usize },
    #[error("operator {name:?} is not a {expected}x{expected} matrix")]
    ShapeMismatch { name: String, expected: usize },
    #[error("dense evaluation of a {qubits}-qubit word exceeds dimension {MAX_VERIFY_DIM}")]
    DenseGuard { qubits: usize },
    #[error("the pair acts on different qubit counts")]
    PairSizeMismatch,
    #[error("the {0} operator is not a self-adjoint involution")]
    NotInvolutive(&'static str),
    #[error("the operators commute; an anticommuting pair is required")]
    NotAnticommuting,
    #[error("cannot decode assignment: {0}")]
    BadJson(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorAssignment {
    Pauli { n: usize, ops: BTreeMap<String, PauliWord> },
    Dense { dim: usize, ops: BTreeMap<String, CMatrix> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "rep")]
enum AssignWire {
    #[serde(rename = "pauli")]
    Pauli { n: usize, ops: BTreeMap<String, String> },
    #[serde(rename = "dense")]
    Dense { dim: usize, ops: BTreeMap<String, Vec<Vec<(f64, f64)>>> },
}

impl OperatorAssignment {
    pub fn dim(&self) -> usize {
        match self {
            OperatorAssignment::Pauli { n, .. } => 1usize << n,
            OperatorAssignment::Dense { dim, .. } => *dim,
        }
    }

    pub fn names(&self) -> Vec<&str> {
        match self {
            OperatorAssignment::Pauli { ops, .. } => ops.keys().map(|s| s.as_str()).collect(),
            OperatorAssignment::Dense { ops, .. } => ops.keys().map(|s| s.as_str()).collect(),
        }
    }

    /// Expands a symbolic assignment into explicit matrices.
    pub fn to_dense(&self) -> Result<OperatorAssignment, AssignError> {
        match self {
            OperatorAssignment::Dense { .. } => Ok(self.clone()),
            OperatorAssignment::Pauli { n, ops } => {
                let mut out = BTreeMap::new();
                for (name, w) in ops {
                    let m = w
                        .to_dense()
                        .map_err(|_| AssignError::DenseGuard { qubits: w.qubits() })?;
                    out.insert(name.clone(), m);
                }
                Ok(OperatorAssignment::Dense { dim: 1 << n, ops: out })
            }
        }
    }

    pub fn to_json(&self) -> String {
        let wire = match self {
            OperatorAssignment::Pauli { n, ops } => AssignWire::Pauli {
                n: *n,
                ops: ops.iter().map(|(k, w)| (k.clone(), w.to_string())).collect(),
            },
            OperatorAssignment::Dense { dim, ops } => AssignWire::Dense {
                dim: *dim,
                ops: ops.iter().map(|(k, m)| (k.clone(), matrix_to_rows(m))).collect(),
            },
        };
        serde_json::to_string_pretty(&wire).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<OperatorAssignment, AssignError> {
        let wire: AssignWire =
            serde_json::from_str(text).map_err(|e| AssignError::BadJson(e.to_string()))?;
        match wire {
            AssignWire::Pauli { n, ops } => {
                let mut out = BTreeMap::new();
                for (name, s) in ops {
                    let w: PauliWord = s
                        .parse()
                        .map_err(|e| AssignError::BadJson(format!("{name}: {e}")))?;
                    if w.qubits() != n {
                        return Err(AssignError::QubitMismatch {
                            name,
                            expected: n,
                            got: w.qubits(),
                        });
                    }
                    out.insert(name, w);
                }
                Ok(OperatorAssignment::Pauli { n, ops: out })
            }
            AssignWire::Dense { dim, ops } => {
                let mut out = BTreeMap::new();
                for (name, rows) in ops {
                    out.insert(name.clone(), rows_to_matrix(&name, dim, &rows)?);
                }
                Ok(OperatorAssignment::Dense { dim, ops: out })
            }
        }
    }
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<(f64, f64)>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
        .collect()
}

pub fn rows_to_matrix(
    name: &str,
    dim: usize,
    rows: &[Vec<(f64, f64)>],
) -> Result<CMatrix, AssignError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(AssignError::ShapeMismatch { name: name.to_string(), expected: dim });
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = rows[i][j];
        Complex::new(re, im)
    }))
}

fn coef_to_c64(c: &crate::rewrite::poly::Coef) -> C64 {
    Complex::new(
        c.re.to_f64().expect("coefficient fits in f64"),
        c.im.to_f64().expect("coefficient fits in f64"),
    )
}

fn eval_poly_dense(p: &NcPoly, dim: usize, op: &dyn Fn(u32) -> CMatrix) -> CMatrix {
    let mut acc = CMatrix::zeros(dim, dim);
    for (w, c) in p.iter() {
        let mut m = identity(dim);
        for &g in &w.0 {
            m *= op(g);
        }
        let cc = coef_to_c64(c);
        acc += m.map(|e| e * cc);
    }
    acc
}

// ---------------------------------------------------------------------------
// verification

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub tol: f64,
    pub pass: bool,
    /// Residual of each constraint identity, by constraint index.
    pub constraint_residuals: Vec<(usize, f64)>,
    /// Residual of the binary-observable condition, per variable.
    pub observable_residuals: Vec<(String, f64)>,
    /// Residual of each required commutation, per variable pair.
    pub commutation_residuals: Vec<(String, String, f64)>,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        let a = self.constraint_residuals.iter().map(|&(_, r)| r);
        let b = self.observable_residuals.iter().map(|&(_, r)| r);
        let c = self.commutation_residuals.iter().map(|&(_, _, r)| r);
        a.chain(b).chain(c).fold(0.0, f64::max)
    }

    pub fn passes_at(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

fn build_report(
    tol: f64,
    constraint_residuals: Vec<(usize, f64)>,
    observable_residuals: Vec<(String, f64)>,
    commutation_residuals: Vec<(String, String, f64)>,
) -> VerificationReport {
    let mut report = VerificationReport {
        tol,
        pass: false,
        constraint_residuals,
        observable_residuals,
        commutation_residuals,
    };
    report.pass = report.passes_at(tol);
    report
}

const PHASES: [C64; 4] = [
    Complex::new(1.0, 0.0),
    Complex::new(0.0, 1.0),
    Complex::new(-1.0, 0.0),
    Complex::new(0.0, -1.0),
];

fn verify_pauli(
    b: &Bcs,
    n: usize,
    ops: &BTreeMap<String, PauliWord>,
    tol: f64,
) -> Result<VerificationReport, AssignError> {
    let mut words: Vec<PauliWord> = Vec::with_capacity(b.num_vars());
    for name in b.var_names() {
        let w = ops
            .get(name)
            .ok_or_else(|| AssignError::MissingOperator(name.clone()))?;
        if w.qubits() != n {
            return Err(AssignError::QubitMismatch {
                name: name.clone(),
                expected: n,
                got: w.qubits(),
            });
        }
        words.push(*w);
    }

    let mut observable_residuals = Vec::new();
    for (v, name) in b.var_names().iter().enumerate() {
        let w = &words[v];
        let herm: f64 = if w.is_hermitian() { 0.0 } else { 2.0 };
        let resid = match b.domain() {
            // self-adjoint words square to the identity automatically
            Domain::BoolPM => herm,
            Domain::Bool01 => {
                let sq = w.mul(w).expect("same size");
                herm.max(w.distance_to_scalar(PHASES[sq.phase() as usize]))
            }
        };
        observable_residuals.push((name.clone(), resid));
    }

    let mut constraint_residuals = Vec::new();
    let mut dense_cache: Vec<Option<CMatrix>> = vec![None; b.num_vars()];
    for (i, c) in b.constraints().iter().enumerate() {
        let resid = match c {
            Constraint::Parity { vars, odd } => {
                let mut prod = PauliWord::identity(n);
                for &v in vars {
                    prod = prod.mul(&words[v]).expect("same size");
                }
                prod.distance_to_scalar(cre(if *odd { -1.0 } else { 1.0 }))
            }
            _ => {
                if n > 9 {
                    return Err(AssignError::DenseGuard { qubits: n });
                }
                let dim = 1usize << n;
                for v in c.scope() {
                    if dense_cache[v].is_none() {
                        dense_cache[v] = Some(words[v].to_dense().expect("within guard"));
                    }
                }
                let p = b.constraint_polynomial(c);
                let m = eval_poly_dense(&p, dim, &|g| {
                    dense_cache[g as usize].clone().expect("cached")
                });
                operator_norm(&m)
            }
        };
        constraint_residuals.push((i, resid));
    }

    let mut commutation_residuals = Vec::new();
    for (j, k) in b.commutation_pairs() {
        let sign = words[j].commutation_sign(&words[k]).expect("same size");
        commutation_residuals.push((
            b.var_name(j).to_string(),
            b.var_name(k).to_string(),
            if sign == 1 { 0.0 } else { 2.0 },
        ));
    }

    Ok(build_report(tol, constraint_residuals, observable_residuals, commutation_residuals))
}

fn verify_dense(
    b: &Bcs,
    dim: usize,
    ops: &BTreeMap<String, CMatrix>,
    tol: f64,
) -> Result<VerificationReport, AssignError> {
    let mut mats: Vec<&CMatrix> = Vec::with_capacity(b.num_vars());
    for name in b.var_names() {
        let m = ops
            .get(name)
            .ok_or_else(|| AssignError::MissingOperator(name.clone()))?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(AssignError::ShapeMismatch { name: name.clone(), expected: dim });
        }
        mats.push(m);
    }
    let eye = identity(dim);

    let mut observable_residuals = Vec::new();
    for (v, name) in b.var_names().iter().enumerate() {
        let m = mats[v];
        let herm = operator_norm(&(m - &m.adjoint()));
        let sq = m * m;
        let invol = match b.domain() {
            Domain::BoolPM => operator_norm(&(&sq - &eye)),
            Domain::Bool01 => operator_norm(&(&sq - m)),
        };
        observable_residuals.push((name.clone(), herm.max(invol)));
    }

    let mut constraint_residuals = Vec::new();
    for (i, c) in b.constraints().iter().enumerate() {
        let p = b.constraint_polynomial(c);
        let m = eval_poly_dense(&p, dim, &|g| mats[g as usize].clone());
        constraint_residuals.push((i, operator_norm(&m)));
    }

    let mut commutation_residuals = Vec::new();
    for (j, k) in b.commutation_pairs() {
        let comm = mats[j] * mats[k] - mats[k] * mats[j];
        commutation_residuals.push((
            b.var_name(j).to_string(),
            b.var_name(k).to_string(),
            operator_norm(&comm),
        ));
    }

    Ok(build_report(tol, constraint_residuals, observable_residuals, commutation_residuals))
}

/// Checks an assignment against a system: constraint identities, the binary
/// observable conditions, and all required commutations, each reported as an
/// operator norm residual.
pub fn verify_assignment(
    b: &Bcs,
    a: &OperatorAssignment,
    tol: f64,
) -> Result<VerificationReport, AssignError> {
    match a {
        OperatorAssignment::Pauli { n, ops } => verify_pauli(b, *n, ops, tol),
        OperatorAssignment::Dense { dim, ops } => verify_dense(b, *dim, ops, tol),
    }
}

// ---------------------------------------------------------------------------
// constructions

/// The standard two-qubit operator solution of the parity grid returned by
/// [`crate::bcs::magic_square`].
pub fn mermin_peres_assignment() -> OperatorAssignment {
    let words = ["XI", "IZ", "XZ", "IX", "ZI", "ZX", "XX", "ZZ", "-YY"];
    let ops = words
        .iter()
        .enumerate()
        .map(|(k, s)| (format!("x{}", k + 1), s.parse().expect("literal")))
        .collect();
    OperatorAssignment::Pauli { n: 2, ops }
}

/// Given anticommuting self-adjoint involutions A and B on n qubits, builds
/// the 3x3 grid of observables on n+1 qubits
///
/// ```text
///     X(x)I   I(x)A   X(x)A
///     I(x)B   Z(x)I   Z(x)B
///     X(x)B   Z(x)A   Y(x)iAB
/// ```
///
/// returned row-major. Rows and the first two columns multiply to +1, the
/// last column to -1, and entries sharing a row or column commute, so the
/// grid solves the magic square pattern with A and B at cells 2 and 4.
pub fn extend_anticommuting_pair(
    a: &PauliWord,
    b: &PauliWord,
) -> Result<[PauliWord; 9], AssignError> {
    if a.qubits() != b.qubits() {
        return Err(AssignError::PairSizeMismatch);
    }
    if !a.is_hermitian() {
        return Err(AssignError::NotInvolutive("first"));
    }
    if !b.is_hermitian() {
        return Err(AssignError::NotInvolutive("second"));
    }
    if a.commutation_sign(b).expect("same size") != -1 {
        return Err(AssignError::NotAnticommuting);
    }
    let n = a.qubits();
    let idn = PauliWord::identity(n);
    let (one, x, y, z) = (
        PauliWord::identity(1),
        PauliWord::x_op(1, 0),
        PauliWord::y_op(1, 0),
        PauliWord::z_op(1, 0),
    );
    let c = a.mul(b).expect("same size").scale_phase(1);
    let t = |p: &PauliWord, q: &PauliWord| p.tensor(q).expect("one extra qubit");
    Ok([
        t(&x, &idn),
        t(&one, a),
        t(&x, a),
        t(&one, b),
        t(&z, &idn),
        t(&z, b),
        t(&x, b),
        t(&z, a),
        t(&y, &c),
    ])
}

/// A family of `count` pairwise anticommuting self-adjoint involutions on
/// `count/2` qubits: the alternating X and Y words on a Z chain, plus, for
/// odd counts, the scaled product of all the others.
pub fn clifford_generators(count: usize) -> Vec<PauliWord> {
    assert!((2..=24).contains(&count), "generator count must be in 2..=24, got {count}");
    let m = count / 2;
    let mut gens = Vec::with_capacity(count);
    for k in 0..m {
        let mut chain = PauliWord::identity(m);
        for q in 0..k {
            chain = chain.mul(&PauliWord::z_op(m, q)).expect("same size");
        }
        gens.push(chain.mul(&PauliWord::x_op(m, k)).expect("same size"));
        gens.push(chain.mul(&PauliWord::y_op(m, k)).expect("same size"));
    }
    if count % 2 == 1 {
        let mut prod = PauliWord::identity(m);
        for g in &gens {
            prod = prod.mul(g).expect("same size");
        }
        gens.push(prod.scale_phase((m % 4) as u8));
    }
    gens
}

/// The parity system of the complete graph on `n` vertex variables: every
/// edge carries seven auxiliary variables arranged with its two endpoints in
/// a 3x3 parity grid (rows and the first two columns even, the last column
/// odd). No constraint mentions two vertex variables together, so vertex
/// operators may pairwise anticommute; the returned assignment realizes them
/// as the anticommuting generator family on one extra qubit.
pub fn clifford_bcs(n: usize) -> (Bcs, OperatorAssignment) {
    assert!((2..=12).contains(&n), "vertex count must be in 2..=12, got {n}");
    let gens = clifford_generators(n);
    let m = n / 2;
    let mut b = Bcs::new(Domain::BoolPM);
    let mut ops: BTreeMap<String, PauliWord> = BTreeMap::new();
    let one_q = PauliWord::identity(1);
    let mut vertex_ids: Vec<VarId> = Vec::new();
    for j in 1..=n {
        let name = format!("x{j}");
        vertex_ids.push(b.add_var(&name).expect("fresh"));
        ops.insert(name, one_q.tensor(&gens[j - 1]).expect("fits"));
    }
    for j in 1..=n {
        for k in j + 1..=n {
            let ext = extend_anticommuting_pair(&gens[j - 1], &gens[k - 1])
                .expect("distinct generators anticommute");
            // grid cells 2 and 4 are the vertex operators themselves
            let aux_cells = [0usize, 2, 4, 5, 6, 7, 8];
            let mut aux_ids = Vec::with_capacity(7);
            for (i, &cell) in aux_cells.iter().enumerate() {
                let name = format!("y{j}_{k}_{}", i + 1);
                aux_ids.push(b.add_var(&name).expect("fresh"));
                ops.insert(name, ext[cell]);
            }
            let grid = [
                aux_ids[0],
                vertex_ids[j - 1],
                aux_ids[1],
                vertex_ids[k - 1],
                aux_ids[2],
                aux_ids[3],
                aux_ids[4],
                aux_ids[5],
                aux_ids[6],
            ];
            let lines: [([usize; 3], bool); 6] = [
                ([0, 1, 2], false),
                ([3, 4, 5], false),
                ([6, 7, 8], false),
                ([0, 3, 6], false),
                ([1, 4, 7], false),
                ([2, 5, 8], true),
            ];
            for (cells, odd) in lines {
                let vars = cells.iter().map(|&i| grid[i]).collect();
                b.add_constraint(Constraint::Parity { vars, odd }).expect("valid");
            }
        }
    }
    (b, OperatorAssignment::Pauli { n: m + 1, ops })
}
