//! Shared-entanglement strategies and their winning probability.
//!
//! A strategy holds one projective measurement per question for each player
//! and a bipartite state in matrix form: the state vector is `vec(M)`, so the
//! correlation of operators A and B is `tr(A * M * B^T * M^adj)`. Building a
//! strategy from a verified operator assignment of a system yields a perfect
//! strategy for that system's derived game.

use crate::assign::{
    matrix_to_rows, rows_to_matrix, verify_assignment, AssignError, OperatorAssignment,
};
use crate::bcs::{Bcs, Domain, GameSpec, SupportEntry};
use crate::linalg::{cre, identity, CMatrix};
use num::{BigRational, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("assignment fails verification at tolerance {tol}: max residual {max}")]
    DoesNotVerify { tol: f64, max: f64 },
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error("cannot decode strategy: {0}")]
    BadJson(String),
}

/// Measurements for both players plus the shared state. `alice[s]` lists
/// `(answer, operator)` pairs; answers with a zero operator may be omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub dim: usize,
    pub state: CMatrix,
    pub alice: BTreeMap<usize, Vec<(usize, CMatrix)>>,
    pub bob: BTreeMap<usize, Vec<(usize, CMatrix)>>,
}

#[derive(Serialize, Deserialize)]
struct StrategyWire {
    dim: usize,
    state: Vec<Vec<(f64, f64)>>,
    alice: BTreeMap<usize, Vec<(usize, Vec<Vec<(f64, f64)>>)>>,
    bob: BTreeMap<usize, Vec<(usize, Vec<Vec<(f64, f64)>>)>>,
}

/// The state matrix of the maximally entangled state, `I / sqrt(dim)`.
pub fn maximally_entangled(dim: usize) -> CMatrix {
    identity(dim) * cre(1.0 / (dim as f64).sqrt())
}

impl Strategy {
    pub fn to_json(&self) -> String {
        let pack = |side: &BTreeMap<usize, Vec<(usize, CMatrix)>>| {
            side.iter()
                .map(|(&q, ms)| {
                    (q, ms.iter().map(|(a, m)| (*a, matrix_to_rows(m))).collect())
                })
                .collect()
        };
        let wire = StrategyWire {
            dim: self.dim,
            state: matrix_to_rows(&self.state),
            alice: pack(&self.alice),
            bob: pack(&self.bob),
        };
        serde_json::to_string_pretty(&wire).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Strategy, GameError> {
        let wire: StrategyWire =
            serde_json::from_str(text).map_err(|e| GameError::BadJson(e.to_string()))?;
        let dim = wire.dim;
        let unpack = |side: BTreeMap<usize, Vec<(usize, Vec<Vec<(f64, f64)>>)>>,
                      who: &str|
         -> Result<BTreeMap<usize, Vec<(usize, CMatrix)>>, GameError> {
            side.into_iter()
                .map(|(q, ms)| {
                    let ms = ms
                        .into_iter()
                        .map(|(a, rows)| {
                            Ok((a, rows_to_matrix(&format!("{who}[{q}][{a}]"), dim, &rows)?))
                        })
                        .collect::<Result<Vec<_>, GameError>>()?;
                    Ok((q, ms))
                })
                .collect()
        };
        Ok(Strategy {
            dim,
            state: rows_to_matrix("state", dim, &wire.state)?,
            alice: unpack(wire.alice, "alice")?,
            bob: unpack(wire.bob, "bob")?,
        })
    }
}

/// Winning probability of a strategy: the sum over the question distribution
/// of the probability that the answers land in the win set.
pub fn game_value(g: &GameSpec, strat: &Strategy) -> f64 {
    let m = &strat.state;
    let madj = m.adjoint();
    let empty: Vec<(usize, CMatrix)> = Vec::new();
    let mut value = 0.0;
    for e in &g.support {
        let p = e.p.to_f64().expect("probability fits in f64");
        let alice = strat.alice.get(&e.s).unwrap_or(&empty);
        let bob = strat.bob.get(&e.t).unwrap_or(&empty);
        for &(a, b) in &e.win {
            let Some((_, am)) = alice.iter().find(|&&(k, _)| k == a) else {
                continue;
            };
            let Some((_, bm)) = bob.iter().find(|&&(k, _)| k == b) else {
                continue;
            };
            value += p * (am * m * bm.transpose() * &madj).trace().re;
        }
    }
    value
}

/// Turns a verified operator assignment into a strategy for the derived
/// game: one player measures the joint eigenspaces of the (commuting) scope
/// observables of a constraint, the other measures a single variable, and
/// they share the maximally entangled state. Fails if the assignment does
/// not verify at `tol`.
pub fn strategy_from_assignment(
    b: &Bcs,
    a: &OperatorAssignment,
    tol: f64,
) -> Result<Strategy, GameError> {
    let report = verify_assignment(b, a, tol)?;
    if !report.pass {
        return Err(GameError::DoesNotVerify { tol, max: report.max_residual() });
    }
    let OperatorAssignment::Dense { dim, ops } = a.to_dense()? else {
        unreachable!("to_dense returns the dense representation")
    };
    let mats: Vec<&CMatrix> =
        b.var_names().iter().map(|n| &ops[n]).collect();
    let eye = identity(dim);
    let proj = |v: usize, bit: usize| -> CMatrix {
        let w = mats[v];
        match b.domain() {
            Domain::Bool01 => {
                if bit == 1 {
                    w.clone()
                } else {
                    &eye - w
                }
            }
            // value bit 1 corresponds to eigenvalue -1
            Domain::BoolPM => {
                (if bit == 0 { &eye + w } else { &eye - w }) * cre(0.5)
            }
        }
    };

    let mut alice = BTreeMap::new();
    for (s, c) in b.constraints().iter().enumerate() {
        let scope = c.scope();
        let mut list = Vec::new();
        for a in 0..1usize << scope.len() {
            let mut joint = eye.clone();
            for (j, &v) in scope.iter().enumerate() {
                joint *= proj(v, (a >> j) & 1);
            }
            if joint.norm() > 1e-9 {
                list.push((a, joint));
            }
        }
        alice.insert(s, list);
    }

    let mut bob = BTreeMap::new();
    let touched: BTreeSet<usize> =
        b.constraints().iter().flat_map(|c| c.scope()).collect();
    for t in touched {
        bob.insert(t, (0..2).map(|bit| (bit, proj(t, bit).conjugate())).collect());
    }

    Ok(Strategy { dim, state: maximally_entangled(dim), alice, bob })
}

/// The standard two-question parity game: uniform question pairs
/// `(s, t)` in `{0,1}^2`, one-bit answers, win when `a xor b == s and t`.
pub fn chsh_game() -> GameSpec {
    let p = BigRational::new(1.into(), 4.into());
    let mut support = Vec::new();
    for s in 0..2 {
        for t in 0..2 {
            let win = (0..2)
                .flat_map(|a| (0..2usize).map(move |b| (a, b)))
                .filter(|&(a, b)| a ^ b == s & t)
                .collect();
            support.push(SupportEntry { s, t, p: p.clone(), win });
        }
    }
    GameSpec::new(vec![2, 2], vec![2, 2], support).expect("valid game")
}

/// The rotated-measurement strategy reaching the optimal value
/// `cos^2(pi/8)` of [`chsh_game`].
pub fn chsh_optimal_strategy() -> Strategy {
    let z = CMatrix::from_row_slice(2, 2, &[cre(1.0), cre(0.0), cre(0.0), cre(-1.0)]);
    let x = CMatrix::from_row_slice(2, 2, &[cre(0.0), cre(1.0), cre(1.0), cre(0.0)]);
    let r = cre(1.0 / 2f64.sqrt());
    let obs_a = [z.clone(), x.clone()];
    let obs_b = [(&z + &x) * r, (&z - &x) * r];
    let eye = identity(2);
    let split = |o: &CMatrix| -> Vec<(usize, CMatrix)> {
        vec![(0, (&eye + o) * cre(0.5)), (1, (&eye - o) * cre(0.5))]
    };
    Strategy {
        dim: 2,
        state: maximally_entangled(2),
        alice: obs_a.iter().enumerate().map(|(s, o)| (s, split(o))).collect(),
        bob: obs_b.iter().enumerate().map(|(t, o)| (t, split(o))).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assign::mermin_peres_assignment;
    use crate::bcs::{derive_game, magic_square, Constraint};
    use crate::solve::classical_game_value;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CHSH_OPTIMUM: f64 = 0.8535533905932737; // cos^2(pi/8)

    #[test]
    fn chsh_classical_value_is_three_quarters() {
        let g = chsh_game();
        assert_eq!(
            classical_game_value(&g),
            BigRational::new(3.into(), 4.into())
        );
    }

    #[test]
    fn chsh_entangled_strategy_beats_classical() {
        let g = chsh_game();
        let v = game_value(&g, &chsh_optimal_strategy());
        assert!((v - CHSH_OPTIMUM).abs() < 1e-12, "value {v}");
        assert!(v > 0.75);
    }

    #[test]
    fn verified_assignment_plays_perfectly() {
        let b = magic_square();
        let g = derive_game(&b);
        let strat = strategy_from_assignment(&b, &mermin_peres_assignment(), 1e-9).unwrap();
        let v = game_value(&g, &strat);
        assert!((v - 1.0).abs() < 1e-9, "value {v}");
        // classically the same game caps at 17/18
        assert_eq!(
            classical_game_value(&g),
            BigRational::new(17.into(), 18.into())
        );
    }

    #[test]
    fn unverified_assignments_are_refused() {
        let b = magic_square();
        let OperatorAssignment::Pauli { n, mut ops } = mermin_peres_assignment() else {
            unreachable!()
        };
        ops.insert("x9".to_string(), "YY".parse().unwrap());
        let err =
            strategy_from_assignment(&b, &OperatorAssignment::Pauli { n, ops }, 1e-9)
                .unwrap_err();
        assert!(matches!(err, GameError::DoesNotVerify { .. }));
    }

    #[test]
    fn classical_solutions_become_scalar_strategies() {
        let mut b = Bcs::new(Domain::BoolPM);
        b.add_var("x").unwrap();
        b.add_var("y").unwrap();
        b.add_constraint(Constraint::Parity { vars: vec![0, 1], odd: true }).unwrap();
        let mut ops = BTreeMap::new();
        ops.insert("x".to_string(), CMatrix::from_row_slice(1, 1, &[cre(1.0)]));
        ops.insert("y".to_string(), CMatrix::from_row_slice(1, 1, &[cre(-1.0)]));
        let a = OperatorAssignment::Dense { dim: 1, ops };
        let strat = strategy_from_assignment(&b, &a, 1e-12).unwrap();
        let v = game_value(&derive_game(&b), &strat);
        assert!((v - 1.0).abs() < 1e-12);
    }

    fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let m = CMatrix::from_fn(dim, dim, |_, _| {
            Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        m.qr().q()
    }

    #[test]
    fn value_is_invariant_under_local_rotations() {
        let g = chsh_game();
        let base = chsh_optimal_strategy();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..5 {
            let u = random_unitary(2, &mut rng);
            let v = random_unitary(2, &mut rng);
            let rotate = |side: &BTreeMap<usize, Vec<(usize, CMatrix)>>, w: &CMatrix| {
                side.iter()
                    .map(|(&q, ms)| {
                        (
                            q,
                            ms.iter()
                                .map(|(a, m)| (*a, w * m * w.adjoint()))
                                .collect(),
                        )
                    })
                    .collect()
            };
            let rotated = Strategy {
                dim: 2,
                state: &u * &base.state * v.transpose(),
                alice: rotate(&base.alice, &u),
                bob: rotate(&base.bob, &v),
            };
            let val = game_value(&g, &rotated);
            assert!((val - CHSH_OPTIMUM).abs() < 1e-12, "rotated value {val}");
        }
    }

    #[test]
    fn strategy_json_round_trips() {
        let strat = chsh_optimal_strategy();
        let back = Strategy::from_json(&strat.to_json()).unwrap();
        assert_eq!(back, strat);
        assert!(Strategy::from_json("{\"dim\":2}").is_err());
        // wrong shape is caught
        let mut wire: serde_json::Value = serde_json::from_str(&strat.to_json()).unwrap();
        wire["state"] = serde_json::json!([[[1.0, 0.0]]]);
        assert!(Strategy::from_json(&wire.to_string()).is_err());
    }
}
