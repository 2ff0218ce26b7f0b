//! Machine-checkable commutativity certificates for gadget constructions.
//!
//! A gadget attaches auxiliary variables and constraints to force two target
//! variables to commute (or anticommute) in every operator solution. The
//! certificate produced here derives each commutator as a two-sided
//! combination of the system's defining relations, rendered as text so it
//! can be stored, exchanged, and re-verified without trusting the completion
//! machinery that found it. Deep derivations are split into a chain of
//! lemmas, each a short combination of the relations and earlier lemmas;
//! verification replays the chain in order, so the whole certificate is
//! still checked by nothing but exact arithmetic.

use super::engine::{complete, LemmaResult, Trace};
use super::poly::{parse_poly, parse_word, render_coef, render_word, Coef, NcPoly, Word};
use crate::bcs::{Bcs, VarId};
use crate::solve::solve_backtracking;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Most free variables the extendibility search will enumerate over.
pub const MAX_FREE_VARS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("unknown variable or indicator group {0:?}")]
    UnknownName(String),
    #[error("no certificate for ({0}, {1}) at degree cap {2}; raise the cap")]
    Inconclusive(String, String, usize),
    #[error("the combination for ({0}, {1}) does not replay to its target")]
    ReplayMismatch(String, String),
    #[error("boundary pins {free} free variables beyond the limit {MAX_FREE_VARS}")]
    TooManyFree { free: usize },
    #[error("cannot decode certificate: {0}")]
    BadJson(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetKind {
    Commute,
    Anticommute,
}

/// One summand `coef * left * fact * right`, where `fact` is the relation at
/// index `relation` when that is below the relation count, and otherwise
/// lemma number `relation - relations.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertStep {
    pub coef: String,
    pub left: String,
    pub relation: usize,
    pub right: String,
}

/// An intermediate fact shared by the target derivations: `poly` lies in the
/// two-sided ideal of the relations, witnessed by `steps` over the relations
/// and the lemmas listed before this one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertLemma {
    pub poly: String,
    pub steps: Vec<CertStep>,
}

/// A derivation of one commutator (or anticommutator) from the relations and
/// lemmas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertTarget {
    pub pair: (String, String),
    pub op: String,
    pub lhs: String,
    pub steps: Vec<CertStep>,
}

/// A self-contained certificate: the generators, the defining relations of
/// the system, a chain of shared lemmas, and one replayable derivation per
/// target pair. Indicator groups contribute one target per member pair.
/// Without the lemma chain the targets would need their derivations written
/// out over the relations alone, which blows up exponentially for deep
/// gadget constructions; with it, each derived fact is written down once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: GadgetKind,
    pub pair: (String, String),
    pub degree_cap: usize,
    pub generators: Vec<String>,
    pub relations: Vec<String>,
    #[serde(default)]
    pub lemmas: Vec<CertLemma>,
    pub targets: Vec<CertTarget>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Certificate, GadgetError> {
        serde_json::from_str(text).map_err(|e| GadgetError::BadJson(e.to_string()))
    }

    /// True when the certificate's generators and relations are exactly those
    /// of `b`, so a successful replay speaks about `b` itself.
    pub fn matches(&self, b: &Bcs) -> bool {
        self.generators == b.var_names()
            && self.relations
                == b.to_polynomial_relations()
                    .iter()
                    .map(|p| b.render_poly(p))
                    .collect::<Vec<_>>()
    }
}

/// Resolves a name to variable ids: either an exact variable or an indicator
/// group `name_0, name_1, ...` numbered consecutively from zero.
fn resolve_group(b: &Bcs, name: &str) -> Result<Vec<VarId>, GadgetError> {
    if let Some(id) = b.var(name) {
        return Ok(vec![id]);
    }
    let mut ids = Vec::new();
    loop {
        match b.var(&format!("{name}_{}", ids.len())) {
            Some(id) => ids.push(id),
            None => break,
        }
    }
    if ids.is_empty() {
        return Err(GadgetError::UnknownName(name.to_string()));
    }
    Ok(ids)
}

fn pair_target(kind: GadgetKind, a: VarId, b: VarId) -> NcPoly {
    let ab = NcPoly::from_word(Word::from_slice(&[a as u32, b as u32]));
    let ba = NcPoly::from_word(Word::from_slice(&[b as u32, a as u32]));
    match kind {
        GadgetKind::Commute => &ab - &ba,
        GadgetKind::Anticommute => &ab + &ba,
    }
}

/// Certifies that `u` and `v` commute (or anticommute) in every operator
/// solution of `b`, by deriving each commutator from the defining relations
/// under a degree-capped completion. Either name may denote an indicator
/// group, in which case all member pairs are certified. Every derivation is
/// replayed against the input relations before the certificate is returned.
pub fn certify_gadget(
    b: &Bcs,
    u: &str,
    v: &str,
    kind: GadgetKind,
    degree_cap: usize,
) -> Result<Certificate, GadgetError> {
    let us = resolve_group(b, u)?;
    let vs = resolve_group(b, v)?;
    let relations = b.to_polynomial_relations();
    let sys = complete(&relations, degree_cap);
    let name_of = |g: u32| b.var_name(g as usize).to_string();
    let op = match kind {
        GadgetKind::Commute => "commutator",
        GadgetKind::Anticommute => "anticommutator",
    };
    let mut named = Vec::new();
    let mut goals = Vec::new();
    for &a in &us {
        for &c in &vs {
            named.push((name_of(a as u32), name_of(c as u32)));
            goals.push(pair_target(kind, a, c));
        }
    }
    let proof = match sys.prove_with_lemmas(&goals) {
        LemmaResult::Proved(p) => p,
        LemmaResult::Inconclusive { target, degree_cap } => {
            let (a, c) = named[target].clone();
            return Err(GadgetError::Inconclusive(a, c, degree_cap));
        }
    };
    if !sys.verify_lemmas(&goals, &proof) {
        let (a, c) = named[0].clone();
        return Err(GadgetError::ReplayMismatch(a, c));
    }
    let render_steps = |steps: &Trace| -> Vec<CertStep> {
        steps
            .iter()
            .map(|s| CertStep {
                coef: render_coef(&s.coef),
                left: render_word(&s.left, &name_of),
                relation: s.rel,
                right: render_word(&s.right, &name_of),
            })
            .collect()
    };
    let lemmas = proof
        .lemmas
        .iter()
        .map(|(p, steps)| CertLemma {
            poly: b.render_poly(p),
            steps: render_steps(steps),
        })
        .collect();
    let targets = named
        .into_iter()
        .zip(&goals)
        .zip(&proof.combinations)
        .map(|((pair, goal), comb)| CertTarget {
            pair,
            op: op.to_string(),
            lhs: b.render_poly(goal),
            steps: render_steps(comb),
        })
        .collect();
    Ok(Certificate {
        kind,
        pair: (u.to_string(), v.to_string()),
        degree_cap,
        generators: b.var_names().to_vec(),
        relations: relations.iter().map(|p| b.render_poly(p)).collect(),
        lemmas,
        targets,
    })
}

fn parse_scalar(s: &str) -> Result<Coef, GadgetError> {
    let p = parse_poly(s, &|_| None)
        .map_err(|e| GadgetError::Invalid(format!("bad coefficient {s:?}: {e}")))?;
    if p.num_terms() != 1 {
        return Err(GadgetError::Invalid(format!("coefficient {s:?} is not a scalar")));
    }
    p.coef(&Word::empty())
        .cloned()
        .ok_or_else(|| GadgetError::Invalid(format!("coefficient {s:?} is not a scalar")))
}

/// Re-verifies a certificate from its rendered text alone: every lemma must
/// equal the sum of its steps over the relations and the lemmas before it,
/// and every target must equal both the declared commutator of its pair and
/// the sum of its own steps. Nothing from the completion machinery is
/// trusted or even used.
pub fn verify_certificate(cert: &Certificate) -> Result<(), GadgetError> {
    let lookup = |s: &str| {
        cert.generators
            .iter()
            .position(|n| n == s)
            .map(|i| i as u32)
    };
    let mut facts: Vec<NcPoly> = cert
        .relations
        .iter()
        .map(|r| parse_poly(r, &lookup).map_err(GadgetError::Invalid))
        .collect::<Result<_, _>>()?;
    let replay = |facts: &[NcPoly], steps: &[CertStep]| -> Result<NcPoly, GadgetError> {
        let mut acc = NcPoly::zero();
        for s in steps {
            let coef = parse_scalar(&s.coef)?;
            let left = parse_word(&s.left, &lookup).map_err(GadgetError::Invalid)?;
            let right = parse_word(&s.right, &lookup).map_err(GadgetError::Invalid)?;
            let fact = facts.get(s.relation).ok_or_else(|| {
                GadgetError::Invalid(format!("step index {} out of range", s.relation))
            })?;
            acc = &acc + &fact.mul_words(&left, &right).scale(&coef);
        }
        Ok(acc)
    };
    for (j, lem) in cert.lemmas.iter().enumerate() {
        let poly = parse_poly(&lem.poly, &lookup).map_err(GadgetError::Invalid)?;
        if replay(&facts, &lem.steps)? != poly {
            return Err(GadgetError::Invalid(format!(
                "lemma {j} does not replay to its stated polynomial"
            )));
        }
        facts.push(poly);
    }
    for t in &cert.targets {
        let a = lookup(&t.pair.0).ok_or_else(|| GadgetError::UnknownName(t.pair.0.clone()))?;
        let c = lookup(&t.pair.1).ok_or_else(|| GadgetError::UnknownName(t.pair.1.clone()))?;
        let declared = pair_target(cert.kind, a as usize, c as usize);
        let target = parse_poly(&t.lhs, &lookup).map_err(GadgetError::Invalid)?;
        if target != declared {
            return Err(GadgetError::Invalid(format!(
                "target for ({}, {}) is not its declared combination",
                t.pair.0, t.pair.1
            )));
        }
        if replay(&facts, &t.steps)? != target {
            return Err(GadgetError::ReplayMismatch(t.pair.0.clone(), t.pair.1.clone()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// extendibility

/// One element of a gadget boundary: a plain variable (two classical values)
/// or a one-hot indicator group (one value per member).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Boundary {
    Var(String),
    Group(Vec<String>),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtendCase {
    pub pins: Vec<(String, bool)>,
    pub extends: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtendibilityReport {
    pub cases: Vec<ExtendCase>,
    pub all_extend: bool,
}

/// Enumerates every classical boundary assignment (each variable over both
/// values, each group over its one-hot assignments) and checks that each one
/// extends to a full satisfying assignment of `b`. A gadget is transparent to
/// classical solutions exactly when every case extends.
pub fn check_extendibility(
    b: &Bcs,
    boundary: &[Boundary],
) -> Result<ExtendibilityReport, GadgetError> {
    let mut items: Vec<Vec<VarId>> = Vec::new();
    for part in boundary {
        match part {
            Boundary::Var(name) => {
                let id = b
                    .var(name)
                    .ok_or_else(|| GadgetError::UnknownName(name.clone()))?;
                items.push(vec![id]);
            }
            Boundary::Group(names) => {
                if names.is_empty() {
                    return Err(GadgetError::Invalid("empty boundary group".to_string()));
                }
                let mut ids = Vec::new();
                for name in names {
                    let id = b
                        .var(name)
                        .ok_or_else(|| GadgetError::UnknownName(name.clone()))?;
                    ids.push(id);
                }
                items.push(ids);
            }
        }
    }
    let mut seen: BTreeMap<VarId, ()> = BTreeMap::new();
    for ids in &items {
        for &id in ids {
            if seen.insert(id, ()).is_some() {
                return Err(GadgetError::Invalid(format!(
                    "variable {:?} appears twice in the boundary",
                    b.var_name(id)
                )));
            }
        }
    }
    let pinned: usize = items.iter().map(|ids| ids.len()).sum();
    let free = b.num_vars() - pinned;
    if free > MAX_FREE_VARS {
        return Err(GadgetError::TooManyFree { free });
    }

    // choice c for a single variable is the value c == 1; for a group it is
    // which member is hot
    let radix: Vec<usize> = boundary
        .iter()
        .zip(&items)
        .map(|(part, ids)| match part {
            Boundary::Var(_) => 2,
            Boundary::Group(_) => ids.len(),
        })
        .collect();
    let total: usize = radix.iter().product();
    let mut cases = Vec::with_capacity(total);
    for case in 0..total {
        let mut rest = case;
        let mut choice = Vec::with_capacity(radix.len());
        for &r in radix.iter().rev() {
            choice.push(rest % r);
            rest /= r;
        }
        choice.reverse();
        let mut pins: BTreeMap<VarId, bool> = BTreeMap::new();
        let mut shown: Vec<(String, bool)> = Vec::new();
        for ((part, ids), &c) in boundary.iter().zip(&items).zip(&choice) {
            match part {
                Boundary::Var(_) => {
                    pins.insert(ids[0], c == 1);
                    shown.push((b.var_name(ids[0]).to_string(), c == 1));
                }
                Boundary::Group(_) => {
                    for (k, &id) in ids.iter().enumerate() {
                        pins.insert(id, k == c);
                        shown.push((b.var_name(id).to_string(), k == c));
                    }
                }
            }
        }
        let extends = solve_backtracking(b, &pins).is_some();
        cases.push(ExtendCase { pins: shown, extends });
    }
    let all_extend = cases.iter().all(|c| c.extends);
    Ok(ExtendibilityReport { cases, all_extend })
}
