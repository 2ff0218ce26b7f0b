//! Noncommutative polynomial rewriting with machine-checkable derivations.
//!
//! The pipeline runs in three layers: exact polynomials over the free algebra
//! ([`poly`]), degree-capped two-sided completion whose rules carry replayable
//! traces ([`engine`]), and gadget certification built on top ([`certify`]).

pub mod certify;
pub mod engine;
pub mod poly;

pub use certify::{
    certify_gadget, check_extendibility, verify_certificate, Boundary, CertLemma, CertStep,
    CertTarget, Certificate, GadgetError, GadgetKind,
};
pub use engine::{
    complete, prove_membership, LemmaProof, LemmaResult, MembershipResult, ProofTrace,
    RewriteSystem, Trace, TraceStep,
};
pub use poly::{Coef, NcPoly, Word};

/// Degree bound used when none is given explicitly. Overridable through the
/// `BCSLAB_DEGREE_CAP` environment variable.
pub fn default_degree_cap() -> usize {
    std::env::var("BCSLAB_DEGREE_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(8)
}
