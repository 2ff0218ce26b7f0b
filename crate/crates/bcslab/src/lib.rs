//! Binary constraint system (BCS) games.
//!
//! A BCS is a finite set of boolean variables together with constraints that
//! each bind a small subset of them (parity equations, clauses, exactly-one
//! groups, or explicit truth tables). Every BCS induces a two player
//! nonlocal game: the referee samples a constraint and one variable in its
//! scope, Alice answers an assignment to the whole scope, Bob answers a bit
//! for the single variable, and they win when Alice's assignment satisfies
//! the constraint and agrees with Bob.
//!
//! The crate models such systems and the quantum side of their games:
//!
//! * [`bcs`]: the core data model, a line oriented text format, the magic
//!   square system, and the derived nonlocal game.
//! * [`pauli`]: phase tracked Pauli words, the operator alphabet used by all
//!   symbolic assignments.
//! * [`assign`]: operator assignments (symbolic or dense), verification of
//!   the three operator conditions, the Mermin-Peres square, and Clifford
//!   algebra based assignments for a family of systems built on complete
//!   graphs.
//! * [`rewrite`]: exact noncommutative polynomial arithmetic over Gaussian
//!   rationals, degree capped completion of rewriting systems, and replayable
//!   membership certificates for commutativity gadgets.
//! * [`reduce`]: reductions between satisfiability flavours (k-SAT to 3-SAT,
//!   3-SAT to graph 3-coloring, 3-SAT to 1-in-3-SAT, occurrence limiting,
//!   density hardening) that attach commutativity gadgets so that operator
//!   solutions transfer, plus encodings of coloring, Kochen-Specker style
//!   set systems, and games as BCS instances.
//! * [`solve`]: classical decision procedures (2-SAT via implication graph
//!   components, Horn-SAT via pebbling, parity systems via GF(2)
//!   elimination, brute force search) and exact classical game values.
//! * [`game`]: strategies as projector families on a shared entangled state
//!   and numerical evaluation of game values.
//!
//! Each capability has a runnable example under `examples/`:
//!
//! ```text
//! cargo run --example magic_square      # classical vs quantum for the square
//! cargo run --example chsh              # CHSH game values
//! cargo run --example clifford_rank     # complete-graph systems of rank N
//! cargo run --example certificates      # gadget commutativity certificates
//! cargo run --example reductions_tour   # the reduction zoo with traces
//! cargo run --example solvers_tour      # polynomial time fragments
//! ```
//!
//! The `bcslab` binary exposes the same operations as a small pipeline
//! friendly command line tool; see the README for the file formats.

pub mod assign;
pub mod bcs;
pub mod game;
pub mod linalg;
pub mod pauli;
pub mod reduce;
pub mod rewrite;
pub mod solve;

pub use assign::{
    clifford_bcs, clifford_generators, extend_anticommuting_pair, mermin_peres_assignment,
    verify_assignment, OperatorAssignment, VerificationReport,
};
pub use bcs::{derive_game, magic_square, Bcs, Constraint, Domain, GameSpec, Lit, VarId};
pub use game::{chsh_game, chsh_optimal_strategy, game_value, strategy_from_assignment, Strategy};
pub use pauli::PauliWord;
pub use reduce::{
    coloring_to_bcs, game_to_bcs, harden_3sat, ks_to_bcs, max_occurrence, occurrence_reduce,
    one_in_three_gadget, prism, reduce_3sat_to_1in3, reduce_3sat_to_3coloring,
    reduce_ksat_to_3sat, ColoringInstance, ReductionTrace,
};
pub use rewrite::{
    certify_gadget, check_extendibility, complete, prove_membership, Boundary, Certificate,
    GadgetKind, MembershipResult, NcPoly, ProofTrace, RewriteSystem, Word,
};
pub use solve::{
    classical_game_value, solve_2sat, solve_backtracking, solve_hornsat, solve_parity_gf2,
};
