//! Patching of flawed definite-clause domain theories against labeled
//! examples.
//!
//! The library represents acyclic propositional theories with negation as
//! failure, analyzes which examples are classified stably under all
//! revisions of a designated set of open components, constructs benign
//! revisions and full patches, reduces quasi-propositional first-order
//! theories to the propositional pipeline, and generates the SAT-based
//! hardness instances used to probe the boundary of tractability. Every
//! fast path is paired with a brute-force oracle for small instances.

pub mod error;
pub mod eval;
pub mod firstorder;
pub mod gen;
pub mod parity;
pub mod patch;
pub mod reductions;
pub mod stability;
pub mod text;
pub mod theory;

pub use error::{Error, Result};
pub use eval::{classify, classify_disabled, DisablingMap, DisablingSet};
pub use parity::{compute_parity, is_parity_definite, Parity, ParityMap};
pub use patch::{
    compute_obstruction, oracle_patch, pbenign, ppatch, synthesize, verify_patch,
    PatchOutcome, PatchReport, PbenignOutcome, Revision, RevisionKind,
};
pub use stability::{gamma_gen, gamma_spec, oracle_stable, pstable, StabilityVerdict};
pub use text::{parse_examples, parse_open, parse_theory, serialize_theory};
pub use theory::{
    BodyLiteral, Clause, ComponentId, Example, LabeledExample, PatchableTheory, Policy,
    Sign, Theory,
};
