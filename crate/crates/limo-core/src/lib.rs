//! Decision procedure and countermodel generator for the local intuitionistic
//! modal logics LIK, LIKD and LIKT.
//!
//! The crate is organized bottom-up:
//!
//! * [`formula`] — the modal language, parsing and printing;
//! * [`sequent`] — bi-nested sequents with implication and modal blocks,
//!   positions, the flat/sharp operators and structural inclusion;
//! * [`calculus`] — the sequent rules (multiset and cumulative set-based
//!   variants), axiom detection and saturation conditions;
//! * [`search`] — the terminating backward proof-search procedure with
//!   tracking records, realization and derivation trees;
//! * [`semantics`] — finite bi-relational Kripke models, forcing, frame
//!   checks, countermodel extraction and a bounded brute-force oracle;
//! * [`random`] — seeded generators for formulas and sequents used by the
//!   regression corpus and property tests.

pub mod calculus;
pub mod formula;
pub mod random;
pub mod search;
pub mod semantics;
pub mod sequent;

pub use calculus::{CalculusVariant, LogicId};
pub use formula::Formula;
pub use search::{prove, prove_minus, MinusVerdict, SearchOutcome};
pub use semantics::Model;
pub use sequent::Sequent;
