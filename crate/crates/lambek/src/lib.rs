//! A workbench for the multiplicative-additive Lambek calculus extended with
//! a subexponential modality, brackets and bracket modalities, in all the
//! variants used by Morrill-style categorial grammars: it checks, searches,
//! transforms and synthesizes derivations, and runs categorial-grammar
//! recognition and semi-Thue encodings on top of them.
//!
//! All values are immutable after construction; every operation is pure and
//! safe to call from multiple threads.

pub mod calculus;
pub mod cutelim;
pub mod derivation;
pub mod encode;
pub mod fixtures;
pub mod formula;
pub mod gen;
pub mod grammar;
pub mod parse;
pub mod project;
pub mod rules;
pub mod search;
pub mod sequent;

pub use calculus::{BRule, BangProfile, CalculusId, RuleId};
pub use derivation::{check, Derivation};
pub use formula::Formula;
pub use parse::{parse_formula, parse_meta, parse_sequent};
pub use rules::{enumerate_backward, find_app, premises_of, RuleApp, RuleParams};
pub use search::{search, SearchBudget, SearchVerdict};
pub use sequent::{
    lambek_restriction_holds, replace_zone, subformula_closure, zone_at, MetaFormula, Sequent,
    Stoup, TreeTerm, ZonePath,
};
