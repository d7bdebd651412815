//! Equational proof tooling for lattice theory.
//!
//! The crate bundles three cooperating parts:
//!
//! * a term language with AC-aware comparison, a catalog of basic rewrite
//!   rules (lattice axioms, the modular law and its commuted combinations,
//!   definition substitution, Connecting-Lemma rewrites), and a bounded
//!   syntactic order oracle for their side conditions;
//! * a proof-script format with strict and lenient verification, a bundled
//!   corpus of three proofs of `u /\ v = p`, a decomposer that expands
//!   compound steps into single-rule chains, and two length metrics
//!   (symbol counts and proof-poset length);
//! * a finite-lattice brute-force oracle that enumerates small lattices up
//!   to isomorphism and exhaustively checks the axioms, the lemmas, the
//!   `u /\ v = p` identity, and both halves of the forbidden-sublattice
//!   characterization of modularity and distributivity.

pub mod term;
pub mod rules;
pub mod order;
pub(crate) mod acrewrite;
pub mod script;
pub mod corpus;
pub mod decompose;
pub mod metrics;
pub mod lattice;

pub use order::{derive_leq, Derivation, DerivationRule, OrderFact};
pub use rules::{
    apply_rule, enumerate_rewrites, rule_schemas, Context, Direction, RuleId, RuleInstance,
};
pub use script::{parse_script, verify_script, Mode, ProofScript, VerificationReport, Verdict};
pub use term::{ac_canonical, equal_mod_ac, format_term, parse_term, OpKind, Position, Term};
