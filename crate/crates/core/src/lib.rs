//! A semantic composition engine over a many-sorted polymorphic lambda
//! calculus.
//!
//! The pipeline: a [`lexicon`](crate::lexicon) assigns each word a typed
//! term plus a family of typed *transformations* (coercions) graded by
//! flexibility; a [`discourse`](crate::discourse) is a list of derivation
//! trees over word occurrences; the [`engine`](crate::engine) composes each
//! tree, inserting coercions where sorts clash and checking every insertion
//! against the occurrence's accumulated constraints; the resulting
//! beta-normal term [erases](crate::formula::erase) to a first-order
//! formula, and each reading carries a felicity verdict explaining why it
//! stands or falls.
//!
//! ```
//! use ltyn_core::discourse::parse_discourse;
//! use ltyn_core::engine::{compose, EngineConfig};
//! use ltyn_core::formula::FormulaStyle;
//! use ltyn_core::lexicon::load_lexicon;
//!
//! let lex = load_lexicon(
//!     "sort City <: e\n\
//!      sort Club <: e\n\
//!      word Liverpool : City = Liverpool\n\
//!      \x20 opt f_C : City -> Club = f_C deg R\n\
//!      word won : Club -> t = lam x:Club. won x\n",
//! )
//! .unwrap();
//! let discourse = parse_discourse("(won Liverpool#1)\n").unwrap();
//! let readings = compose(&discourse, &lex, &EngineConfig::default()).unwrap();
//! assert_eq!(
//!     readings[0].formula.as_ref().unwrap().render(FormulaStyle::Ascii),
//!     "won(f_C(Liverpool))"
//! );
//! assert_eq!(readings[0].verdict.render(), "felicitous");
//! ```

pub mod discourse;
pub mod engine;
pub mod formula;
pub mod lexicon;
pub mod ontology;
pub mod reduce;
pub mod subst;
pub mod syntax;
pub mod term;
pub mod typing;

pub use discourse::{parse_discourse, DerivationNode, Discourse};
pub use engine::{
    compose, diagnose_missing, replay_discourse, suggest_word_stub, EngineConfig, EngineError,
    Reading, Verdict,
};
pub use formula::{erase, Formula, FormulaStyle};
pub use lexicon::{load_lexicon, merge_overlay, serialize_lexicon, Lexicon, LexiconError};
pub use ontology::Ontology;
pub use reduce::{normalize, Strategy, DEFAULT_STEP_BUDGET};
pub use term::{Term, Type};
pub use typing::{type_of, TypingContext};
