//! Decision machinery for the bounded variable-occurrence fragment of the
//! calculus of relations.
//!
//! The crate is organised bottom-up:
//!
//! * [`term`]: syntax, parsing, printing, structural analyses;
//! * [`semantics`]: evaluation on finite structures, exhaustive and random
//!   model checks;
//! * [`constants`]: the four-element algebra of variable-free terms;
//! * [`word`]: unary contexts as words over a four-letter alphabet;
//! * [`automata`]: pattern automata, trimming, finiteness, minimisation;
//! * [`rewrite`]: string rewriting of words by oriented equations;
//! * [`search`]: discovery of a complete rewriting system;
//! * [`normalforms`]: term normal forms and the Σn decomposition;
//! * [`fo`]: first-order translation and prover exports;
//! * [`decide`]: verdict-producing equivalence procedures.

pub mod automata;
pub mod constants;
pub mod decide;
pub mod fo;
pub mod normalforms;
pub mod rewrite;
pub mod search;
pub mod semantics;
pub mod term;
pub mod word;

pub use semantics::{eval, Rel, Structure};
pub use term::{parse_term, Projection, Term};
