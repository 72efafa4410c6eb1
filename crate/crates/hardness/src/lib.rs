//! Reference evaluators and corpus generators for arithmetic and Boolean
//! formula evaluation and the S5 word problem, with Barrington's
//! translation of fan-in-2 circuits into width-5 permutation branching
//! programs.

pub mod arith;
pub mod boolean;
pub mod corpus;
pub mod error;
pub mod family;
pub mod pbp;
pub mod perm;

pub use arith::{ArithFormula, ArithInstance, Semiring};
pub use boolean::BoolFormula;
pub use corpus::{generate, label, Corpus, Kind};
pub use error::{Error, Result};
pub use pbp::{barrington_transform, eval_pbp, lower_to_and_not, Instruction, PbpProgram, S5};
pub use perm::{compose, word_problem, Permutation};
