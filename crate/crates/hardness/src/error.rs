use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("permutations over different domains ({0} vs {1})")]
    DomainMismatch(usize, usize),
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("gate {id} ({kind}) is not supported; lower OR and wide gates to fan-in-2 AND/NOT first")]
    UnsupportedGate { id: usize, kind: String },
    #[error("variable {index} out of range for an assignment of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid modulus {0}")]
    InvalidModulus(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
