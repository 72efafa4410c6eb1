use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("gate {id}: {reason}")]
    InvalidGate { id: usize, reason: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported precision p={0} (synthesis supports 2..=8)")]
    UnsupportedPrecision(u32),
    #[error("unsupported exponent window of {bits} bits for p={p} (need 1..=p)")]
    UnsupportedWindow { bits: u32, p: u32 },
    #[error("unsupported operand count m={0} (need 2..=64)")]
    UnsupportedSize(usize),
    #[error("value outside the encoding: {0}")]
    OutOfWindow(String),
    #[error(transparent)]
    Fp(#[from] tcbench_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
