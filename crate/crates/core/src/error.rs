use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("overflow: result needs exponent {exponent}, outside the range for p={precision}")]
    Overflow { exponent: String, precision: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision mismatch: p={0} vs p={1}")]
    PrecisionMismatch(u32, u32),
    #[error("invalid precision p={0} (need p >= 2)")]
    InvalidPrecision(u32),
    #[error("significand {m} is not normalized for p={p}")]
    NotNormalized { m: String, p: u32 },
    #[error("exponent {e} is outside the range for p={p}")]
    ExponentOutOfRange { e: String, p: u32 },
    #[error("empty operand list")]
    EmptyOperands,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("negative input to sqrt")]
    NegativeInput,
    #[error("log of a non-positive number")]
    NonPositiveInput,
    #[error("cycle detected at node {0}")]
    CycleDetected(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
