//! p-bit floating point numbers and their operations.

mod matrix;
mod number;
mod ops;

pub use matrix::{hadamard, matmul, rational_to_f64, FpMatrix, Matrix, Mode};
pub(crate) use number::round_scaled;
pub use number::{
    approx_div, exponent_max, exponent_min, parse_decimal, rational_serde, round_p, shifted_rational, FpNumber,
    Rational,
};
pub use ops::{fp_add, fp_compare, fp_div, fp_floor, fp_le, fp_mul, fp_sub, iter_add, iter_mul, rational_sum};
