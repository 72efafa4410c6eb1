//! Bit-exact p-bit floating point arithmetic, elementary functions, a Mamba
//! forward pass over it, and symbolic critical-path depth tracing.

pub mod error;
pub mod fp;

pub use error::{Error, Result};
pub mod arith;
pub mod elem;
pub mod mamba;
pub mod trace;
