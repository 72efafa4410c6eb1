//! Threshold circuits: an executable gate-level IR, a rewrite into
//! MAJORITY-only form, a text netlist format, and constant-depth circuits
//! for p-bit float primitives checked against the float library.

pub mod builder;
pub mod check;
pub mod encoding;
pub mod error;
pub mod ir;
pub mod synth;

pub use builder::Builder;
pub use check::{
    check_circuit_exhaustive, check_exhaustive, check_sampled, growth_degree, iter_add_scaling, CheckReport, ScalePoint,
};
pub use encoding::{decode_result, encode_result, BitEncoding};
pub use error::{Error, Result};
pub use ir::{Circuit, Gate, GateKind};
pub use synth::{encode_operands, synthesize, Primitive};
