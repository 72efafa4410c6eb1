//! 256-bit reference values for the elementary functions.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use tcbench_core::fp::FpNumber;

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sigmoid,
    Silu,
    Softplus,
}

pub fn big(x: &FpNumber) -> BigFloat {
    assert!(x.precision() <= 53, "oracle inputs must be exact in f64");
    BigFloat::from_f64(x.to_f64(), PREC)
}

pub fn eval(f: Func, x: &FpNumber) -> BigFloat {
    let mut cc = Consts::new().expect("constants cache");
    let v = big(x);
    let one = BigFloat::from_f64(1.0, PREC);
    match f {
        Func::Exp => v.exp(PREC, RM, &mut cc),
        Func::Log => v.ln(PREC, RM, &mut cc),
        Func::Sqrt => v.sqrt(PREC, RM),
        Func::Sigmoid => one.div(&one.add(&v.neg().exp(PREC, RM, &mut cc), PREC, RM), PREC, RM),
        Func::Silu => v.div(&one.add(&v.neg().exp(PREC, RM, &mut cc), PREC, RM), PREC, RM),
        Func::Softplus => one.add(&v.exp(PREC, RM, &mut cc), PREC, RM).ln(PREC, RM, &mut cc),
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    let s = format!("{x}");
    s.parse::<f64>().unwrap_or_else(|_| panic!("unparseable {s}"))
}

/// `|got - exact| / |exact|`; zero when both are zero.
pub fn rel_err(got: &FpNumber, exact: &BigFloat) -> f64 {
    let g = big(got);
    if exact.is_zero() {
        return if got.is_zero() { 0.0 } else { f64::INFINITY };
    }
    let d = g.sub(exact, PREC, RM).abs();
    to_f64(&d.div(&exact.abs(), PREC, RM))
}

/// Decimal expansion of `x` as a rational (about 77 significant digits).
pub fn to_q(x: &BigFloat) -> tcbench_core::fp::Rational {
    let s = format!("{x}");
    tcbench_core::fp::parse_decimal(&s).unwrap_or_else(|| panic!("unparseable {s}"))
}
