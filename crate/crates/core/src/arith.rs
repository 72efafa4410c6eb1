//! Arithmetic backends. Mamba and the composite elementary functions are
//! written once against [`Arith`]; the p-bit backend computes, the exact
//! backend is the oracle, and the tracer records a cost DAG while computing.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::elem;
use crate::error::{Error, Result};
use crate::fp::{self, round_p, FpNumber, Rational};

/// Precision at which the exact backend evaluates transcendental functions.
pub const TRANSCENDENTAL_BITS: u32 = 128;

pub trait Arith {
    type Value: Clone + Debug;

    /// A parameter or literal; free (wiring) in the cost model.
    fn constant(&mut self, q: &Rational) -> Result<Self::Value>;
    fn to_rational(&self, v: &Self::Value) -> Rational;
    fn is_zero(&self, v: &Self::Value) -> bool;
    /// Sign flip; free.
    fn neg(&mut self, v: &Self::Value) -> Self::Value;

    fn add(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn sub(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        let nb = self.neg(b);
        self.add(a, &nb)
    }
    fn mul(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn div(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    /// `x * c` for an exact constant `c` (a product of weights folded at
    /// build time), rounded once.
    fn mul_const(&mut self, x: &Self::Value, c: &Rational) -> Result<Self::Value>;
    fn iter_add(&mut self, xs: &[Self::Value]) -> Result<Self::Value>;
    fn iter_mul(&mut self, xs: &[Self::Value]) -> Result<Self::Value>;

    fn exp(&mut self, x: &Self::Value) -> Result<Self::Value>;
    fn log(&mut self, x: &Self::Value) -> Result<Self::Value>;
    fn softplus(&mut self, x: &Self::Value) -> Result<Self::Value>;
    fn sigmoid(&mut self, x: &Self::Value) -> Result<Self::Value>;
    fn silu(&mut self, x: &Self::Value) -> Result<Self::Value>;

    /// `1/x`, or zero when `x` is inside the singular band of this backend.
    fn recip_guarded(&mut self, x: &Self::Value) -> Result<Self::Value>;
    /// `a * b`, or one when `guard` is inside the singular band.
    fn mul_guarded(&mut self, a: &Self::Value, b: &Self::Value, guard: &Self::Value) -> Result<Self::Value>;

    /// Scalar replication across a feature dimension.
    fn broadcast(&mut self, v: &Self::Value) -> Self::Value {
        v.clone()
    }
    /// Shifted read with zero padding (`None` is an out-of-range index).
    fn gather(&mut self, v: Option<&Self::Value>) -> Result<Self::Value> {
        match v {
            Some(v) => Ok(v.clone()),
            None => self.constant(&Rational::zero()),
        }
    }
    /// A value handed to the next step of a recurrence.
    fn carry(&mut self, v: &Self::Value) -> Self::Value {
        v.clone()
    }
    /// Stage boundary: everything after waits for everything before.
    fn barrier(&mut self) {}
    fn enter(&mut self) {}
    fn leave(&mut self) {}
}

/// Backends whose values are p-bit floats, with explicit precision control.
pub trait FpSteps: Arith {
    fn fp<'a>(&self, v: &'a Self::Value) -> &'a FpNumber;
    /// Same value at precision `q >= p`; exact and free.
    fn widen(&mut self, v: &Self::Value, q: u32) -> Self::Value;
    /// Final rounding to `q`, folded into the producing operation.
    fn narrow(&mut self, v: &Self::Value, q: u32) -> Result<Self::Value>;
    fn constant_at(&mut self, c: &Rational, q: u32) -> Result<Self::Value>;
    /// Splits `x = (1 + u) * 2^k` for the logarithm; returns `(u, k)`.
    fn log_normalize(&mut self, x: &Self::Value) -> Result<(Self::Value, Self::Value)>;
    /// `e^x` at the precision of `x`.
    fn exp_at(&mut self, x: &Self::Value) -> Result<Self::Value>;
}

/// Singular band of the discretization guard: `|x| < 2^-(p/2)`.
pub fn singular_band(p: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << (p / 2))
}

/// The p-bit backend.
#[derive(Clone, Debug)]
pub struct PBit {
    pub p: u32,
}

impl PBit {
    pub fn new(p: u32) -> Self {
        Self { p }
    }

    fn in_band(&self, x: &FpNumber) -> bool {
        x.is_zero() || x.to_rational().abs() < singular_band(x.precision())
    }
}

impl Arith for PBit {
    type Value = FpNumber;

    fn constant(&mut self, q: &Rational) -> Result<FpNumber> {
        round_p(q, self.p)
    }
    fn to_rational(&self, v: &FpNumber) -> Rational {
        v.to_rational()
    }
    fn is_zero(&self, v: &FpNumber) -> bool {
        v.is_zero()
    }
    fn neg(&mut self, v: &FpNumber) -> FpNumber {
        v.neg()
    }
    fn add(&mut self, a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
        fp::fp_add(a, b)
    }
    fn mul(&mut self, a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
        fp::fp_mul(a, b)
    }
    fn div(&mut self, a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
        fp::fp_div(a, b)
    }
    fn mul_const(&mut self, x: &FpNumber, c: &Rational) -> Result<FpNumber> {
        round_p(&(x.to_rational() * c), x.precision())
    }
    fn iter_add(&mut self, xs: &[FpNumber]) -> Result<FpNumber> {
        fp::iter_add(xs)
    }
    fn iter_mul(&mut self, xs: &[FpNumber]) -> Result<FpNumber> {
        fp::iter_mul(xs)
    }
    fn exp(&mut self, x: &FpNumber) -> Result<FpNumber> {
        elem::exp_fp(x)
    }
    fn log(&mut self, x: &FpNumber) -> Result<FpNumber> {
        elem::log_schedule(self, x)
    }
    fn softplus(&mut self, x: &FpNumber) -> Result<FpNumber> {
        elem::softplus_schedule(self, x)
    }
    fn sigmoid(&mut self, x: &FpNumber) -> Result<FpNumber> {
        elem::sigmoid_schedule(self, x)
    }
    fn silu(&mut self, x: &FpNumber) -> Result<FpNumber> {
        elem::silu_schedule(self, x)
    }
    fn recip_guarded(&mut self, x: &FpNumber) -> Result<FpNumber> {
        if self.in_band(x) {
            return Ok(FpNumber::zero(x.precision()));
        }
        fp::fp_div(&FpNumber::one(x.precision()), x)
    }
    fn mul_guarded(&mut self, a: &FpNumber, b: &FpNumber, guard: &FpNumber) -> Result<FpNumber> {
        if self.in_band(guard) {
            return Ok(FpNumber::one(a.precision()));
        }
        fp::fp_mul(a, b)
    }
}

impl FpSteps for PBit {
    fn fp<'a>(&self, v: &'a FpNumber) -> &'a FpNumber {
        v
    }
    fn widen(&mut self, v: &FpNumber, q: u32) -> FpNumber {
        v.widen(q)
    }
    fn narrow(&mut self, v: &FpNumber, q: u32) -> Result<FpNumber> {
        v.round_to(q)
    }
    fn constant_at(&mut self, c: &Rational, q: u32) -> Result<FpNumber> {
        round_p(c, q)
    }
    fn log_normalize(&mut self, x: &FpNumber) -> Result<(FpNumber, FpNumber)> {
        elem::log_split(x)
    }
    fn exp_at(&mut self, x: &FpNumber) -> Result<FpNumber> {
        elem::exp_fp(x)
    }
}

/// The exact-rational backend. Transcendental functions are evaluated as
/// black boxes at [`TRANSCENDENTAL_BITS`] and enter as rationals.
#[derive(Clone, Debug, Default)]
pub struct Exact;

fn hi(q: &Rational) -> Result<FpNumber> {
    round_p(q, TRANSCENDENTAL_BITS)
}

impl Arith for Exact {
    type Value = Rational;

    fn constant(&mut self, q: &Rational) -> Result<Rational> {
        Ok(q.clone())
    }
    fn to_rational(&self, v: &Rational) -> Rational {
        v.clone()
    }
    fn is_zero(&self, v: &Rational) -> bool {
        v.is_zero()
    }
    fn neg(&mut self, v: &Rational) -> Rational {
        -v
    }
    fn add(&mut self, a: &Rational, b: &Rational) -> Result<Rational> {
        Ok(a + b)
    }
    fn mul(&mut self, a: &Rational, b: &Rational) -> Result<Rational> {
        Ok(a * b)
    }
    fn div(&mut self, a: &Rational, b: &Rational) -> Result<Rational> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(a / b)
    }
    fn mul_const(&mut self, x: &Rational, c: &Rational) -> Result<Rational> {
        Ok(x * c)
    }
    fn iter_add(&mut self, xs: &[Rational]) -> Result<Rational> {
        if xs.is_empty() {
            return Err(Error::EmptyOperands);
        }
        Ok(fp::rational_sum(xs))
    }
    fn iter_mul(&mut self, xs: &[Rational]) -> Result<Rational> {
        if xs.is_empty() {
            return Err(Error::EmptyOperands);
        }
        Ok(xs.iter().fold(Rational::one(), |acc, x| acc * x))
    }
    fn exp(&mut self, x: &Rational) -> Result<Rational> {
        Ok(elem::exp_fp(&hi(x)?)?.to_rational())
    }
    fn log(&mut self, x: &Rational) -> Result<Rational> {
        if !x.is_positive() {
            return Err(Error::NonPositiveInput);
        }
        Ok(elem::log_fp(&hi(x)?)?.to_rational())
    }
    fn softplus(&mut self, x: &Rational) -> Result<Rational> {
        Ok(elem::softplus_fp(&hi(x)?)?.to_rational())
    }
    fn sigmoid(&mut self, x: &Rational) -> Result<Rational> {
        Ok(elem::sigmoid_fp(&hi(x)?)?.to_rational())
    }
    fn silu(&mut self, x: &Rational) -> Result<Rational> {
        Ok(elem::silu_fp(&hi(x)?)?.to_rational())
    }
    fn recip_guarded(&mut self, x: &Rational) -> Result<Rational> {
        if x.is_zero() {
            return Ok(Rational::zero());
        }
        Ok(x.recip())
    }
    fn mul_guarded(&mut self, a: &Rational, b: &Rational, guard: &Rational) -> Result<Rational> {
        if guard.is_zero() {
            return Ok(Rational::one());
        }
        Ok(a * b)
    }
}

/// Loads a matrix into a backend as constants.
pub fn lift<A: Arith>(a: &mut A, m: &crate::fp::FpMatrix) -> Result<crate::fp::Matrix<A::Value>> {
    let q = m.to_rationals();
    q.try_map(|x| a.constant(x))
}

/// Reads backend values back into a matrix of the given mode; exact when the
/// backend works at that precision.
pub fn lower<A: Arith>(a: &A, m: &crate::fp::Matrix<A::Value>, mode: crate::fp::Mode) -> Result<crate::fp::FpMatrix> {
    crate::fp::FpMatrix::from_rationals(&m.map(|v| a.to_rational(v)), mode)
}

/// Matrix product: every entry is one layer of products and one iterated
/// sum.
pub fn matmul<A: Arith>(
    a: &mut A,
    x: &crate::fp::Matrix<A::Value>,
    y: &crate::fp::Matrix<A::Value>,
) -> Result<crate::fp::Matrix<A::Value>> {
    if x.cols() != y.rows() {
        return Err(Error::ShapeMismatch(format!("matmul {}x{} by {}x{}", x.rows(), x.cols(), y.rows(), y.cols())));
    }
    crate::fp::Matrix::try_from_fn(x.rows(), y.cols(), |i, j| {
        let terms = (0..x.cols()).map(|k| a.mul(x.get(i, k), y.get(k, j))).collect::<Result<Vec<_>>>()?;
        a.iter_add(&terms)
    })
}

pub fn hadamard<A: Arith>(
    a: &mut A,
    x: &crate::fp::Matrix<A::Value>,
    y: &crate::fp::Matrix<A::Value>,
) -> Result<crate::fp::Matrix<A::Value>> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch(format!("hadamard {:?} vs {:?}", x.shape(), y.shape())));
    }
    crate::fp::Matrix::try_from_fn(x.rows(), x.cols(), |i, j| a.mul(x.get(i, j), y.get(i, j)))
}
