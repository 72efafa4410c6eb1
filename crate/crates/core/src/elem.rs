//! Elementary functions on p-bit floats with a `2^-p` relative error target.
//!
//! Everything runs at a working precision of `2p + 8` bits and is rounded
//! once at the end. The logarithm and the composite activations are written
//! as schedules over [`FpSteps`] so the depth tracer sees the same steps.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{FpSteps, PBit};
use crate::error::{Error, Result};
use crate::fp::{exponent_max, iter_add, round_scaled, FpNumber, Rational};

pub fn working_precision(p: u32) -> u32 {
    2 * p + 8
}

/// Term count for the logarithm's two series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaylorConfig {
    /// Series run over `i = 1 .. terms-1`.
    pub terms: usize,
    /// Precision of the returned value.
    pub precision: u32,
    /// Precision of every intermediate step.
    pub working: u32,
}

impl TaylorConfig {
    pub fn for_precision(p: u32) -> Self {
        Self::with_working(p, working_precision(p))
    }

    /// Smallest `N >= 2` with `(1/2)^N / N <= 2^-(w+2)`; both series have
    /// ratio at most 1/2, so the tail stays below `2^-(w+1)`.
    pub fn with_working(p: u32, w: u32) -> Self {
        let mut n = 2usize;
        while (n as f64) + (n as f64).log2() < f64::from(w) + 2.0 {
            n += 1;
        }
        Self { terms: n, precision: p, working: w }
    }

    pub fn doubled(self) -> Self {
        Self { terms: 2 * self.terms, ..self }
    }
}

thread_local! {
    static LN2: RefCell<HashMap<u32, BigInt>> = RefCell::new(HashMap::new());
}

/// `floor(ln 2 * 2^bits)` up to an error of a few units.
fn ln2_fixed(bits: u32) -> BigInt {
    LN2.with(|cache| {
        cache
            .borrow_mut()
            .entry(bits)
            .or_insert_with(|| {
                let guard = 16u32;
                let scale = BigInt::one() << (bits + guard);
                let mut acc = BigInt::zero();
                for i in 1..=(bits + guard + 2) {
                    acc += &scale / (BigInt::from(i) << i);
                }
                acc >> guard
            })
            .clone()
    })
}

fn bigint_bits(n: &BigInt) -> u32 {
    n.bits() as u32
}

pub fn exp_fp(x: &FpNumber) -> Result<FpNumber> {
    let p = x.precision();
    if x.is_zero() {
        return Ok(FpNumber::one(p));
    }
    let w = working_precision(p);
    // e^x leaves the representable range once |x| clearly exceeds (emax + p) ln 2
    let limit = exponent_max(p).map_or(1i64 << 40, |emax| emax + i64::from(p) + 2);
    let top = x.exponent() + i64::from(p);
    let too_big = top > 62 || x.to_f64().abs() > limit as f64 * std::f64::consts::LN_2;
    if too_big {
        return if x.is_negative() {
            Ok(FpNumber::zero(p))
        } else {
            Err(Error::Overflow { exponent: format!("~{}", x.to_f64() / std::f64::consts::LN_2), precision: p })
        };
    }

    // x = j ln2 + s with |s| <= ln2/2 (plus a hair)
    let xq = x.to_rational();
    let jb = (top.max(0) as u32) + 8;
    let l_coarse = Rational::new(ln2_fixed(jb + 8), BigInt::one() << (jb + 8));
    let j = (&xq / &l_coarse).round().to_integer();
    let fbits = w + bigint_bits(&j) + 12;
    let l_fine = Rational::new(ln2_fixed(fbits), BigInt::one() << fbits);
    let s = &xq - Rational::from_integer(j.clone()) * l_fine;
    let frac = w + 6;
    let s_fix = (s * Rational::from_integer(BigInt::one() << frac)).round().to_integer();

    let n = p as usize + 2;
    let mut terms = Vec::with_capacity(n);
    let mut fact = BigUint::one();
    for i in 0..n {
        if i > 0 {
            fact *= i as u32;
        }
        let num = num_traits::pow(s_fix.clone(), i);
        terms.push(round_scaled(&num, &fact, -(frac as i64) * i as i64, w)?);
    }
    let es = iter_add(&terms)?;
    let j = j.to_i64().expect("range checked");
    round_scaled(es.significand(), &BigUint::one(), es.exponent() + j, p)
}

pub fn sqrt_fp(x: &FpNumber) -> Result<FpNumber> {
    let p = x.precision();
    if x.is_zero() {
        return Ok(FpNumber::zero(p));
    }
    if x.is_negative() {
        return Err(Error::NegativeInput);
    }
    let w = i64::from(working_precision(p));
    let mut s = (2 * w - i64::from(p)).max(0);
    if (x.exponent() - s) % 2 != 0 {
        s += 1;
    }
    let n = x.significand().magnitude() << s as u64;
    let r = n.sqrt();
    // sticky bit below the last kept position
    let sticky = u32::from(&r * &r != n);
    let num = BigInt::from((r << 1u32) + sticky);
    round_scaled(&num, &BigUint::one(), (x.exponent() - s) / 2 - 1, p)
}

/// `x = (1 + u) 2^k` with `1 + u` in `[1/sqrt 2, sqrt 2)`, both at the
/// precision of `x`. The split point follows the significand rather than the
/// parity of the exponent so that `|u| <= 0.415` for every input.
pub fn log_split(x: &FpNumber) -> Result<(FpNumber, FpNumber)> {
    if !x.is_positive() {
        return Err(Error::NonPositiveInput);
    }
    let q = x.precision();
    let m = x.significand();
    let qi = i64::from(q);
    let upper = (m * m) >= (BigInt::one() << (2 * q - 1));
    let (scale, k) = if upper { (q, x.exponent() + qi) } else { (q - 1, x.exponent() + qi - 1) };
    let u_num = m - (BigInt::one() << scale);
    let u = round_scaled(&u_num, &BigUint::one(), -i64::from(scale), q)?;
    let k = round_scaled(&BigInt::from(k), &BigUint::one(), 0, q)?;
    Ok((u, k))
}

/// Natural logarithm by two Taylor series, staged as: split, `log(1+u)`,
/// `k log 2`, final sum.
pub fn log_schedule<A: FpSteps>(a: &mut A, x: &A::Value) -> Result<A::Value> {
    let cfg = TaylorConfig::for_precision(a.fp(x).precision());
    log_schedule_with(a, x, &cfg)
}

pub fn log_schedule_with<A: FpSteps>(a: &mut A, x: &A::Value, cfg: &TaylorConfig) -> Result<A::Value> {
    let xf = a.fp(x);
    if !xf.is_positive() {
        return Err(Error::NonPositiveInput);
    }
    let p = xf.precision();
    let w = cfg.working.max(p);
    a.enter();
    let xw = a.widen(x, w);
    let (u, k) = a.log_normalize(&xw)?;
    a.barrier();

    let mut terms = Vec::with_capacity(cfg.terms);
    for i in 1..cfg.terms {
        let sign = if i % 2 == 1 { 1 } else { -1 };
        let coef = a.constant_at(&Rational::new(BigInt::from(sign), BigInt::from(i)), w)?;
        let mut ops = vec![u.clone(); i];
        ops.push(coef);
        terms.push(a.iter_mul(&ops)?);
    }
    let log_r = a.iter_add(&terms)?;
    a.barrier();

    let half = a.constant_at(&Rational::new(BigInt::one(), BigInt::from(2)), w)?;
    let mut l2 = Vec::with_capacity(cfg.terms);
    for i in 1..cfg.terms {
        let inv = a.constant_at(&Rational::new(BigInt::one(), BigInt::from(i)), w)?;
        let mut ops = vec![half.clone(); i];
        ops.push(inv);
        l2.push(a.iter_mul(&ops)?);
    }
    let ln2 = a.iter_add(&l2)?;
    let k_ln2 = a.mul(&k, &ln2)?;
    a.barrier();

    let sum = a.add(&log_r, &k_ln2)?;
    a.leave();
    a.narrow(&sum, p)
}

/// `log(1 + e^x)`: exponential, one addition, logarithm.
///
/// The working precision grows by the bits `1 + e^x` loses for negative
/// `x`, so the result keeps its relative accuracy when it is close to `e^x`.
pub fn softplus_schedule<A: FpSteps>(a: &mut A, x: &A::Value) -> Result<A::Value> {
    let xf = a.fp(x);
    let p = xf.precision();
    let lost =
        if xf.is_negative() { (xf.to_f64().abs() * std::f64::consts::LOG2_E).ceil().min(4096.0) as u32 + 2 } else { 0 };
    let w = working_precision(p) + lost;
    a.enter();
    let xw = a.widen(x, w);
    let ex = match a.exp_at(&xw) {
        Ok(v) => v,
        // e^x beyond every representable value: log(1 + e^x) rounds to x
        Err(Error::Overflow { .. }) => {
            a.leave();
            return Ok(x.clone());
        }
        Err(e) => return Err(e),
    };
    let one = a.constant_at(&Rational::one(), w)?;
    let s = a.add(&one, &ex)?;
    let cfg = TaylorConfig::with_working(w, w + 8);
    let l = log_schedule_with(a, &s, &cfg)?;
    a.leave();
    a.narrow(&l, p)
}

/// `1 / (1 + e^-x)`.
pub fn sigmoid_schedule<A: FpSteps>(a: &mut A, x: &A::Value) -> Result<A::Value> {
    let p = a.fp(x).precision();
    let w = working_precision(p);
    a.enter();
    let xw = a.widen(x, w);
    let nx = a.neg(&xw);
    let Some(s) = one_plus_exp(a, &nx, w)? else {
        a.leave();
        return a.constant_at(&Rational::zero(), p);
    };
    let one = a.constant_at(&Rational::one(), w)?;
    let r = a.div(&one, &s)?;
    a.leave();
    a.narrow(&r, p)
}

/// `x / (1 + e^-x)`, which is `x * sigmoid(x)` with one division in place of
/// a reciprocal followed by a product.
pub fn silu_schedule<A: FpSteps>(a: &mut A, x: &A::Value) -> Result<A::Value> {
    let p = a.fp(x).precision();
    let w = working_precision(p);
    a.enter();
    let xw = a.widen(x, w);
    let nx = a.neg(&xw);
    let Some(s) = one_plus_exp(a, &nx, w)? else {
        a.leave();
        return a.constant_at(&Rational::zero(), p);
    };
    let r = a.div(&xw, &s)?;
    a.leave();
    a.narrow(&r, p)
}

/// `1 + e^y`, or `None` when `e^y` overflows (the callers then return 0).
fn one_plus_exp<A: FpSteps>(a: &mut A, y: &A::Value, w: u32) -> Result<Option<A::Value>> {
    let e = match a.exp_at(y) {
        Ok(v) => v,
        Err(Error::Overflow { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let one = a.constant_at(&Rational::one(), w)?;
    Ok(Some(a.add(&one, &e)?))
}

pub fn log_fp(x: &FpNumber) -> Result<FpNumber> {
    log_schedule(&mut PBit::new(x.precision()), x)
}

pub fn log_fp_with(x: &FpNumber, cfg: &TaylorConfig) -> Result<FpNumber> {
    log_schedule_with(&mut PBit::new(x.precision()), x, cfg)
}

pub fn softplus_fp(x: &FpNumber) -> Result<FpNumber> {
    softplus_schedule(&mut PBit::new(x.precision()), x)
}

pub fn sigmoid_fp(x: &FpNumber) -> Result<FpNumber> {
    sigmoid_schedule(&mut PBit::new(x.precision()), x)
}

pub fn silu_fp(x: &FpNumber) -> Result<FpNumber> {
    silu_schedule(&mut PBit::new(x.precision()), x)
}
