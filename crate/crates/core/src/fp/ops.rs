use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::number::{approx_div, round_p, round_scaled, FpNumber, Rational};
use crate::error::{Error, Result};

fn same_precision(a: &FpNumber, b: &FpNumber) -> Result<u32> {
    if a.precision() != b.precision() {
        return Err(Error::PrecisionMismatch(a.precision(), b.precision()));
    }
    Ok(a.precision())
}

fn uniform_precision(xs: &[FpNumber]) -> Result<u32> {
    let first = xs.first().ok_or(Error::EmptyOperands)?;
    for x in xs {
        same_precision(first, x)?;
    }
    Ok(first.precision())
}

/// `m ⫽ 2^d` for an integer significand, as numerator over `2^(d+3)`.
///
/// Beyond `d = p + 3` the quotient is a nonzero value in (-1/8, 1/8) whose
/// exact size never changes a comparison or a p-bit rounding against an
/// integer of at least `2^(p-1)`, so `d` is clamped there.
fn approx_shift_eighths(m: &BigInt, d: u64, p: u32) -> (BigInt, u64) {
    let d = d.min(u64::from(p) + 3);
    let quarter_multiple = d <= 2 || m.is_multiple_of(&(BigInt::one() << (d - 2)));
    let mut num = m << 3u32;
    if !quarter_multiple {
        num += BigInt::one() << d;
    }
    (num, d)
}

/// Float addition. A zero operand is treated as the one with the smaller
/// exponent, so `x + 0 = x`.
pub fn fp_add(a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
    let p = same_precision(a, b)?;
    if a.is_zero() {
        return Ok(b.clone());
    }
    if b.is_zero() {
        return Ok(a.clone());
    }
    let (big, small) = if a.exponent() >= b.exponent() { (a, b) } else { (b, a) };
    let gap = (big.exponent() - small.exponent()) as u64;
    let (small_num, d) = approx_shift_eighths(small.significand(), gap, p);
    // (m_big + m_small ⫽ 2^d) * 2^e_big, everything over 2^(d+3)
    let num = (big.significand() << (d + 3)) + small_num;
    round_scaled(&num, &BigUint::one(), big.exponent() - d as i64 - 3, p)
}

pub fn fp_sub(a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
    fp_add(a, &b.neg())
}

pub fn fp_mul(a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
    let p = same_precision(a, b)?;
    let num = a.significand() * b.significand();
    round_scaled(&num, &BigUint::one(), a.exponent() + b.exponent(), p)
}

pub fn fp_div(a: &FpNumber, b: &FpNumber) -> Result<FpNumber> {
    let p = same_precision(a, b)?;
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let scaled = Rational::from_integer(a.significand() << (p - 1));
    let q = approx_div(&scaled, &Rational::from_integer(b.significand().clone()))?;
    let shift = a.exponent() - b.exponent() - i64::from(p) + 1;
    round_scaled(q.numer(), q.denom().magnitude(), shift, p)
}

/// The definitional `a <= b`. Zero is again treated as the operand with the
/// smaller exponent.
pub fn fp_le(a: &FpNumber, b: &FpNumber) -> Result<bool> {
    let p = same_precision(a, b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(a.significand() <= b.significand());
    }
    // both sides scaled by 2^(d+3) so the ⫽ result stays integral
    if a.exponent() >= b.exponent() {
        let (rhs, d) = approx_shift_eighths(b.significand(), (a.exponent() - b.exponent()) as u64, p);
        Ok((a.significand() << (d + 3)) <= rhs)
    } else {
        let (lhs, d) = approx_shift_eighths(a.significand(), (b.exponent() - a.exponent()) as u64, p);
        Ok(lhs <= (b.significand() << (d + 3)))
    }
}

pub fn fp_compare(a: &FpNumber, b: &FpNumber) -> Result<Ordering> {
    match (fp_le(a, b)?, fp_le(b, a)?) {
        (true, true) => Ok(Ordering::Equal),
        (true, false) => Ok(Ordering::Less),
        (false, true) => Ok(Ordering::Greater),
        // both sides test the same pair (m_big, m_small ⫽ 2^d) in opposite directions
        (false, false) => unreachable!("definitional comparison is total"),
    }
}

/// Floor per the definition: exact for `e >= 0`, otherwise the significand
/// scaled to exponent 0 and rounded to an integer (ties to even).
pub fn fp_floor(a: &FpNumber) -> Result<FpNumber> {
    let p = a.precision();
    if a.is_zero() || a.exponent() >= 0 {
        return Ok(a.clone());
    }
    let den = BigInt::one() << a.exponent().unsigned_abs();
    let (mut q, r) = a.significand().div_mod_floor(&den);
    let twice = &r << 1u32;
    if twice > den || (twice == den && q.is_odd()) {
        q += 1;
    }
    round_p(&Rational::from_integer(q), p)
}

/// Exact sum of all operands followed by one rounding.
pub fn iter_add(xs: &[FpNumber]) -> Result<FpNumber> {
    let p = uniform_precision(xs)?;
    let nonzero: Vec<&FpNumber> = xs.iter().filter(|x| !x.is_zero()).collect();
    let Some(lo) = nonzero.iter().map(|x| x.exponent()).min() else {
        return Ok(FpNumber::zero(p));
    };
    let mut acc = BigInt::zero();
    for x in nonzero {
        acc += x.significand() << (x.exponent() - lo) as u64;
    }
    round_scaled(&acc, &BigUint::one(), lo, p)
}

/// Exact product of all operands followed by one rounding.
pub fn iter_mul(xs: &[FpNumber]) -> Result<FpNumber> {
    let p = uniform_precision(xs)?;
    if xs.iter().any(FpNumber::is_zero) {
        return Ok(FpNumber::zero(p));
    }
    // repeated factors (powers in Taylor terms) are raised once
    let mut counts: HashMap<&FpNumber, u32> = HashMap::new();
    for x in xs {
        *counts.entry(x).or_default() += 1;
    }
    let mut acc = BigInt::one();
    let mut shift = 0i64;
    for (x, k) in counts {
        acc *= num_traits::pow(x.significand().clone(), k as usize);
        shift += x.exponent() * i64::from(k);
    }
    round_scaled(&acc, &BigUint::one(), shift, p)
}

/// Exact sum of rationals, as used by the exact backend.
pub fn rational_sum<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Rational {
    xs.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}
