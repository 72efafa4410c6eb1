use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational arithmetic, always kept in reduced form with a positive denominator.
pub type Rational = BigRational;

/// A p-bit float `m * 2^e`.
///
/// Nonzero significands satisfy `2^(p-1) <= |m| < 2^p`; the negative side is
/// closed at `-2^(p-1)` so negation is always exact. Zero is stored as `(0, 0)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpNumber {
    m: BigInt,
    e: i64,
    p: u32,
}

/// Smallest allowed exponent `-2^p`, or `None` when the range exceeds `i64`.
pub fn exponent_min(p: u32) -> Option<i64> {
    (p < 62).then(|| -(1i64 << p))
}

/// One past the largest allowed exponent, `2^p`.
pub fn exponent_max(p: u32) -> Option<i64> {
    (p < 62).then(|| 1i64 << p)
}

pub(crate) fn check_precision(p: u32) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidPrecision(p));
    }
    Ok(())
}

impl FpNumber {
    pub fn new(m: BigInt, e: i64, p: u32) -> Result<Self> {
        check_precision(p)?;
        if m.is_zero() {
            if e != 0 {
                return Err(Error::NotNormalized { m: m.to_string(), p });
            }
            return Ok(Self::zero(p));
        }
        let mag = m.magnitude();
        if mag.bits() != u64::from(p) {
            return Err(Error::NotNormalized { m: m.to_string(), p });
        }
        let lo = exponent_min(p);
        let hi = exponent_max(p);
        if lo.is_some_and(|lo| e < lo) || hi.is_some_and(|hi| e >= hi) {
            return Err(Error::ExponentOutOfRange { e: e.to_string(), p });
        }
        Ok(Self { m, e, p })
    }

    pub fn from_parts(m: i64, e: i64, p: u32) -> Result<Self> {
        Self::new(BigInt::from(m), e, p)
    }

    pub fn zero(p: u32) -> Self {
        Self { m: BigInt::zero(), e: 0, p }
    }

    pub fn one(p: u32) -> Self {
        Self { m: BigInt::one() << (p - 1), e: -(i64::from(p) - 1), p }
    }

    /// Nearest p-bit float to an integer.
    pub fn from_int(v: i64, p: u32) -> Result<Self> {
        round_p(&Rational::from_integer(BigInt::from(v)), p)
    }

    pub fn significand(&self) -> &BigInt {
        &self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }

    pub fn precision(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.m.is_positive()
    }

    pub fn to_rational(&self) -> Rational {
        shifted_rational(self.m.clone(), self.e)
    }

    /// Nearest `f64`; saturates to infinity or zero outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let m = self.m.to_f64().unwrap_or(f64::NAN);
        let e = self.e.clamp(-2000, 2000) as i32;
        m * 2f64.powi(e)
    }

    /// Exact negation.
    pub fn neg(&self) -> Self {
        Self { m: -&self.m, e: self.e, p: self.p }
    }

    pub fn abs(&self) -> Self {
        Self { m: self.m.abs(), e: self.e, p: self.p }
    }

    /// The same value at a larger precision `q >= p`; exact.
    pub fn widen(&self, q: u32) -> Self {
        assert!(q >= self.p, "widen to a smaller precision");
        if self.is_zero() {
            return Self::zero(q);
        }
        let s = q - self.p;
        Self { m: &self.m << s, e: self.e - i64::from(s), p: q }
    }

    /// Round to precision `q`.
    pub fn round_to(&self, q: u32) -> Result<Self> {
        if q == self.p {
            return Ok(self.clone());
        }
        round_scaled(&self.m, &BigUint::one(), self.e, q)
    }

    /// Smallest positive value at precision `p`.
    pub fn min_positive(p: u32) -> Option<Self> {
        exponent_min(p).map(|lo| Self { m: BigInt::one() << (p - 1), e: lo, p })
    }
}

impl fmt::Debug for FpNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>_{}", self.m, self.e, self.p)
    }
}

impl fmt::Display for FpNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// `m * 2^e` as a rational.
pub fn shifted_rational(m: BigInt, e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(m << e as u64)
    } else {
        Rational::new(m, BigInt::one() << e.unsigned_abs())
    }
}

/// Round-to-nearest, ties to even significand.
///
/// Values below the smallest magnitude go to zero or to the smallest
/// magnitude, whichever is closer; an exact halfway point goes to zero.
pub fn round_p(x: &Rational, p: u32) -> Result<FpNumber> {
    check_precision(p)?;
    let den = x.denom().magnitude();
    round_scaled(x.numer(), den, 0, p)
}

/// Rounds `num / den * 2^shift` to precision `p`.
pub(crate) fn round_scaled(num: &BigInt, den: &BigUint, shift: i64, p: u32) -> Result<FpNumber> {
    if num.is_zero() {
        return Ok(FpNumber::zero(p));
    }
    let negative = num.sign() == Sign::Minus;
    let a = num.magnitude();
    // floor(log2(a / den))
    let mut t = a.bits() as i64 - den.bits() as i64;
    let ge = if t >= 0 { *a >= den << t as u64 } else { (a << (-t) as u64) >= *den };
    if !ge {
        t -= 1;
    }
    let lead = t + shift;
    let pi = i64::from(p);
    let mut e = lead - (pi - 1);
    let sign = |mag: BigUint| BigInt::from_biguint(if negative { Sign::Minus } else { Sign::Plus }, mag);

    if let Some(lo) = exponent_min(p) {
        if e < lo {
            let half_lead = pi - 2 + lo;
            let exact_pow2 = if t >= 0 { *a == den << t as u64 } else { (a << (-t) as u64) == *den };
            if lead < half_lead || (lead == half_lead && exact_pow2) {
                return Ok(FpNumber::zero(p));
            }
            return Ok(FpNumber { m: sign(BigUint::one() << (p - 1)), e: lo, p });
        }
    }

    let s = shift - e;
    let (n, d) = if s >= 0 { (a << s as u64, den.clone()) } else { (a.clone(), den << (-s) as u64) };
    let (mut q, r) = n.div_rem(&d);
    let twice = &r << 1u32;
    if twice > d || (twice == d && q.is_odd()) {
        q += 1u32;
    }
    if q.bits() > u64::from(p) {
        q >>= 1u32;
        e += 1;
    }
    if let Some(hi) = exponent_max(p) {
        if e >= hi {
            return Err(Error::Overflow { exponent: e.to_string(), precision: p });
        }
    }
    Ok(FpNumber { m: sign(q), e, p })
}

/// `a ⫽ b`: the exact quotient when it is a multiple of 1/4, otherwise the
/// quotient plus 1/8.
pub fn approx_div(a: &Rational, b: &Rational) -> Result<Rational> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let q = a / b;
    if (&q * Rational::from_integer(BigInt::from(4))).is_integer() {
        Ok(q)
    } else {
        Ok(q + Rational::new(BigInt::one(), BigInt::from(8)))
    }
}

#[derive(Serialize, Deserialize)]
struct FpRepr {
    m: String,
    e: String,
    p: u32,
}

impl Serialize for FpNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FpRepr { m: self.m.to_string(), e: self.e.to_string(), p: self.p }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FpNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FpRepr::deserialize(d)?;
        let m: BigInt = r.m.parse().map_err(D::Error::custom)?;
        let e: i64 = r.e.parse().map_err(D::Error::custom)?;
        FpNumber::new(m, e, r.p).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: String,
    den: String,
}

/// Serde helpers for rationals as `{"num": "..", "den": ".."}`.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr { num: q.numer().to_string(), den: q.denom().to_string() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        use serde::de::Error as _;
        let r = RationalRepr::deserialize(d)?;
        let num: BigInt = r.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = r.den.parse().map_err(D::Error::custom)?;
        if !den.is_positive() {
            return Err(D::Error::custom("denominator must be positive"));
        }
        Ok(Rational::new(num, den))
    }
}

/// Parses a decimal literal such as `3`, `-0.125` or `1e-3` exactly.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
    let scale = exp10 - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}
