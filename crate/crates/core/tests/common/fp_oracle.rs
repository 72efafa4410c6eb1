//! Literal rational transcription of the float definitions, with rounding by
//! brute-force search over every representable value. Independent of the
//! library's rounding code; only usable for tiny p.
#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Small {
    pub m: i64,
    pub e: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Small),
    Overflow,
    DivZero,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn pow2(e: i64) -> Q {
    if e >= 0 {
        Q::from_integer(BigInt::one() << e as usize)
    } else {
        Q::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

pub fn value(x: Small) -> Q {
    q(x.m) * pow2(x.e)
}

/// Every representable p-bit float over the full exponent range.
pub fn all_values(p: u32) -> Vec<Small> {
    let lo = -(1i64 << p);
    let hi = 1i64 << p;
    let mut out = vec![Small { m: 0, e: 0 }];
    for e in lo..hi {
        for m in (1i64 << (p - 1))..(1i64 << p) {
            out.push(Small { m, e });
            out.push(Small { m: -m, e });
        }
    }
    out
}

/// In-window floats, exponents in `[lo, hi)`.
pub fn window_values(p: u32, lo: i64, hi: i64) -> Vec<Small> {
    let mut out = vec![Small { m: 0, e: 0 }];
    for e in lo..hi {
        for m in (1i64 << (p - 1))..(1i64 << p) {
            out.push(Small { m, e });
            out.push(Small { m: -m, e });
        }
    }
    out
}

/// Nearest representable by exhaustive search; ties go to the even
/// significand, and between two even candidates (only zero against the
/// smallest magnitude) to the smaller magnitude.
pub fn round_brute(x: &Q, p: u32, table: &[Small]) -> Outcome {
    let emax = 1i64 << p;
    let top = (q(1i64 << p) - Q::new(BigInt::one(), BigInt::from(2))) * pow2(emax - 1);
    if x.abs() >= top {
        return Outcome::Overflow;
    }
    let mut best: Option<(Q, Small)> = None;
    for &c in table {
        let d = (value(c) - x).abs();
        let better = match &best {
            None => true,
            Some((bd, bc)) => match d.cmp(bd) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let (ce, be) = (c.m % 2 == 0, bc.m % 2 == 0);
                    if ce != be {
                        ce
                    } else {
                        value(c).abs() < value(*bc).abs()
                    }
                }
            },
        };
        if better {
            best = Some((d, c));
        }
    }
    Outcome::Value(best.unwrap().1)
}

pub fn sslash(a: &Q, b: &Q) -> Q {
    let r = a / b;
    if (&r * q(4)).is_integer() {
        r
    } else {
        r + Q::new(BigInt::one(), BigInt::from(8))
    }
}

/// Exponent used to pick the definitional branch; zero sorts below everything.
fn key(x: Small) -> Option<i64> {
    (x.m != 0).then_some(x.e)
}

pub fn add(a: Small, b: Small, p: u32, table: &[Small]) -> Outcome {
    let v = if key(a) >= key(b) {
        (q(a.m) + sslash(&q(b.m), &pow2(a.e - b.e))) * pow2(a.e)
    } else {
        (sslash(&q(a.m), &pow2(b.e - a.e)) + q(b.m)) * pow2(b.e)
    };
    round_brute(&v, p, table)
}

pub fn mul(a: Small, b: Small, p: u32, table: &[Small]) -> Outcome {
    round_brute(&(q(a.m * b.m) * pow2(a.e + b.e)), p, table)
}

pub fn div(a: Small, b: Small, p: u32, table: &[Small]) -> Outcome {
    if b.m == 0 {
        return Outcome::DivZero;
    }
    let v = sslash(&(q(a.m) * pow2(i64::from(p) - 1)), &q(b.m)) * pow2(a.e - b.e - i64::from(p) + 1);
    round_brute(&v, p, table)
}

pub fn le(a: Small, b: Small) -> bool {
    if key(a) >= key(b) {
        q(a.m) <= sslash(&q(b.m), &pow2(a.e - b.e))
    } else {
        sslash(&q(a.m), &pow2(b.e - a.e)) <= q(b.m)
    }
}

pub fn compare(a: Small, b: Small) -> Ordering {
    match (le(a, b), le(b, a)) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        _ => Ordering::Greater,
    }
}

pub fn floor(a: Small, p: u32, table: &[Small]) -> Outcome {
    if a.e >= 0 {
        return round_brute(&(q(a.m) * pow2(a.e)), p, table);
    }
    // round(<m / 2^-e, 0>): nearest integer, ties to even
    let x = q(a.m) / pow2(-a.e);
    let fl = x.floor();
    let frac = &x - &fl;
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let n = match frac.cmp(&half) {
        Ordering::Less => fl,
        Ordering::Greater => fl + Q::one(),
        Ordering::Equal => {
            if (fl.to_integer() % BigInt::from(2)).is_zero() {
                fl
            } else {
                fl + Q::one()
            }
        }
    };
    round_brute(&n, p, table)
}
