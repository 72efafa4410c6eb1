//! Bit layout of p-bit floats on circuit wires.
//!
//! A number `<m, e>` takes `p + 1` significand bits (two's complement) then
//! `exp_bits` exponent bits (two's complement), each field least significant
//! bit first. The exponent window is `[-2^(exp_bits-1), 2^(exp_bits-1))`.
//! Zero is the all-zero pattern, matching its canonical `<0, 0>` form.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use tcbench_core::fp::{exponent_max, exponent_min, FpNumber};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitEncoding {
    pub p: u32,
    pub exp_bits: u32,
}

impl BitEncoding {
    pub fn new(p: u32, exp_bits: u32) -> Result<Self> {
        if !(2..=16).contains(&p) {
            return Err(Error::UnsupportedPrecision(p));
        }
        if exp_bits == 0 || exp_bits > p + 1 {
            return Err(Error::UnsupportedWindow { bits: exp_bits, p });
        }
        Ok(BitEncoding { p, exp_bits })
    }

    /// Layout for results: the full exponent range `[-2^p, 2^p)`.
    pub fn full_range(p: u32) -> Result<Self> {
        Self::new(p, p + 1)
    }

    pub fn width(&self) -> usize {
        (self.p + 1 + self.exp_bits) as usize
    }

    pub fn window(&self) -> (i64, i64) {
        let half = 1i64 << (self.exp_bits - 1);
        let lo = exponent_min(self.p).map_or(-half, |lo| lo.max(-half));
        let hi = exponent_max(self.p).map_or(half, |hi| hi.min(half));
        (lo, hi)
    }

    pub fn contains(&self, x: &FpNumber) -> bool {
        let (lo, hi) = self.window();
        x.precision() == self.p && (x.is_zero() || (lo..hi).contains(&x.exponent()))
    }

    pub fn encode(&self, x: &FpNumber) -> Result<Vec<bool>> {
        if !self.contains(x) {
            return Err(Error::OutOfWindow(format!("{x:?} for p={} with {} exponent bits", self.p, self.exp_bits)));
        }
        let m = x.significand().to_i64().expect("p <= 16");
        let mut bits = twos_complement(m, self.p + 1);
        bits.extend(twos_complement(x.exponent(), self.exp_bits));
        Ok(bits)
    }

    pub fn decode(&self, bits: &[bool]) -> Result<FpNumber> {
        if bits.len() != self.width() {
            return Err(Error::ArityMismatch { expected: self.width(), got: bits.len() });
        }
        let split = self.p as usize + 1;
        let m = from_twos_complement(&bits[..split]);
        let e = from_twos_complement(&bits[split..]);
        Ok(FpNumber::new(BigInt::from(m), e, self.p)?)
    }

    /// Every number the encoding can hold: zero, then by exponent and significand.
    pub fn values(&self) -> Vec<FpNumber> {
        let (lo, hi) = self.window();
        let half = 1i64 << (self.p - 1);
        let mut out = vec![FpNumber::zero(self.p)];
        for e in lo..hi {
            for m in (-2 * half + 1..=-half).chain(half..2 * half) {
                out.push(FpNumber::from_parts(m, e, self.p).expect("normalized and in range"));
            }
        }
        out
    }
}

pub fn twos_complement(v: i64, bits: u32) -> Vec<bool> {
    (0..bits).map(|i| (v >> i.min(63)) & 1 == 1).collect()
}

pub fn from_twos_complement(bits: &[bool]) -> i64 {
    let n = bits.len();
    let raw: i64 = bits.iter().enumerate().map(|(i, &b)| i64::from(b) << i).sum();
    if n > 0 && bits[n - 1] {
        raw - (1i64 << n)
    } else {
        raw
    }
}

/// Result layout: an `ok` bit (0 on overflow) followed by the number in the
/// full-range encoding. Overflowed results are written with an all-zero
/// payload here; circuits leave the payload unspecified.
pub fn encode_result(p: u32, r: &tcbench_core::Result<FpNumber>) -> Result<Vec<bool>> {
    let enc = BitEncoding::full_range(p)?;
    match r {
        Ok(x) => {
            let mut bits = vec![true];
            bits.extend(enc.encode(x)?);
            Ok(bits)
        }
        Err(tcbench_core::Error::Overflow { .. }) => Ok(vec![false; enc.width() + 1]),
        Err(e) => Err(e.clone().into()),
    }
}

pub fn decode_result(p: u32, bits: &[bool]) -> Result<Option<FpNumber>> {
    let enc = BitEncoding::full_range(p)?;
    if bits.len() != enc.width() + 1 {
        return Err(Error::ArityMismatch { expected: enc.width() + 1, got: bits.len() });
    }
    if !bits[0] {
        return Ok(None);
    }
    enc.decode(&bits[1..]).map(Some)
}
