//! Gate-level circuits for p-bit float compare, add, multiply and iterated
//! addition, matching `tcbench_core::fp` bit for bit on encoded inputs.
//!
//! Every primitive is a fixed stack of constant-depth blocks: exponent
//! decoding into one-hot case wires, shifting by selection, column-count
//! addition, sign/magnitude conversion and one rounding block. The exponent
//! window and operand count only change fan-in and gate counts.

use std::fmt;
use std::str::FromStr;

use tcbench_core::fp::{fp_add, fp_le, fp_mul, iter_add, FpNumber};

use crate::builder::Builder;
use crate::encoding::{encode_result, BitEncoding};
use crate::error::{Error, Result};
use crate::ir::Circuit;

pub const MAX_PRECISION: u32 = 8;
pub const MAX_OPERANDS: usize = 64;
/// Depth of every synthesized comparator with at least two exponent bits
/// (a one-bit window has no exponent gap to decode and is shallower).
pub const COMPARE_DEPTH: usize = 23;
/// Column-count rounds used by iterated addition: 64 rows become 7, then 3, then 2.
const ITER_ADD_ROUNDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    /// Outputs `[a <= b, b <= a]` under the definitional comparison.
    Compare,
    Add,
    Mul,
    /// Exact sum of `m` operands, rounded once.
    IterAdd(usize),
}

impl Primitive {
    pub fn arity(&self) -> usize {
        match self {
            Primitive::IterAdd(m) => *m,
            _ => 2,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Primitive::Compare => "compare".into(),
            Primitive::Add => "add".into(),
            Primitive::Mul => "mul".into(),
            Primitive::IterAdd(m) => format!("iter_add({m})"),
        }
    }

    /// Expected output bits, computed with the float library.
    pub fn reference(&self, operands: &[FpNumber]) -> Result<Vec<bool>> {
        if operands.len() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), got: operands.len() });
        }
        let p = operands[0].precision();
        match self {
            Primitive::Compare => Ok(vec![fp_le(&operands[0], &operands[1])?, fp_le(&operands[1], &operands[0])?]),
            Primitive::Add => encode_result(p, &fp_add(&operands[0], &operands[1])),
            Primitive::Mul => encode_result(p, &fp_mul(&operands[0], &operands[1])),
            Primitive::IterAdd(_) => encode_result(p, &iter_add(operands)),
        }
    }
}

impl Primitive {
    /// Output agreement; an overflow flag in `want` makes the payload a don't-care.
    pub fn outputs_agree(&self, got: &[bool], want: &[bool]) -> bool {
        match self {
            Primitive::Compare => got == want,
            _ if !want.is_empty() && !want[0] => got.first() == Some(&false),
            _ => got == want,
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Primitive {
    type Err = String;

    /// `compare`, `add`, `mul`, or `iter_add` with an operand count as `iter_add:16`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "compare" => Ok(Primitive::Compare),
            "add" => Ok(Primitive::Add),
            "mul" => Ok(Primitive::Mul),
            _ => {
                let m = s
                    .strip_prefix("iter_add")
                    .map(|r| r.trim_start_matches([':', '(']).trim_end_matches(')'))
                    .ok_or_else(|| format!("unknown primitive `{s}`"))?;
                m.parse().map(Primitive::IterAdd).map_err(|_| format!("bad operand count in `{s}`"))
            }
        }
    }
}

/// Input bits for a list of operands, concatenated in order.
pub fn encode_operands(enc: &BitEncoding, operands: &[FpNumber]) -> Result<Vec<bool>> {
    let mut bits = Vec::with_capacity(enc.width() * operands.len());
    for x in operands {
        bits.extend(enc.encode(x)?);
    }
    Ok(bits)
}

pub fn synthesize(prim: Primitive, enc: &BitEncoding) -> Result<Circuit> {
    if enc.p > MAX_PRECISION {
        return Err(Error::UnsupportedPrecision(enc.p));
    }
    // keeps every result above the underflow threshold
    if enc.exp_bits > enc.p {
        return Err(Error::UnsupportedWindow { bits: enc.exp_bits, p: enc.p });
    }
    if let Primitive::IterAdd(m) = prim {
        if !(2..=MAX_OPERANDS).contains(&m) {
            return Err(Error::UnsupportedSize(m));
        }
    }
    let mut b = Builder::new();
    let ops: Vec<Operand> = (0..prim.arity()).map(|_| Operand::new(&mut b, enc)).collect();
    let outputs = match prim {
        Primitive::Compare => compare(&mut b, enc, &ops[0], &ops[1]),
        Primitive::Add => add(&mut b, enc, &ops[0], &ops[1]),
        Primitive::Mul => mul(&mut b, enc, &ops[0], &ops[1]),
        Primitive::IterAdd(_) => sum(&mut b, enc, &ops),
    };
    Ok(b.finish(outputs))
}

struct Operand {
    m: Vec<usize>,
    e: Vec<usize>,
}

impl Operand {
    fn new(b: &mut Builder, enc: &BitEncoding) -> Self {
        let m = b.inputs(enc.p as usize + 1);
        let e = b.inputs(enc.exp_bits as usize);
        Operand { m, e }
    }

    /// Significand bit `t` of the sign-extended value; below 0 is 0.
    fn bit(&self, b: &mut Builder, t: i64) -> usize {
        if t < 0 {
            b.zero()
        } else {
            self.m[(t as usize).min(self.m.len() - 1)]
        }
    }
}

/// Which operand is aligned as the larger one, the clamped exponent gap and
/// the larger exponent, as one-hot case wires.
struct Alignment {
    /// `by_gap[side][d]`, side 0 when `a` is the larger operand.
    by_gap: [Vec<usize>; 2],
    side: [usize; 2],
    /// `(exponent of the aligned sum's unit, wire)`
    bases: Vec<(i64, usize)>,
    gap: usize,
}

impl Alignment {
    /// A zero operand is placed as the smaller one at the largest gap, where
    /// it contributes nothing.
    fn new(b: &mut Builder, p: u32, a: &Operand, c: &Operand) -> Self {
        let gap = p as usize + 3;
        let nz = [b.or(&a.m), b.or(&c.m)];
        let z = [b.not(nz[0]), b.not(nz[1])];
        let ea = b.decode_signed(&a.e);
        let ec = b.decode_signed(&c.e);
        let mut cases: Vec<(usize, usize, i64, usize)> = Vec::new();
        for &(u, wu) in &ea {
            for &(v, wv) in &ec {
                let w = b.and(&[nz[0], nz[1], wu, wv]);
                let (side, d, big) = if u >= v { (0, u - v, u) } else { (1, v - u, v) };
                cases.push((side, (d as usize).min(gap), big, w));
            }
        }
        for &(v, wv) in &ec {
            let w = b.and(&[z[0], nz[1], wv]);
            cases.push((1, gap, v, w));
        }
        for &(u, wu) in &ea {
            let w = b.and2(z[1], wu);
            cases.push((0, gap, u, w));
        }
        let by_gap = [0, 1].map(|s| {
            (0..=gap)
                .map(|d| {
                    let ws: Vec<usize> = cases.iter().filter(|c| c.0 == s && c.1 == d).map(|c| c.3).collect();
                    b.or(&ws)
                })
                .collect::<Vec<_>>()
        });
        let side = [0, 1].map(|s| b.or(&by_gap[s]));
        let mut units: Vec<i64> = cases.iter().map(|c| c.2 - c.1 as i64 - 3).collect();
        units.sort_unstable();
        units.dedup();
        let bases = units
            .into_iter()
            .map(|t| {
                let ws: Vec<usize> = cases.iter().filter(|c| c.2 - c.1 as i64 - 3 == t).map(|c| c.3).collect();
                (t, b.or(&ws))
            })
            .collect();
        Alignment { by_gap, side, bases, gap }
    }

    /// Two's complement width holding every aligned sum.
    fn width(&self, p: u32) -> usize {
        p as usize + self.gap + 5
    }

    /// Rows `big * 2^(d+3)`, `small * 8` and the inexact-quarter offset `2^d`.
    fn rows(&self, b: &mut Builder, p: u32, a: &Operand, c: &Operand) -> [Vec<usize>; 3] {
        let w = self.width(p);
        let pair = [(a, c), (c, a)];
        let big = (0..w as i64)
            .map(|j| {
                let mut terms = Vec::new();
                for (s, (hi, _)) in pair.iter().enumerate() {
                    for d in 0..=self.gap {
                        let bit = hi.bit(b, j - d as i64 - 3);
                        terms.push(b.and2(self.by_gap[s][d], bit));
                    }
                }
                b.or(&terms)
            })
            .collect();
        let small = (0..w as i64)
            .map(|j| {
                let mut terms = Vec::new();
                for (s, (_, lo)) in pair.iter().enumerate() {
                    let bit = lo.bit(b, j - 3);
                    terms.push(b.and2(self.side[s], bit));
                }
                b.or(&terms)
            })
            .collect();
        // m / 2^d is a multiple of 1/4 iff its low d-2 bits are zero
        let offset = (0..w)
            .map(|j| {
                if j < 3 || j > self.gap {
                    return b.zero();
                }
                let mut terms = Vec::new();
                for (s, (_, lo)) in pair.iter().enumerate() {
                    let inexact = b.or(&lo.m[..j - 2]);
                    terms.push(b.and2(self.by_gap[s][j], inexact));
                }
                b.or(&terms)
            })
            .collect();
        [big, small, offset]
    }
}

fn compare(b: &mut Builder, enc: &BitEncoding, a: &Operand, c: &Operand) -> Vec<usize> {
    let al = Alignment::new(b, enc.p, a, c);
    let w = al.width(enc.p);
    let [big, small, offset] = al.rows(b, enc.p, a, c);
    let rhs = b.add_rows(&[small, offset], w, None);
    let big_le = b.le_signed(&big, &rhs);
    let rhs_le = b.le_signed(&rhs, &big);
    let pick = |b: &mut Builder, when_a: usize, when_c: usize| {
        let x = b.and2(al.side[0], when_a);
        let y = b.and2(al.side[1], when_c);
        b.or2(x, y)
    };
    let ab = pick(b, big_le, rhs_le);
    let ba = pick(b, rhs_le, big_le);
    vec![ab, ba]
}

fn add(b: &mut Builder, enc: &BitEncoding, a: &Operand, c: &Operand) -> Vec<usize> {
    let al = Alignment::new(b, enc.p, a, c);
    let w = al.width(enc.p);
    let rows = al.rows(b, enc.p, a, c);
    let s = b.add_rows(&rows, w, None);
    let (sign, mag) = sign_magnitude(b, &s);
    round(b, enc.p, sign, &mag, &al.bases)
}

fn mul(b: &mut Builder, enc: &BitEncoding, a: &Operand, c: &Operand) -> Vec<usize> {
    let p = enc.p as usize;
    let (sa, ma) = sign_magnitude(b, &a.m);
    let (sc, mc) = sign_magnitude(b, &c.m);
    let w = 2 * p + 1;
    let rows: Vec<Vec<usize>> = (0..p)
        .map(|j| {
            let mut row = vec![b.zero(); j];
            row.extend(ma.iter().map(|&x| b.and2(x, mc[j])));
            row
        })
        .collect();
    let prod = b.add_rows(&rows, w, None);
    let sign = b.xor(sa, sc);
    let ea = b.decode_signed(&a.e);
    let ec = b.decode_signed(&c.e);
    let mut by_sum: Vec<(i64, Vec<usize>)> = Vec::new();
    for &(u, wu) in &ea {
        for &(v, wv) in &ec {
            let w = b.and2(wu, wv);
            match by_sum.iter_mut().find(|(t, _)| *t == u + v) {
                Some((_, ws)) => ws.push(w),
                None => by_sum.push((u + v, vec![w])),
            }
        }
    }
    let bases: Vec<(i64, usize)> = by_sum.into_iter().map(|(t, ws)| (t, b.or(&ws))).collect();
    round(b, enc.p, sign, &prod[..2 * p], &bases)
}

fn sum(b: &mut Builder, enc: &BitEncoding, ops: &[Operand]) -> Vec<usize> {
    let (lo, hi) = enc.window();
    let span = (hi - lo - 1) as u32;
    let bound = (ops.len() as u64 * ((1u64 << enc.p) - 1)) << span;
    let w = (u64::BITS - bound.leading_zeros()) as usize + 1;
    let rows: Vec<Vec<usize>> = ops
        .iter()
        .map(|op| {
            let exps = b.decode_signed(&op.e);
            (0..w as i64)
                .map(|j| {
                    let terms: Vec<usize> = exps
                        .iter()
                        .map(|&(u, wu)| {
                            let bit = op.bit(b, j - (u - lo));
                            b.and2(wu, bit)
                        })
                        .collect();
                    b.or(&terms)
                })
                .collect()
        })
        .collect();
    let s = b.add_rows(&rows, w, Some(ITER_ADD_ROUNDS));
    let (sign, mag) = sign_magnitude(b, &s);
    let one = b.one();
    round(b, enc.p, sign, &mag, &[(lo, one)])
}

/// Sign bit and magnitude of a two's complement value (magnitude one bit narrower).
fn sign_magnitude(b: &mut Builder, x: &[usize]) -> (usize, Vec<usize>) {
    let sign = x[x.len() - 1];
    let mut mag = b.negate_if(sign, x);
    mag.pop();
    (sign, mag)
}

/// Rounds `(-1)^sign * mag * 2^t` to p bits, with `t` given one-hot by
/// `bases`. Outputs `[ok, significand (p+1), exponent (p+1)]`.
fn round(b: &mut Builder, p: u32, sign: usize, mag: &[usize], bases: &[(i64, usize)]) -> Vec<usize> {
    let pu = p as usize;
    let w = mag.len();
    let lead: Vec<usize> = (0..w)
        .map(|k| {
            let above = b.or(&mag[k + 1..]);
            let clear = b.not(above);
            b.and2(mag[k], clear)
        })
        .collect();
    // bit at offset `off` from the leading one
    let select = |b: &mut Builder, off: i64| {
        let terms: Vec<usize> = (0..w)
            .filter_map(|k| {
                let i = k as i64 + off;
                (0..w as i64).contains(&i).then(|| b.and2(lead[k], mag[i as usize]))
            })
            .collect();
        b.or(&terms)
    };
    let kept: Vec<usize> = (0..pu).map(|i| select(b, i as i64 - (pu as i64 - 1))).collect();
    let guard = select(b, -(pu as i64));
    let sticky_terms: Vec<usize> = (pu + 1..w)
        .map(|k| {
            let low = b.or(&mag[..k - pu]);
            b.and2(lead[k], low)
        })
        .collect();
    let sticky = b.or(&sticky_terms);
    let tie_break = b.or2(sticky, kept[0]);
    let up = b.and2(guard, tie_break);
    let mut rounded: Vec<usize> = (0..pu)
        .map(|i| {
            let mut t = vec![up];
            t.extend_from_slice(&kept[..i]);
            let flip = b.and(&t);
            b.xor(kept[i], flip)
        })
        .collect();
    let mut all = vec![up];
    all.extend_from_slice(&kept);
    let carry = b.and(&all);
    // rounding up past 2^p - 1 gives 2^(p-1) one exponent higher
    rounded[pu - 1] = b.or2(rounded[pu - 1], carry);

    let nonzero = b.or(mag);
    let mut significand = b.negate_if(sign, &rounded);
    significand.push(b.and2(sign, nonzero));

    let no_carry = b.not(carry);
    let lo = -(1i64 << p);
    let hi = 1i64 << p;
    let mut exp_terms: Vec<Vec<usize>> = vec![Vec::new(); pu + 1];
    let mut overflow = Vec::new();
    for &(t, bw) in bases {
        for (k, &lk) in lead.iter().enumerate() {
            for (c, cw) in [(0, no_carry), (1, carry)] {
                let e = t + k as i64 - (pu as i64 - 1) + c;
                let g = b.and(&[bw, lk, cw]);
                if !(lo..hi).contains(&e) {
                    overflow.push(g);
                    continue;
                }
                for (o, terms) in exp_terms.iter_mut().enumerate() {
                    if (e >> o) & 1 == 1 {
                        terms.push(g);
                    }
                }
            }
        }
    }
    let over = b.or(&overflow);
    let ok = b.not(over);
    let mut out = vec![ok];
    out.extend(significand);
    for terms in exp_terms {
        out.push(b.or(&terms));
    }
    out
}
