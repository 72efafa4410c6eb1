use num_bigint::BigInt;
use rand::Rng;

use super::{discretize, MambaParams, ShapeConfig, SsmDiscrete};
use crate::error::Result;
use crate::fp::{FpMatrix, Matrix, Mode, Rational};

/// Grid step of generated values.
const DENOM: i64 = 256;

fn dyadic<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Rational {
    let (a, b) = ((lo * DENOM as f64).round() as i64, (hi * DENOM as f64).round() as i64);
    Rational::new(BigInt::from(rng.gen_range(a..=b)), BigInt::from(DENOM))
}

fn fill<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64, mode: Mode) -> Result<FpMatrix> {
    let q = Matrix::from_fn(rows, cols, |_, _| dyadic(rng, lo, hi));
    FpMatrix::from_rationals(&q, mode)
}

fn diag<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64, mode: Mode) -> Result<FpMatrix> {
    let d: Vec<Rational> = (0..n).map(|_| dyadic(rng, lo, hi)).collect();
    let q = Matrix::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { Rational::default() });
    FpMatrix::from_rationals(&q, mode)
}

/// Parameters with entries on a 1/256 grid: weights in `[-1, 1]`, stable
/// diagonal `A` in `[-2, -0.1]`, small positive step weights.
pub fn random_params<R: Rng>(s: &ShapeConfig, mode: Mode, rng: &mut R) -> Result<MambaParams> {
    s.validate()?;
    Ok(MambaParams {
        w_x_in: fill(rng, s.d, s.e, -1.0, 1.0, mode)?,
        b_x_in: fill(rng, 1, s.e, -0.5, 0.5, mode)?,
        w_gate_in: None,
        b_gate_in: None,
        w_conv: (0..s.k).map(|_| fill(rng, s.e, s.e, -1.0, 1.0, mode)).collect::<Result<_>>()?,
        a: diag(rng, s.n, -2.0, -0.1, mode)?,
        b_base: fill(rng, s.n, s.e, -1.0, 1.0, mode)?,
        c_base: fill(rng, s.e, s.n, -1.0, 1.0, mode)?,
        w_b: fill(rng, s.n, s.l, -1.0, 1.0, mode)?,
        p_b: fill(rng, s.e, s.e, -1.0, 1.0, mode)?,
        w_c: fill(rng, s.e, s.l, -1.0, 1.0, mode)?,
        p_c: fill(rng, s.e, s.n, -1.0, 1.0, mode)?,
        w_delta: fill(rng, 1, s.l, 0.0, 0.5, mode)?,
        p_delta: fill(rng, s.e, 1, 0.0, 0.5, mode)?,
        w_dt: fill(rng, 1, 1, -1.0, 1.0, mode)?,
        w_x_out: fill(rng, s.e, s.d, -1.0, 1.0, mode)?,
        b_x_out: fill(rng, 1, s.d, -0.5, 0.5, mode)?,
    })
}

/// A discrete SSM and an input, all positive so that both forms sum the same
/// positive terms.
#[derive(Clone, Debug)]
pub struct SsmInstance {
    pub x: FpMatrix,
    pub a: FpMatrix,
    pub b: FpMatrix,
    pub c: FpMatrix,
    pub delta: FpMatrix,
}

impl SsmInstance {
    pub fn discrete(&self) -> Result<SsmDiscrete> {
        discretize(&self.a, &self.b, &self.c, &self.delta)
    }

    pub fn convert(&self, mode: Mode) -> Result<Self> {
        Ok(Self {
            x: self.x.convert(mode)?,
            a: self.a.convert(mode)?,
            b: self.b.convert(mode)?,
            c: self.c.convert(mode)?,
            delta: self.delta.convert(mode)?,
        })
    }
}

/// `A_ii` in `[-2, -0.1]`; `B`, `C`, `X` in `[0.1, 1]`; `Delta` in `[0.05, 1]`.
pub fn random_ssm<R: Rng>(l: usize, e: usize, n: usize, mode: Mode, rng: &mut R) -> Result<SsmInstance> {
    Ok(SsmInstance {
        x: fill(rng, l, e, 0.1, 1.0, mode)?,
        a: diag(rng, n, -2.0, -0.1, mode)?,
        b: fill(rng, n, e, 0.1, 1.0, mode)?,
        c: fill(rng, e, n, 0.1, 1.0, mode)?,
        delta: fill(rng, 1, 1, 0.05, 1.0, mode)?,
    })
}

/// An `rows x cols` activation with entries in `[-1, 1]`.
pub fn random_input<R: Rng>(rows: usize, cols: usize, mode: Mode, rng: &mut R) -> Result<FpMatrix> {
    fill(rng, rows, cols, -1.0, 1.0, mode)
}
