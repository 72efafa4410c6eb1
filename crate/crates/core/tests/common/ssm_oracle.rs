//! Rational reference for the Mamba pieces, written from the defining sums
//! with plain nested vectors.
#![allow(dead_code)]

use num_rational::BigRational as Q;
use num_traits::{One, Signed, Zero};
use tcbench_core::fp::FpMatrix;

pub type Mat = Vec<Vec<Q>>;

pub fn of(m: &FpMatrix) -> Mat {
    let q = m.to_rationals();
    (0..q.rows()).map(|i| q.row(i).to_vec()).collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Q::zero(); c]; r]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            for t in 0..k {
                out[i][j] += &a[i][t] * &b[t][j];
            }
        }
    }
    out
}

pub fn affine(x: &Mat, w: &Mat, b: &Mat) -> Mat {
    let mut out = mul(x, w);
    for row in out.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += &b[0][j];
        }
    }
    out
}

/// Sum of absolute values of the terms behind each entry of `x w + b`.
pub fn affine_mass(x: &Mat, w: &Mat, b: &Mat) -> Mat {
    let ax: Mat = x.iter().map(|r| r.iter().map(Q::abs).collect()).collect();
    let aw: Mat = w.iter().map(|r| r.iter().map(Q::abs).collect()).collect();
    let ab: Mat = b.iter().map(|r| r.iter().map(Q::abs).collect()).collect();
    affine(&ax, &aw, &ab)
}

/// `out[t][n] = sum_k sum_d w[k][d][n] x[t-k][d]`.
pub fn conv1d(x: &Mat, w: &[Mat]) -> Mat {
    let (l, n) = (x.len(), w[0][0].len());
    let mut out = zeros(l, n);
    for t in 0..l {
        for (k, wk) in w.iter().enumerate() {
            if k > t {
                continue;
            }
            for (d, xv) in x[t - k].iter().enumerate() {
                for j in 0..n {
                    out[t][j] += &wk[d][j] * xv;
                }
            }
        }
    }
    out
}

/// `left x right`.
pub fn sandwich(left: &Mat, x: &Mat, right: &Mat) -> Mat {
    mul(&mul(left, x), right)
}

/// Step-by-step `H[t] = A H[t-1] + B x[t]` with a full (not necessarily
/// diagonal) `A`.
pub fn hidden(x: &Mat, a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut prev = vec![Q::zero(); n];
    let mut out = Vec::new();
    for xt in x {
        let next: Vec<Q> = (0..n)
            .map(|i| {
                let ah: Q = (0..n).map(|j| &a[i][j] * &prev[j]).sum();
                let bx: Q = xt.iter().enumerate().map(|(k, v)| &b[i][k] * v).sum();
                ah + bx
            })
            .collect();
        out.push(next.clone());
        prev = next;
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn recurrent(x: &Mat, a: &Mat, b: &Mat, c: &Mat) -> Mat {
    mul(&hidden(x, a, b), &transpose(c))
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

/// `K[k] = C A^k B` by repeated full matrix products.
pub fn kernel(a: &Mat, b: &Mat, c: &Mat, m: usize) -> Vec<Mat> {
    let mut pow = identity(a.len());
    let mut out = Vec::new();
    for _ in 0..m {
        out.push(mul(c, &mul(&pow, b)));
        pow = mul(&pow, a);
    }
    out
}

/// Unrolled closed form `Y[t] = sum_{k<=t} C A^k B x[t-k]`.
pub fn unrolled(x: &Mat, a: &Mat, b: &Mat, c: &Mat) -> Mat {
    let k = kernel(a, b, c, x.len());
    let mut out = zeros(x.len(), c.len());
    for t in 0..x.len() {
        for (s, ks) in k.iter().enumerate().take(t + 1) {
            for (dp, row) in ks.iter().enumerate() {
                for (d, v) in row.iter().enumerate() {
                    out[t][dp] += v * &x[t - s][d];
                }
            }
        }
    }
    out
}

pub fn max_abs(m: &Mat) -> Q {
    m.iter().flatten().map(Q::abs).fold(Q::zero(), |a, b| if b > a { b } else { a })
}
