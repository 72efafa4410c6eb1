//! The Mamba block written once against [`Arith`]. Each function is a
//! reference schedule: the order of primitive calls fixes the traced depth.

use crate::arith::{self, Arith};
use crate::error::{Error, Result};
use crate::fp::{Matrix, Rational};

use num_traits::{One, Zero};

type M<A> = Matrix<<A as Arith>::Value>;

/// Loaded parameters.
#[derive(Clone, Debug)]
pub struct Weights<V> {
    pub w_x_in: Matrix<V>,
    pub b_x_in: Matrix<V>,
    pub w_gate_in: Option<Matrix<V>>,
    pub b_gate_in: Option<Matrix<V>>,
    pub w_conv: Vec<Matrix<V>>,
    pub a: Matrix<V>,
    pub b_base: Matrix<V>,
    pub c_base: Matrix<V>,
    pub w_b: Matrix<V>,
    pub p_b: Matrix<V>,
    pub w_c: Matrix<V>,
    pub p_c: Matrix<V>,
    pub w_delta: Matrix<V>,
    pub p_delta: Matrix<V>,
    pub w_dt: V,
    pub w_x_out: Matrix<V>,
    pub b_x_out: Matrix<V>,
}

#[derive(Clone, Debug)]
pub struct Selected<V> {
    pub b: Matrix<V>,
    pub c: Matrix<V>,
    pub delta: V,
}

#[derive(Clone, Debug)]
pub struct Discrete<V> {
    pub a_bar: Matrix<V>,
    pub b_bar: Matrix<V>,
    pub c_bar: Matrix<V>,
    pub delta: V,
}

fn shape_err(what: &str, got: (usize, usize), want: (usize, usize)) -> Error {
    Error::ShapeMismatch(format!("{what}: got {}x{}, expected {}x{}", got.0, got.1, want.0, want.1))
}

pub(crate) fn expect_shape<V: Clone>(what: &str, m: &Matrix<V>, want: (usize, usize)) -> Result<()> {
    if m.shape() != want {
        return Err(shape_err(what, m.shape(), want));
    }
    Ok(())
}

/// `X W + 1 b`, with the bias folded into the iterated sum of every entry.
pub fn affine<A: Arith>(a: &mut A, x: &M<A>, w: &M<A>, b: &M<A>) -> Result<M<A>> {
    expect_shape("weight", w, (x.cols(), w.cols()))?;
    expect_shape("bias", b, (1, w.cols()))?;
    a.enter();
    let out = Matrix::try_from_fn(x.rows(), w.cols(), |t, j| {
        let mut terms = (0..x.cols()).map(|d| a.mul(x.get(t, d), w.get(d, j))).collect::<Result<Vec<_>>>()?;
        terms.push(b.get(0, j).clone());
        a.iter_add(&terms)
    });
    a.leave();
    out
}

/// `out[t,n] = sum_k sum_d' W[k][d',n] X[t-k,d']`, rows before the start
/// read as zero.
pub fn conv1d<A: Arith>(a: &mut A, x: &M<A>, w: &[M<A>]) -> Result<M<A>> {
    let (l, e) = x.shape();
    if w.is_empty() || w.len() > l {
        return Err(Error::ShapeMismatch(format!("kernel width {} for sequence length {l}", w.len())));
    }
    let n = w[0].cols();
    for wk in w {
        expect_shape("conv kernel slice", wk, (e, n))?;
    }
    a.enter();
    // shifted reads, one per (t, k, d')
    let mut shifted = Vec::with_capacity(l * w.len());
    for t in 0..l {
        for k in 0..w.len() {
            let row = (0..e)
                .map(|d| {
                    let src = t.checked_sub(k).map(|s| x.get(s, d));
                    a.gather(src)
                })
                .collect::<Result<Vec<_>>>()?;
            shifted.push(row);
        }
    }
    let out = Matrix::try_from_fn(l, n, |t, j| {
        let per_k = (0..w.len())
            .map(|k| {
                let row = &shifted[t * w.len() + k];
                let prods = (0..e).map(|d| a.mul(w[k].get(d, j), &row[d])).collect::<Result<Vec<_>>>()?;
                a.iter_add(&prods)
            })
            .collect::<Result<Vec<_>>>()?;
        a.iter_add(&per_k)
    });
    a.leave();
    out
}

/// Elementwise SiLU.
pub fn silu<A: Arith>(a: &mut A, x: &M<A>) -> Result<M<A>> {
    a.enter();
    let out = x.try_map(|v| a.silu(v));
    a.leave();
    out
}

/// `B = W_B X P_B`, `C = W_C X P_C`, `Delta = softplus(w_dt) * (W_Delta X P_Delta)`.
///
/// The weight pairs around `X` are multiplied out ahead of time, so each
/// entry is one layer of scaled reads and one iterated sum. The scalar then
/// goes through replication, the softplus factor and the final product as
/// separate stages.
pub fn select<A: Arith>(a: &mut A, x: &M<A>, w: &Weights<A::Value>) -> Result<Selected<A::Value>> {
    let (l, e) = x.shape();
    let n = w.a.rows();
    expect_shape("W_B", &w.w_b, (n, l))?;
    expect_shape("P_B", &w.p_b, (e, e))?;
    expect_shape("W_C", &w.w_c, (e, l))?;
    expect_shape("P_C", &w.p_c, (e, n))?;
    expect_shape("W_Delta", &w.w_delta, (1, l))?;
    expect_shape("P_Delta", &w.p_delta, (e, 1))?;

    let q = |a: &A, m: &M<A>| m.map(|v| a.to_rational(v));
    let (wb, pb, wc, pc, wd, pd) =
        (q(a, &w.w_b), q(a, &w.p_b), q(a, &w.w_c), q(a, &w.p_c), q(a, &w.w_delta), q(a, &w.p_delta));

    // left[r,t] X[t,d] right[d,c], summed over (t, d)
    let sandwich = |a: &mut A, left: &Matrix<Rational>, right: &Matrix<Rational>, r: usize, c: usize| {
        let mut terms = Vec::with_capacity(l * e);
        for t in 0..l {
            for d in 0..e {
                let k = left.get(r, t) * right.get(d, c);
                terms.push(a.mul_const(x.get(t, d), &k)?);
            }
        }
        a.iter_add(&terms)
    };

    a.enter();
    let b = Matrix::try_from_fn(n, e, |i, k| sandwich(a, &wb, &pb, i, k))?;
    let c = Matrix::try_from_fn(e, n, |d, j| sandwich(a, &wc, &pc, d, j))?;
    let s = sandwich(a, &wd, &pd, 0, 0)?;
    a.barrier();
    let s = a.broadcast(&s);
    a.barrier();
    let tau = a.softplus(&w.w_dt)?;
    a.barrier();
    let delta = a.mul(&tau, &s)?;
    a.leave();
    Ok(Selected { b, c, delta })
}

/// Zero-order-hold discretization of a diagonal `A`:
/// `A_bar = exp(Delta A)`, `B_bar = (Delta A)^-1 (exp(Delta A) - I) Delta B`.
///
/// Staged as: `Delta A` and `Delta B`; `exp`; reciprocal; `exp` again for
/// `exp - I`; the diagonal product; the final matrix product. Inside the
/// singular band the diagonal factor is taken as its limit 1.
pub fn discretize<A: Arith>(a: &mut A, am: &M<A>, b: &M<A>, c: &M<A>, delta: &A::Value) -> Result<Discrete<A::Value>> {
    let n = am.rows();
    expect_shape("A", am, (n, n))?;
    expect_shape("B", b, (n, b.cols()))?;
    expect_shape("C", c, (c.rows(), n))?;
    for i in 0..n {
        for j in 0..n {
            if i != j && !a.is_zero(am.get(i, j)) {
                return Err(Error::InvalidParams(format!("A is not diagonal at ({i},{j})")));
            }
        }
    }
    let zero = a.constant(&Rational::zero())?;
    let one = a.constant(&Rational::one())?;

    a.enter();
    let da = (0..n).map(|i| a.mul(delta, am.get(i, i))).collect::<Result<Vec<_>>>()?;
    let db = b.try_map(|v| a.mul(delta, v))?;
    a.barrier();
    let ea = da.iter().map(|v| a.exp(v)).collect::<Result<Vec<_>>>()?;
    a.barrier();
    let inv = da.iter().map(|v| a.recip_guarded(v)).collect::<Result<Vec<_>>>()?;
    a.barrier();
    let ea2 = da.iter().map(|v| a.exp(v)).collect::<Result<Vec<_>>>()?;
    a.barrier();
    let em1 = ea2.iter().map(|v| a.sub(v, &one)).collect::<Result<Vec<_>>>()?;
    a.barrier();
    let g = (0..n).map(|i| a.mul_guarded(&inv[i], &em1[i], &da[i])).collect::<Result<Vec<_>>>()?;
    a.barrier();
    let gm = Matrix::from_fn(n, n, |i, j| if i == j { g[i].clone() } else { zero.clone() });
    let b_bar = arith::matmul(a, &gm, &db)?;
    a.leave();

    let a_bar = Matrix::from_fn(n, n, |i, j| if i == j { ea[i].clone() } else { zero.clone() });
    Ok(Discrete { a_bar, b_bar, c_bar: c.clone(), delta: delta.clone() })
}

fn check_disc<V: Clone>(x: &Matrix<V>, d: &Discrete<V>) -> Result<(usize, usize)> {
    let n = d.a_bar.rows();
    let e = x.cols();
    expect_shape("A_bar", &d.a_bar, (n, n))?;
    expect_shape("B_bar", &d.b_bar, (n, e))?;
    expect_shape("C_bar", &d.c_bar, (d.c_bar.rows(), n))?;
    Ok((n, e))
}

/// `H[t] = A_bar H[t-1] + B_bar X[t]` from `H[0] = 0`; row `t-1` of the
/// result holds `H[t]`. The previous state enters each step through a
/// loop-carried edge.
pub fn hidden<A: Arith>(a: &mut A, x: &M<A>, d: &Discrete<A::Value>) -> Result<M<A>> {
    let (n, e) = check_disc(x, d)?;
    let l = x.rows();
    a.enter();
    let mut prev: Vec<A::Value> = (0..n).map(|_| a.constant(&Rational::zero())).collect::<Result<_>>()?;
    let mut rows: Vec<A::Value> = Vec::with_capacity(l * n);
    for t in 0..l {
        let h: Vec<A::Value> = prev.iter().map(|v| a.carry(v)).collect();
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let ah = (0..n).map(|j| a.mul(d.a_bar.get(i, j), &h[j])).collect::<Result<Vec<_>>>()?;
            let bx = (0..e).map(|k| a.mul(d.b_bar.get(i, k), x.get(t, k))).collect::<Result<Vec<_>>>()?;
            let s1 = a.iter_add(&ah)?;
            let s2 = a.iter_add(&bx)?;
            next.push(a.add(&s1, &s2)?);
        }
        rows.extend(next.iter().cloned());
        prev = next;
    }
    a.leave();
    Matrix::from_vec(l, n, rows)
}

/// `Y[t] = C_bar H[t]`.
pub fn recurrent<A: Arith>(a: &mut A, x: &M<A>, d: &Discrete<A::Value>) -> Result<M<A>> {
    let h = hidden(a, x, d)?;
    a.enter();
    let y = arith::matmul(a, &h, &d.c_bar.transpose());
    a.leave();
    y
}

/// `K[k][d',d] = sum_i C_bar[d',i] A_bar[i,i]^k B_bar[i,d]` for `k < m`.
///
/// The defining formula indexes the last factor as `B_bar[j,n]`; the free
/// index there is the input feature `d`.
pub fn kernel<A: Arith>(a: &mut A, d: &Discrete<A::Value>, m: usize) -> Result<Vec<M<A>>> {
    let n = d.a_bar.rows();
    expect_shape("A_bar", &d.a_bar, (n, n))?;
    let zero = a.constant(&Rational::zero())?;
    let one = a.constant(&Rational::one())?;
    a.enter();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let pows = (0..n)
            .map(|i| {
                let mut ops = vec![one.clone()];
                ops.extend(std::iter::repeat_n(d.a_bar.get(i, i).clone(), k));
                a.iter_mul(&ops)
            })
            .collect::<Result<Vec<_>>>()?;
        let pk = Matrix::from_fn(n, n, |i, j| if i == j { pows[i].clone() } else { zero.clone() });
        let ab = arith::matmul(a, &pk, &d.b_bar)?;
        out.push(arith::matmul(a, &d.c_bar, &ab)?);
    }
    a.leave();
    Ok(out)
}

/// `Y[t,d'] = sum_k sum_d K[k][d',d] X[t-k,d]` over in-range `t-k`.
pub fn convolve<A: Arith>(a: &mut A, x: &M<A>, kern: &[M<A>]) -> Result<M<A>> {
    let (l, e) = x.shape();
    if kern.len() < l {
        return Err(Error::ShapeMismatch(format!("kernel length {} below sequence length {l}", kern.len())));
    }
    let out_dim = kern[0].rows();
    for kk in kern {
        expect_shape("kernel slice", kk, (out_dim, e))?;
    }
    a.enter();
    let y = Matrix::try_from_fn(l, out_dim, |t, dp| {
        let per_k = (0..=t)
            .map(|k| {
                let prods =
                    (0..e).map(|dd| a.mul(kern[k].get(dp, dd), x.get(t - k, dd))).collect::<Result<Vec<_>>>()?;
                a.iter_add(&prods)
            })
            .collect::<Result<Vec<_>>>()?;
        a.iter_add(&per_k)
    });
    a.leave();
    y
}

/// Convolutional form of the discrete SSM, kernel length equal to `L`.
pub fn convolutional<A: Arith>(a: &mut A, x: &M<A>, d: &Discrete<A::Value>) -> Result<M<A>> {
    check_disc(x, d)?;
    let kern = kernel(a, d, x.rows())?;
    convolve(a, x, &kern)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SsmMode {
    #[default]
    Recurrent,
    Convolution,
}

/// Selection, discretization, then the chosen SSM form.
pub fn selective<A: Arith>(a: &mut A, x: &M<A>, w: &Weights<A::Value>, mode: SsmMode) -> Result<M<A>> {
    let s = select(a, x, w)?;
    let d = discretize(a, &w.a, &s.b, &s.c, &s.delta)?;
    match mode {
        SsmMode::Recurrent => recurrent(a, x, &d),
        SsmMode::Convolution => convolutional(a, x, &d),
    }
}

/// Full block: `out( SSM(silu(conv(in(X)))) * silu(in_gate(X)) )`.
///
/// `gate` replaces the activated gate branch when given.
pub fn forward<A: Arith>(
    a: &mut A,
    x: &M<A>,
    w: &Weights<A::Value>,
    mode: SsmMode,
    gate: Option<&M<A>>,
) -> Result<M<A>> {
    let xp = affine(a, x, &w.w_x_in, &w.b_x_in)?;
    let u = conv1d(a, &xp, &w.w_conv)?;
    let v = silu(a, &u)?;
    let y = selective(a, &v, w, mode)?;
    let g = match gate {
        Some(g) => g.clone(),
        None => {
            let gin = match (&w.w_gate_in, &w.b_gate_in) {
                (None, None) => xp.clone(),
                (gw, gb) => affine(a, x, gw.as_ref().unwrap_or(&w.w_x_in), gb.as_ref().unwrap_or(&w.b_x_in))?,
            };
            silu(a, &gin)?
        }
    };
    a.enter();
    let z = arith::hadamard(a, &y, &g);
    a.leave();
    affine(a, &z?, &w.w_x_out, &w.b_x_out)
}
