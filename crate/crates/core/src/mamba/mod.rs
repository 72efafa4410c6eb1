//! Mamba block over [`FpMatrix`]: projections, causal 1-D convolution,
//! selection, discretization, and the recurrent and convolutional SSM forms.
//!
//! The inner width `E` is used for both the projection output and the
//! convolution channels. `Delta` is one scalar per sequence.

mod random;
pub mod schedule;

pub use random::{random_input, random_params, random_ssm, SsmInstance};
pub use schedule::SsmMode;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{lift, lower, Arith, Exact, PBit};
use crate::error::{Error, Result};
use crate::fp::{FpMatrix, Matrix, Mode};
use schedule::{Discrete, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShapeConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "E")]
    pub e: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

impl ShapeConfig {
    pub fn new(l: usize, d: usize, e: usize, n: usize, k: usize) -> Result<Self> {
        let s = Self { l, d, e, n, k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.l, self.d, self.e, self.n, self.k].contains(&0) {
            return Err(Error::InvalidParams(format!("every dimension must be positive: {self:?}")));
        }
        if self.k > self.l {
            return Err(Error::InvalidParams(format!("kernel width {} exceeds length {}", self.k, self.l)));
        }
        Ok(())
    }

    /// SSM kernel length.
    pub fn m(&self) -> usize {
        self.l
    }

    /// Parses `L,D,E,n,K`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParams(format!("bad shape {s:?}, expected L,D,E,n,K")))?;
        match v[..] {
            [l, d, e, n, k] => Self::new(l, d, e, n, k),
            _ => Err(Error::InvalidParams(format!("bad shape {s:?}, expected L,D,E,n,K"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MambaParams {
    pub w_x_in: FpMatrix,
    pub b_x_in: FpMatrix,
    /// Separate gate-branch projection; `None` shares the input projection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_gate_in: Option<FpMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_gate_in: Option<FpMatrix>,
    /// Slice `k` is `W[k, d', n]`.
    pub w_conv: Vec<FpMatrix>,
    pub a: FpMatrix,
    /// Time-invariant `B` and `C`, for running the SSM without selection.
    pub b_base: FpMatrix,
    pub c_base: FpMatrix,
    pub w_b: FpMatrix,
    pub p_b: FpMatrix,
    pub w_c: FpMatrix,
    pub p_c: FpMatrix,
    pub w_delta: FpMatrix,
    pub p_delta: FpMatrix,
    /// 1x1.
    pub w_dt: FpMatrix,
    pub w_x_out: FpMatrix,
    pub b_x_out: FpMatrix,
}

impl MambaParams {
    pub fn zeros(s: &ShapeConfig, mode: Mode) -> Self {
        let z = |r, c| FpMatrix::zeros(r, c, mode);
        Self {
            w_x_in: z(s.d, s.e),
            b_x_in: z(1, s.e),
            w_gate_in: None,
            b_gate_in: None,
            w_conv: (0..s.k).map(|_| z(s.e, s.e)).collect(),
            a: z(s.n, s.n),
            b_base: z(s.n, s.e),
            c_base: z(s.e, s.n),
            w_b: z(s.n, s.l),
            p_b: z(s.e, s.e),
            w_c: z(s.e, s.l),
            p_c: z(s.e, s.n),
            w_delta: z(1, s.l),
            p_delta: z(s.e, 1),
            w_dt: z(1, 1),
            w_x_out: z(s.e, s.d),
            b_x_out: z(1, s.d),
        }
    }

    fn all(&self) -> Vec<(&'static str, &FpMatrix)> {
        let mut v = vec![
            ("w_x_in", &self.w_x_in),
            ("b_x_in", &self.b_x_in),
            ("a", &self.a),
            ("b_base", &self.b_base),
            ("c_base", &self.c_base),
            ("w_b", &self.w_b),
            ("p_b", &self.p_b),
            ("w_c", &self.w_c),
            ("p_c", &self.p_c),
            ("w_delta", &self.w_delta),
            ("p_delta", &self.p_delta),
            ("w_dt", &self.w_dt),
            ("w_x_out", &self.w_x_out),
            ("b_x_out", &self.b_x_out),
        ];
        v.extend(self.w_gate_in.iter().map(|m| ("w_gate_in", m)));
        v.extend(self.b_gate_in.iter().map(|m| ("b_gate_in", m)));
        v.extend(self.w_conv.iter().map(|m| ("w_conv", m)));
        v
    }

    pub fn mode(&self) -> Mode {
        self.w_x_in.mode()
    }

    /// Converts every tensor to another mode.
    pub fn convert(&self, mode: Mode) -> Result<Self> {
        let c = |m: &FpMatrix| m.convert(mode);
        Ok(Self {
            w_x_in: c(&self.w_x_in)?,
            b_x_in: c(&self.b_x_in)?,
            w_gate_in: self.w_gate_in.as_ref().map(c).transpose()?,
            b_gate_in: self.b_gate_in.as_ref().map(c).transpose()?,
            w_conv: self.w_conv.iter().map(c).collect::<Result<_>>()?,
            a: c(&self.a)?,
            b_base: c(&self.b_base)?,
            c_base: c(&self.c_base)?,
            w_b: c(&self.w_b)?,
            p_b: c(&self.p_b)?,
            w_c: c(&self.w_c)?,
            p_c: c(&self.p_c)?,
            w_delta: c(&self.w_delta)?,
            p_delta: c(&self.p_delta)?,
            w_dt: c(&self.w_dt)?,
            w_x_out: c(&self.w_x_out)?,
            b_x_out: c(&self.b_x_out)?,
        })
    }

    /// Recovers the shape from the tensors and checks that everything
    /// conforms: dimensions, one numeric mode, diagonal `A`.
    pub fn shape(&self) -> Result<ShapeConfig> {
        let (d, e) = self.w_x_in.shape();
        let n = self.a.rows();
        let l = self.w_b.cols();
        let s = ShapeConfig::new(l, d, e, n, self.w_conv.len())?;
        let mode = self.mode();
        for (name, m) in self.all() {
            if m.mode() != mode {
                return Err(Error::ModeMismatch(format!("{name} is {:?}, expected {mode:?}", m.mode())));
            }
        }
        let want = |name: &str, m: &FpMatrix, r: usize, c: usize| {
            if m.shape() != (r, c) {
                return Err(Error::ShapeMismatch(format!("{name}: got {:?}, expected {r}x{c}", m.shape())));
            }
            Ok(())
        };
        want("b_x_in", &self.b_x_in, 1, e)?;
        if let Some(m) = &self.w_gate_in {
            want("w_gate_in", m, d, e)?;
        }
        if let Some(m) = &self.b_gate_in {
            want("b_gate_in", m, 1, e)?;
        }
        for m in &self.w_conv {
            want("w_conv", m, e, e)?;
        }
        want("a", &self.a, n, n)?;
        want("b_base", &self.b_base, n, e)?;
        want("c_base", &self.c_base, e, n)?;
        want("w_b", &self.w_b, n, l)?;
        want("p_b", &self.p_b, e, e)?;
        want("w_c", &self.w_c, e, l)?;
        want("p_c", &self.p_c, e, n)?;
        want("w_delta", &self.w_delta, 1, l)?;
        want("p_delta", &self.p_delta, e, 1)?;
        want("w_dt", &self.w_dt, 1, 1)?;
        want("w_x_out", &self.w_x_out, e, d)?;
        want("b_x_out", &self.b_x_out, 1, d)?;
        check_diagonal(&self.a)?;
        Ok(s)
    }

    pub fn load<A: Arith>(&self, a: &mut A) -> Result<Weights<A::Value>> {
        let mut l = |m: &FpMatrix| lift(a, m);
        Ok(Weights {
            w_x_in: l(&self.w_x_in)?,
            b_x_in: l(&self.b_x_in)?,
            w_gate_in: self.w_gate_in.as_ref().map(&mut l).transpose()?,
            b_gate_in: self.b_gate_in.as_ref().map(&mut l).transpose()?,
            w_conv: self.w_conv.iter().map(&mut l).collect::<Result<_>>()?,
            a: l(&self.a)?,
            b_base: l(&self.b_base)?,
            c_base: l(&self.c_base)?,
            w_b: l(&self.w_b)?,
            p_b: l(&self.p_b)?,
            w_c: l(&self.w_c)?,
            p_c: l(&self.p_c)?,
            w_delta: l(&self.w_delta)?,
            p_delta: l(&self.p_delta)?,
            w_dt: l(&self.w_dt)?.get(0, 0).clone(),
            w_x_out: l(&self.w_x_out)?,
            b_x_out: l(&self.b_x_out)?,
        })
    }
}

fn check_diagonal(a: &FpMatrix) -> Result<()> {
    let q = a.to_rationals();
    for i in 0..q.rows() {
        for j in 0..q.cols() {
            if i != j && !q.get(i, j).is_zero() {
                return Err(Error::InvalidParams(format!("A is not diagonal at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Model file contents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub shape: ShapeConfig,
    pub params: MambaParams,
}

impl Model {
    pub fn new(params: MambaParams) -> Result<Self> {
        Ok(Self { shape: params.shape()?, params })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Model = serde_json::from_str(s).map_err(|e| Error::InvalidParams(format!("model file: {e}")))?;
        if m.params.shape()? != m.shape {
            return Err(Error::ShapeMismatch("declared shape differs from the tensors".into()));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Selection output: `B` is n x E, `C` is E x n, `delta` is 1x1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub b: FpMatrix,
    pub c: FpMatrix,
    pub delta: FpMatrix,
}

/// Discretized SSM: `A_bar` diagonal n x n, `B_bar` n x E, `C_bar` E x n,
/// `delta` 1x1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsmDiscrete {
    pub a_bar: FpMatrix,
    pub b_bar: FpMatrix,
    pub c_bar: FpMatrix,
    pub delta: FpMatrix,
}

impl SsmDiscrete {
    fn load<A: Arith>(&self, a: &mut A) -> Result<Discrete<A::Value>> {
        Ok(Discrete {
            a_bar: lift(a, &self.a_bar)?,
            b_bar: lift(a, &self.b_bar)?,
            c_bar: lift(a, &self.c_bar)?,
            delta: lift(a, &self.delta)?.get(0, 0).clone(),
        })
    }

    fn store<A: Arith>(a: &A, d: &Discrete<A::Value>, mode: Mode) -> Result<Self> {
        Ok(Self {
            a_bar: lower(a, &d.a_bar, mode)?,
            b_bar: lower(a, &d.b_bar, mode)?,
            c_bar: lower(a, &d.c_bar, mode)?,
            delta: lower(a, &Matrix::filled(1, 1, d.delta.clone()), mode)?,
        })
    }

    pub fn mode(&self) -> Mode {
        self.a_bar.mode()
    }
}

/// Runs `$body` with `$a` bound to the backend for `$mode`.
macro_rules! with_backend {
    ($mode:expr, |$a:ident| $body:expr) => {
        match $mode {
            Mode::PBit(p) => {
                let $a = &mut PBit::new(p);
                $body
            }
            Mode::ExactRational => {
                let $a = &mut Exact;
                $body
            }
        }
    };
}

fn same_mode(ms: &[&FpMatrix]) -> Result<Mode> {
    let mode = ms[0].mode();
    if let Some(m) = ms.iter().find(|m| m.mode() != mode) {
        return Err(Error::ModeMismatch(format!("{:?} vs {mode:?}", m.mode())));
    }
    Ok(mode)
}

fn with_params(x: &FpMatrix, params: &MambaParams) -> Result<(Mode, ShapeConfig)> {
    let s = params.shape()?;
    let mode = same_mode(&[x, &params.w_x_in])?;
    Ok((mode, s))
}

/// `X W_x + 1 b_x`.
pub fn input_projection(x: &FpMatrix, params: &MambaParams) -> Result<FpMatrix> {
    let (mode, _) = with_params(x, params)?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let (w, b) = (lift(a, &params.w_x_in)?, lift(a, &params.b_x_in)?);
        {
            let r = schedule::affine(a, &xv, &w, &b)?;
            lower(a, &r, mode)
        }
    })
}

/// `Z W_out + 1 b_out`.
pub fn output_projection(z: &FpMatrix, params: &MambaParams) -> Result<FpMatrix> {
    let mode = same_mode(&[z, &params.w_x_out, &params.b_x_out])?;
    with_backend!(mode, |a| {
        let zv = lift(a, z)?;
        let (w, b) = (lift(a, &params.w_x_out)?, lift(a, &params.b_x_out)?);
        {
            let r = schedule::affine(a, &zv, &w, &b)?;
            lower(a, &r, mode)
        }
    })
}

/// Causal 1-D convolution with zero padding; `w[k]` is the `E x E` slice.
pub fn conv1d(x: &FpMatrix, w: &[FpMatrix]) -> Result<FpMatrix> {
    let mut all = vec![x];
    all.extend(w.iter());
    let mode = same_mode(&all)?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let wv = w.iter().map(|m| lift(a, m)).collect::<Result<Vec<_>>>()?;
        {
            let r = schedule::conv1d(a, &xv, &wv)?;
            lower(a, &r, mode)
        }
    })
}

/// Elementwise SiLU.
pub fn silu(x: &FpMatrix) -> Result<FpMatrix> {
    let mode = x.mode();
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let r = schedule::silu(a, &xv)?;
        lower(a, &r, mode)
    })
}

pub fn select_params(x: &FpMatrix, params: &MambaParams) -> Result<Selection> {
    let mode = same_mode(&[x, &params.w_b])?;
    params.shape()?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let w = params.load(a)?;
        let s = schedule::select(a, &xv, &w)?;
        Ok(Selection {
            b: lower(a, &s.b, mode)?,
            c: lower(a, &s.c, mode)?,
            delta: lower(a, &Matrix::filled(1, 1, s.delta), mode)?,
        })
    })
}

/// `delta` is a 1x1 matrix.
pub fn discretize(am: &FpMatrix, b: &FpMatrix, c: &FpMatrix, delta: &FpMatrix) -> Result<SsmDiscrete> {
    let mode = same_mode(&[am, b, c, delta])?;
    if delta.shape() != (1, 1) {
        return Err(Error::ShapeMismatch(format!("delta must be 1x1, got {:?}", delta.shape())));
    }
    with_backend!(mode, |a| {
        let (av, bv, cv) = (lift(a, am)?, lift(a, b)?, lift(a, c)?);
        let dv = lift(a, delta)?.get(0, 0).clone();
        let d = schedule::discretize(a, &av, &bv, &cv, &dv)?;
        SsmDiscrete::store(a, &d, mode)
    })
}

pub fn hidden_recurrence(x: &FpMatrix, disc: &SsmDiscrete) -> Result<FpMatrix> {
    let mode = same_mode(&[x, &disc.a_bar, &disc.b_bar, &disc.c_bar])?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let d = disc.load(a)?;
        {
            let r = schedule::hidden(a, &xv, &d)?;
            lower(a, &r, mode)
        }
    })
}

pub fn ssm_recurrent(x: &FpMatrix, disc: &SsmDiscrete) -> Result<FpMatrix> {
    let mode = same_mode(&[x, &disc.a_bar, &disc.b_bar, &disc.c_bar])?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let d = disc.load(a)?;
        {
            let r = schedule::recurrent(a, &xv, &d)?;
            lower(a, &r, mode)
        }
    })
}

/// Kernel slices `K[k]` (E x E) for `k < m`.
pub fn conv_kernel(disc: &SsmDiscrete, m: usize) -> Result<Vec<FpMatrix>> {
    let mode = disc.mode();
    with_backend!(mode, |a| {
        let d = disc.load(a)?;
        let k = schedule::kernel(a, &d, m)?;
        k.iter().map(|s| lower(a, s, mode)).collect()
    })
}

pub fn ssm_convolution(x: &FpMatrix, disc: &SsmDiscrete) -> Result<FpMatrix> {
    let mode = same_mode(&[x, &disc.a_bar, &disc.b_bar, &disc.c_bar])?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let d = disc.load(a)?;
        {
            let r = schedule::convolutional(a, &xv, &d)?;
            lower(a, &r, mode)
        }
    })
}

pub fn ssm_select(x: &FpMatrix, params: &MambaParams, ssm: SsmMode) -> Result<FpMatrix> {
    let mode = same_mode(&[x, &params.w_b])?;
    params.shape()?;
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let w = params.load(a)?;
        {
            let r = schedule::selective(a, &xv, &w, ssm)?;
            lower(a, &r, mode)
        }
    })
}

#[derive(Clone, Debug, Default)]
pub struct ForwardOptions {
    pub ssm: SsmMode,
    /// Replaces the activated gate branch (L x E).
    pub gate_override: Option<FpMatrix>,
}

pub fn mamba_forward(x: &FpMatrix, params: &MambaParams) -> Result<FpMatrix> {
    mamba_forward_with(x, params, &ForwardOptions::default())
}

pub fn mamba_forward_with(x: &FpMatrix, params: &MambaParams, opts: &ForwardOptions) -> Result<FpMatrix> {
    let (mode, s) = with_params(x, params)?;
    if x.shape() != (s.l, s.d) {
        return Err(Error::ShapeMismatch(format!("input {:?}, model expects {}x{}", x.shape(), s.l, s.d)));
    }
    if let Some(g) = &opts.gate_override {
        if g.shape() != (s.l, s.e) {
            return Err(Error::ShapeMismatch(format!("gate {:?}, expected {}x{}", g.shape(), s.l, s.e)));
        }
    }
    with_backend!(mode, |a| {
        let xv = lift(a, x)?;
        let w = params.load(a)?;
        let g = opts.gate_override.as_ref().map(|g| lift(a, g)).transpose()?;
        {
            let r = schedule::forward(a, &xv, &w, opts.ssm, g.as_ref())?;
            lower(a, &r, mode)
        }
    })
}
