//! Traced depth of every Mamba component over a grid of shapes, checked
//! against the stated formulas.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{self, lift, Arith};
use crate::error::{Error, Result};
use crate::fp::{FpMatrix, Mode, Rational};
use crate::mamba::{self, schedule, MambaParams, ShapeConfig, SsmMode};

use super::{check_depth, formula_registry, Assignment, CostTrace, DepthExpr, TVal, Tracer, Verdict};

/// Components in report order.
pub const COMPONENTS: [&str; 15] = [
    "log",
    "softplus",
    "silu",
    "matmul",
    "hadamard",
    "input_projection",
    "conv1d",
    "select_params",
    "discretize",
    "hidden_recurrence",
    "ssm_recurrent",
    "conv_kernel",
    "ssm_convolution",
    "ssm_select",
    "mamba_forward",
];

/// (component, formula, traced depth must equal the formula)
const CHECKS: [(&str, &str, bool); 16] = [
    ("log", "d_log", true),
    ("softplus", "d_sp", true),
    ("silu", "d_silu", false),
    ("matmul", "d_matmul", true),
    ("hadamard", "d_hadamard", true),
    ("input_projection", "d_matmul", true),
    ("conv1d", "d_1dconv", true),
    ("select_params", "d_select", true),
    ("discretize", "d_disc", true),
    ("hidden_recurrence", "d_h", true),
    ("ssm_recurrent", "d_recur", true),
    ("conv_kernel", "d_k", true),
    ("ssm_convolution", "d_conv", true),
    ("ssm_select", "d_SSM", true),
    ("mamba_forward", "d_mamba", false),
    ("mamba_forward", "d_mamba_compositional", false),
];

/// Formulas the trace has to stay within even when not matched exactly.
const MUST_BOUND: [&str; 1] = ["d_mamba_compositional"];

/// The shapes `L in {1,2,4,8}`, `D, E, n in {1,2,3}`, `K = min(2, L)`.
pub fn default_grid() -> Vec<ShapeConfig> {
    let mut g = Vec::new();
    for l in [1, 2, 4, 8] {
        for d in 1..=3 {
            for e in 1..=3 {
                for n in 1..=3 {
                    g.push(ShapeConfig { l, d, e, n, k: l.min(2) });
                }
            }
        }
    }
    g
}

fn run(p: u32, f: impl FnOnce(&mut Tracer) -> Result<Vec<TVal>>) -> Result<CostTrace> {
    let mut t = Tracer::new(p);
    let outs = f(&mut t)?;
    for o in &outs {
        t.mark_output(o);
    }
    Ok(t.finish())
}

fn flat<T: Clone>(m: crate::fp::Matrix<T>) -> Vec<T> {
    m.into_entries()
}

/// Traces each component once on `params` (p-bit mode) with input `x`.
/// Inputs of a component are untraced values computed beforehand, so each
/// trace measures that component alone.
pub fn trace_components(params: &MambaParams, x: &FpMatrix) -> Result<BTreeMap<&'static str, CostTrace>> {
    let Mode::PBit(p) = params.mode() else {
        return Err(Error::ModeMismatch("tracing needs p-bit parameters".into()));
    };
    let s = params.shape()?;
    let u = mamba::input_projection(x, params)?;
    let v = mamba::silu(&mamba::conv1d(&u, &params.w_conv)?)?;
    let sel = mamba::select_params(&v, params)?;
    let disc = mamba::discretize(&params.a, &sel.b, &sel.c, &sel.delta)?;
    let kern = mamba::conv_kernel(&disc, s.m())?;

    let mut out = BTreeMap::new();
    out.insert(
        "log",
        run(p, |t| {
            let x = t.constant(&Rational::new(BigInt::from(3), BigInt::from(2)))?;
            Ok(vec![t.log(&x)?])
        })?,
    );
    out.insert(
        "softplus",
        run(p, |t| {
            let w = lift(t, &params.w_dt)?;
            Ok(vec![t.softplus(w.get(0, 0))?])
        })?,
    );
    out.insert(
        "silu",
        run(p, |t| {
            let uv = lift(t, &u)?;
            Ok(flat(schedule::silu(t, &uv)?))
        })?,
    );
    out.insert(
        "matmul",
        run(p, |t| {
            let (xv, w) = (lift(t, x)?, lift(t, &params.w_x_in)?);
            Ok(flat(arith::matmul(t, &xv, &w)?))
        })?,
    );
    out.insert(
        "hadamard",
        run(p, |t| {
            let uv = lift(t, &u)?;
            Ok(flat(arith::hadamard(t, &uv, &uv)?))
        })?,
    );
    out.insert(
        "input_projection",
        run(p, |t| {
            let w = params.load(t)?;
            let xv = lift(t, x)?;
            Ok(flat(schedule::affine(t, &xv, &w.w_x_in, &w.b_x_in)?))
        })?,
    );
    out.insert(
        "conv1d",
        run(p, |t| {
            let w = params.load(t)?;
            let uv = lift(t, &u)?;
            Ok(flat(schedule::conv1d(t, &uv, &w.w_conv)?))
        })?,
    );
    out.insert(
        "select_params",
        run(p, |t| {
            let w = params.load(t)?;
            let vv = lift(t, &v)?;
            let r = schedule::select(t, &vv, &w)?;
            let mut o = flat(r.b);
            o.extend(flat(r.c));
            o.push(r.delta);
            Ok(o)
        })?,
    );
    let load_disc = |t: &mut Tracer| -> Result<schedule::Discrete<TVal>> {
        Ok(schedule::Discrete {
            a_bar: lift(t, &disc.a_bar)?,
            b_bar: lift(t, &disc.b_bar)?,
            c_bar: lift(t, &disc.c_bar)?,
            delta: lift(t, &disc.delta)?.get(0, 0).clone(),
        })
    };
    out.insert(
        "discretize",
        run(p, |t| {
            let (a, b, c) = (lift(t, &params.a)?, lift(t, &sel.b)?, lift(t, &sel.c)?);
            let d = lift(t, &sel.delta)?.get(0, 0).clone();
            let r = schedule::discretize(t, &a, &b, &c, &d)?;
            let mut o = flat(r.a_bar);
            o.extend(flat(r.b_bar));
            Ok(o)
        })?,
    );
    out.insert(
        "hidden_recurrence",
        run(p, |t| {
            let d = load_disc(t)?;
            let vv = lift(t, &v)?;
            Ok(flat(schedule::hidden(t, &vv, &d)?))
        })?,
    );
    out.insert(
        "ssm_recurrent",
        run(p, |t| {
            let d = load_disc(t)?;
            let vv = lift(t, &v)?;
            Ok(flat(schedule::recurrent(t, &vv, &d)?))
        })?,
    );
    out.insert(
        "conv_kernel",
        run(p, |t| {
            let d = load_disc(t)?;
            Ok(schedule::kernel(t, &d, s.m())?.into_iter().flat_map(flat).collect())
        })?,
    );
    out.insert(
        "ssm_convolution",
        run(p, |t| {
            let k = kern.iter().map(|m| lift(t, m)).collect::<Result<Vec<_>>>()?;
            let vv = lift(t, &v)?;
            Ok(flat(schedule::convolve(t, &vv, &k)?))
        })?,
    );
    out.insert(
        "ssm_select",
        run(p, |t| {
            let w = params.load(t)?;
            let vv = lift(t, &v)?;
            Ok(flat(schedule::selective(t, &vv, &w, SsmMode::Recurrent)?))
        })?,
    );
    out.insert(
        "mamba_forward",
        run(p, |t| {
            let w = params.load(t)?;
            let xv = lift(t, x)?;
            Ok(flat(schedule::forward(t, &xv, &w, SsmMode::Recurrent, None)?))
        })?,
    );
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShapeRow {
    pub shape: ShapeConfig,
    pub depth: BTreeMap<&'static str, DepthExpr>,
    /// Depth with the recurrence run step by step.
    pub sequential: BTreeMap<&'static str, DepthExpr>,
    pub size: BTreeMap<&'static str, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaCheck {
    pub component: &'static str,
    pub formula_name: &'static str,
    pub statement: &'static str,
    pub formula: DepthExpr,
    pub traced: DepthExpr,
    pub verdict: Verdict,
    pub exact: bool,
    pub exact_required: bool,
    pub bound_required: bool,
}

impl FormulaCheck {
    pub fn passed(&self) -> bool {
        (!self.exact_required || self.exact) && (!self.bound_required || self.verdict.is_within())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthReport {
    pub precision: u32,
    pub seed: u64,
    pub rows: Vec<ShapeRow>,
    /// Whether each component has one depth over the whole grid.
    pub constant: BTreeMap<&'static str, bool>,
    pub checks: Vec<FormulaCheck>,
}

impl DepthReport {
    pub fn all_constant(&self) -> bool {
        self.constant.values().all(|&c| c)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(FormulaCheck::passed)
    }

    pub fn to_json(&self, assign: &Assignment) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let numeric: BTreeMap<&str, u64> = self
            .rows
            .first()
            .map(|r| r.depth.iter().map(|(k, d)| (*k, d.evaluate(assign))).collect())
            .unwrap_or_default();
        v["numeric_depth"] = serde_json::to_value(numeric).expect("map serializes");
        v["assignment"] = serde_json::to_value(
            super::DepthConstant::ALL.iter().map(|c| (c.name(), assign.weight(*c))).collect::<BTreeMap<_, _>>(),
        )
        .expect("map serializes");
        v
    }

    /// Plain-text table: one line per component, then one per formula check.
    pub fn table(&self, assign: &Assignment) -> String {
        let mut s = String::new();
        let Some(first) = self.rows.first() else {
            return s;
        };
        let _ = writeln!(s, "{:<18} {:>6} {:>9}  depth", "component", "value", "constant");
        for c in COMPONENTS {
            let d = first.depth[c];
            let _ = writeln!(s, "{:<18} {:>6} {:>9}  {}", c, d.evaluate(assign), self.constant[c], d);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<18} {:<22} {:<6} verdict", "component", "formula", "exact");
        for ch in &self.checks {
            let _ = writeln!(s, "{:<18} {:<22} {:<6} {}", ch.component, ch.formula_name, ch.exact, ch.verdict);
        }
        s
    }
}

/// Traces every component for each shape with seeded random parameters.
pub fn depth_report(grid: &[ShapeConfig], p: u32, seed: u64) -> Result<DepthReport> {
    let mut rows = Vec::with_capacity(grid.len());
    for (i, s) in grid.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let params = mamba::random_params(s, Mode::PBit(p), &mut rng)?;
        let x = mamba::random_input(s.l, s.d, Mode::PBit(p), &mut rng)?;
        rows.push(row_for(s, &params, &x)?);
    }
    summarize(rows, p, seed)
}

/// Depth report for one given model and input.
pub fn depth_report_for(params: &MambaParams, x: &FpMatrix, seed: u64) -> Result<DepthReport> {
    let Mode::PBit(p) = params.mode() else {
        return Err(Error::ModeMismatch("tracing needs p-bit parameters".into()));
    };
    let s = params.shape()?;
    summarize(vec![row_for(&s, params, x)?], p, seed)
}

fn row_for(s: &ShapeConfig, params: &MambaParams, x: &FpMatrix) -> Result<ShapeRow> {
    let traces = trace_components(params, x)?;
    let mut depth = BTreeMap::new();
    let mut sequential = BTreeMap::new();
    let mut size = BTreeMap::new();
    for (k, t) in &traces {
        depth.insert(*k, t.critical_depth()?);
        sequential.insert(*k, t.sequential_depth()?);
        size.insert(*k, t.size());
    }
    Ok(ShapeRow { shape: *s, depth, sequential, size })
}

fn summarize(rows: Vec<ShapeRow>, p: u32, seed: u64) -> Result<DepthReport> {
    let first = rows.first().ok_or_else(|| Error::InvalidParams("empty shape grid".into()))?.clone();
    let constant = COMPONENTS.iter().map(|&c| (c, rows.iter().all(|r| r.depth[c] == first.depth[c]))).collect();
    let reg = formula_registry();
    let checks = CHECKS
        .iter()
        .map(|&(component, name, exact_required)| {
            let f = &reg[name];
            let traced = first.depth[component];
            FormulaCheck {
                component,
                formula_name: name,
                statement: f.statement,
                formula: f.expanded,
                traced,
                verdict: check_depth(&traced, &f.expanded),
                exact: traced.expand() == f.expanded,
                exact_required,
                bound_required: MUST_BOUND.contains(&name),
            }
        })
        .collect();
    Ok(DepthReport { precision: p, seed, rows, constant, checks })
}
