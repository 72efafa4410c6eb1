use std::path::{Path, PathBuf};

use clap::Subcommand;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcbench_core::fp::{rational_to_f64, FpMatrix, Mode, Rational};
use tcbench_core::mamba::{self, ForwardOptions, MambaParams, Model, ShapeConfig, SsmMode};
use tcbench_core::trace::{default_grid, depth_report, depth_report_for, Assignment};

use crate::{emit, failed, json, parse_mode, read, usage, Failure, NumArgs};

#[derive(Subcommand)]
pub enum MambaCmd {
    /// Write a model file with seeded random (or zero) parameters.
    Init {
        #[arg(long, value_name = "L,D,E,n,K")]
        shape: String,
        #[arg(long)]
        zero: bool,
        #[command(flatten)]
        num: NumArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the forward pass and write the L x D output.
    Run {
        #[arg(long)]
        model: PathBuf,
        /// Input activation file; seeded random input when absent.
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// `recurrent` or `convolution`.
        #[arg(long, default_value = "recurrent")]
        ssm: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Max entrywise relative gap between the recurrent and convolutional forms.
    Compare {
        #[arg(long, conflicts_with = "shape")]
        model: Option<PathBuf>,
        #[arg(long, value_name = "L,D,E,n,K")]
        shape: Option<String>,
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long = "precision", default_value_t = 16)]
        p: u32,
        /// `pbit` or `exact`; converts a loaded model when given.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fail when the gap exceeds this; exact mode always requires 0.
        #[arg(long)]
        max_gap: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Traced critical depth of every component checked against the formulas.
    Depth {
        #[arg(long, conflicts_with = "shape")]
        model: Option<PathBuf>,
        /// One shape; the full L in {1,2,4,8}, D,E,n in {1,2,3} grid when absent.
        #[arg(long, value_name = "L,D,E,n,K")]
        shape: Option<String>,
        #[arg(long, default_value = "all=1")]
        assign: String,
        /// Print the plain-text table instead of JSON.
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        num: NumArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn shape(s: &str) -> Result<ShapeConfig, Failure> {
    ShapeConfig::parse(s).map_err(usage)
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    Model::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_input(path: Option<&PathBuf>, s: &ShapeConfig, mode: Mode, seed: u64) -> Result<FpMatrix, Failure> {
    match path {
        Some(p) => {
            let x: FpMatrix = serde_json::from_str(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            x.convert(mode).map_err(failed)
        }
        None => mamba::random_input(s.l, s.d, mode, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(failed),
    }
}

fn random_model(s: &ShapeConfig, mode: Mode, seed: u64) -> Result<MambaParams, Failure> {
    // offset so the model and the default input draw different streams
    mamba::random_params(s, mode, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f6d)).map_err(failed)
}

fn max_relative_gap(a: &FpMatrix, b: &FpMatrix) -> Rational {
    let (a, b) = (a.to_rationals(), b.to_rationals());
    let mut worst = Rational::zero();
    for (x, y) in a.entries().iter().zip(b.entries()) {
        let scale = x.abs().max(y.abs());
        if scale.is_zero() {
            continue;
        }
        let g = (x - y).abs() / scale;
        if g > worst {
            worst = g;
        }
    }
    worst
}

pub fn run(cmd: MambaCmd) -> Result<(), Failure> {
    match cmd {
        MambaCmd::Init { shape: s, zero, num, out } => {
            let s = shape(&s)?;
            let mode = num.mode()?;
            let params = if zero { MambaParams::zeros(&s, mode) } else { random_model(&s, mode, num.seed)? };
            let model = Model::new(params).map_err(failed)?;
            emit(out.as_ref(), &(model.to_json() + "\n"))
        }
        MambaCmd::Run { model, input, ssm, seed, out } => {
            let m = load_model(&model)?;
            let mode = m.params.mode();
            let ssm = match ssm.as_str() {
                "recurrent" => SsmMode::Recurrent,
                "convolution" | "conv" => SsmMode::Convolution,
                other => return Err(usage(format!("unknown ssm form {other:?}"))),
            };
            let x = load_input(input.as_ref(), &m.shape, mode, seed)?;
            let opts = ForwardOptions { ssm, gate_override: None };
            let y = mamba::mamba_forward_with(&x, &m.params, &opts).map_err(failed)?;
            emit(out.as_ref(), &json(&y))
        }
        MambaCmd::Compare { model, shape: s, input, p, mode, seed, max_gap, out } => {
            let mode = mode.map(|m| parse_mode(&m, p)).transpose()?;
            let params = match (&model, &s) {
                (Some(path), _) => {
                    let m = load_model(path)?;
                    match mode {
                        Some(mode) => m.params.convert(mode).map_err(failed)?,
                        None => m.params,
                    }
                }
                (None, Some(s)) => random_model(&shape(s)?, mode.unwrap_or(Mode::PBit(p)), seed)?,
                (None, None) => return Err(usage("compare needs --model or --shape")),
            };
            let mode = params.mode();
            let sh = params.shape().map_err(failed)?;
            let x = load_input(input.as_ref(), &sh, mode, seed)?;
            let fwd = |ssm| mamba::mamba_forward_with(&x, &params, &ForwardOptions { ssm, gate_override: None });
            let rec = fwd(SsmMode::Recurrent).map_err(failed)?;
            let conv = fwd(SsmMode::Convolution).map_err(failed)?;
            let gap = max_relative_gap(&rec, &conv);
            let gap_f = rational_to_f64(&gap);
            let ok = match (mode, max_gap) {
                (Mode::ExactRational, _) => gap.is_zero(),
                (_, Some(t)) => gap_f <= t,
                _ => true,
            };
            let v = serde_json::json!({
                "shape": sh,
                "mode": mode,
                "max_relative_gap": gap_f,
                "max_relative_gap_exact": gap.to_string(),
                "identical": rec == conv,
                "pass": ok,
            });
            emit(out.as_ref(), &json(&v))?;
            if ok {
                Ok(())
            } else {
                Err(failed(format!("recurrent/convolution gap {gap_f:e} exceeds the limit")))
            }
        }
        MambaCmd::Depth { model, shape: s, assign, table, num, out } => {
            let a = Assignment::parse(&assign).map_err(usage)?;
            let report = match (&model, &s) {
                (Some(path), _) => {
                    let m = load_model(path)?;
                    if !matches!(m.params.mode(), Mode::PBit(_)) {
                        return Err(usage("depth tracing needs a p-bit model"));
                    }
                    let x = load_input(None, &m.shape, m.params.mode(), num.seed)?;
                    depth_report_for(&m.params, &x, num.seed)
                }
                (None, Some(s)) => depth_report(&[shape(s)?], num.p, num.seed),
                (None, None) => depth_report(&default_grid(), num.p, num.seed),
            }
            .map_err(failed)?;
            let text = if table { report.table(&a) } else { json(&report.to_json(&a)) };
            emit(out.as_ref(), &text)?;
            if !report.all_constant() {
                return Err(failed("some component depth varies across shapes"));
            }
            if !report.all_checks_pass() {
                return Err(failed("some depth check failed"));
            }
            Ok(())
        }
    }
}
