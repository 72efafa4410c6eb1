//! `tcbench`: p-bit float evaluation, Mamba runs and depth reports, threshold
//! circuit synthesis and checking, and hardness corpora.

mod circuit_cmd;
mod expr;
mod hardness_cmd;
mod mamba_cmd;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tcbench_core::fp::Mode;

#[derive(Parser)]
#[command(
    name = "tcbench",
    version,
    about = "Bit-exact p-bit arithmetic, Mamba depth tracing, threshold circuits and hardness corpora"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression over literals, + - * /, floor, exp, log, sqrt,
    /// softplus, silu and sigmoid in the p-bit model.
    Fp {
        expr: String,
        #[arg(short, long = "precision", default_value_t = 16)]
        p: u32,
    },
    #[command(subcommand)]
    Mamba(mamba_cmd::MambaCmd),
    #[command(subcommand)]
    Circuit(circuit_cmd::CircuitCmd),
    #[command(subcommand)]
    Hardness(hardness_cmd::HardnessCmd),
}

/// Numeric flags shared by the Mamba commands.
#[derive(Args, Clone, Debug)]
pub struct NumArgs {
    #[arg(short, long = "precision", default_value_t = 16)]
    pub p: u32,
    /// `pbit` or `exact`.
    #[arg(long, default_value = "pbit")]
    pub mode: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl NumArgs {
    pub fn mode(&self) -> Result<Mode, Failure> {
        parse_mode(&self.mode, self.p)
    }
}

pub fn parse_mode(mode: &str, p: u32) -> Result<Mode, Failure> {
    if p < 2 {
        return Err(usage(format!("precision must be at least 2, got {p}")));
    }
    match mode {
        "pbit" | "p-bit" => Ok(Mode::PBit(p)),
        "exact" | "rational" => Ok(Mode::ExactRational),
        m => Err(usage(format!("unknown mode {m:?}, expected pbit or exact"))),
    }
}

/// Why a command did not succeed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and failed, or a computation hit a domain error.
    Failed(String),
    /// Bad arguments, unreadable files or malformed input.
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Failed(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

pub fn failed(e: impl Display) -> Failure {
    Failure::Failed(e.to_string())
}

pub fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Writes to `out` when given, otherwise prints.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

pub fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn cmd_fp(text: &str, p: u32) -> Result<(), Failure> {
    if p < 2 {
        return Err(usage(format!("precision must be at least 2, got {p}")));
    }
    let e = expr::parse(text).map_err(usage)?;
    let x = expr::eval(&e, p).map_err(failed)?;
    let v = serde_json::json!({
        "expr": text,
        "p": p,
        "m": x.significand().to_string(),
        "e": x.exponent(),
        "value": x.to_f64(),
    });
    print!("{}", json(&v));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Command::Fp { expr, p } => cmd_fp(&expr, p),
        Command::Mamba(c) => mamba_cmd::run(c),
        Command::Circuit(c) => circuit_cmd::run(c),
        Command::Hardness(c) => hardness_cmd::run(c),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Failed(msg) | Failure::Usage(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
