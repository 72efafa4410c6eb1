use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use tcbench_circuit::{
    check_circuit_exhaustive, check_exhaustive, check_sampled, synthesize, BitEncoding, CheckReport, Circuit, Primitive,
};

use crate::{emit, failed, json, read, usage, write, Failure};

/// Exhaustive checking is used while the operand space stays below this.
const EXHAUSTIVE_LIMIT: u64 = 1 << 22;

#[derive(Args, Clone, Debug)]
pub struct PrimArgs {
    /// `compare`, `add`, `mul` or `iter_add`.
    primitive: String,
    /// Significand bits (the circuits support 2..=8).
    #[arg(short, long = "precision", default_value_t = 3)]
    p: u32,
    /// Exponent field width; defaults to p, giving the window [-2^(p-1), 2^(p-1)).
    #[arg(short = 'w', long)]
    exp_bits: Option<u32>,
    /// Operand count for iter_add.
    #[arg(short, long, default_value_t = 2)]
    m: usize,
}

impl PrimArgs {
    fn primitive(&self) -> Result<Primitive, Failure> {
        match self.primitive.as_str() {
            "iter_add" | "iter-add" => Ok(Primitive::IterAdd(self.m)),
            s => s.parse().map_err(usage),
        }
    }

    fn encoding(&self) -> Result<BitEncoding, Failure> {
        BitEncoding::new(self.p, self.exp_bits.unwrap_or(self.p)).map_err(usage)
    }
}

#[derive(Subcommand)]
pub enum CircuitCmd {
    /// Synthesize a primitive and write its netlist.
    Synth {
        #[command(flatten)]
        prim: PrimArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a primitive against the float library, exhaustively when feasible.
    Check {
        #[command(flatten)]
        prim: PrimArgs,
        /// Check this netlist instead of a freshly synthesized one.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Sample count when the operand space is too large to enumerate.
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON report destination.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Rewrite into AND/OR/NOT/MAJORITY gates.
    Rewrite {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate on one assignment, given as 0/1 characters in input order.
    Eval {
        file: PathBuf,
        #[arg(long)]
        input: String,
    },
    /// Depth, size and wiring of a netlist.
    Depth { file: PathBuf },
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    Circuit::from_netlist(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn summary(c: &Circuit) -> serde_json::Value {
    serde_json::json!({
        "inputs": c.num_inputs(),
        "outputs": c.outputs().len(),
        "depth": c.depth(),
        "size": c.size(),
        "wires": c.wires(),
    })
}

fn verdict_line(r: &CheckReport) -> String {
    format!(
        "{}: {} ({} p={} window=[{}, {}): {} cases, {} mismatches, depth {}, size {})",
        if r.exhaustive { "exhaustive" } else { "sampled" },
        if r.passed() { "PASS" } else { "FAIL" },
        r.primitive,
        r.p,
        r.window.0,
        r.window.1,
        r.cases,
        r.mismatches,
        r.depth,
        r.size
    )
}

pub fn run(cmd: CircuitCmd) -> Result<(), Failure> {
    match cmd {
        CircuitCmd::Synth { prim, out } => {
            let (pr, enc) = (prim.primitive()?, prim.encoding()?);
            let c = synthesize(pr, &enc).map_err(usage)?;
            let mut v = summary(&c);
            v["primitive"] = pr.name().into();
            v["p"] = enc.p.into();
            v["exp_bits"] = enc.exp_bits.into();
            match out {
                Some(path) => {
                    write(&path, &c.to_netlist())?;
                    print!("{}", json(&v));
                    Ok(())
                }
                None => emit(None, &c.to_netlist()),
            }
        }
        CircuitCmd::Check { prim, circuit, samples, seed, out } => {
            let (pr, enc) = (prim.primitive()?, prim.encoding()?);
            let space = (enc.values().len() as u64).checked_pow(pr.arity() as u32).unwrap_or(u64::MAX);
            let report = match &circuit {
                Some(path) => check_circuit_exhaustive(pr, &enc, &load(path)?),
                None if space <= EXHAUSTIVE_LIMIT => check_exhaustive(pr, &enc),
                None => check_sampled(pr, &enc, samples, seed),
            }
            .map_err(usage)?;
            println!("{}", verdict_line(&report));
            if let Some(first) = &report.first_mismatch {
                println!("first mismatch: {first}");
            }
            if let Some(path) = &out {
                write(path, &json(&report))?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(failed(format!("{} mismatches", report.mismatches)))
            }
        }
        CircuitCmd::Rewrite { file, out } => {
            let c = load(&file)?.to_majority_only();
            match out {
                Some(path) => {
                    write(&path, &c.to_netlist())?;
                    print!("{}", json(&summary(&c)));
                    Ok(())
                }
                None => emit(None, &c.to_netlist()),
            }
        }
        CircuitCmd::Eval { file, input } => {
            let c = load(&file)?;
            let x: Vec<bool> = input
                .chars()
                .filter(|ch| !ch.is_whitespace() && *ch != ',')
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(usage(format!("input must be 0/1 characters, got {ch:?}"))),
                })
                .collect::<Result<_, _>>()?;
            let y = c.evaluate(&x).map_err(usage)?;
            println!("{}", y.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>());
            Ok(())
        }
        CircuitCmd::Depth { file } => emit(None, &json(&summary(&load(&file)?))),
    }
}
