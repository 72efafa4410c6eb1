use std::path::{Path, PathBuf};

use clap::Subcommand;
use tcbench_circuit::Circuit;
use tcbench_hardness::{barrington_transform, eval_pbp, generate, label, lower_to_and_not, Kind};

use crate::{emit, failed, json, read, usage, write, Failure};

/// Barrington programs are verified on every assignment up to this many inputs.
const VERIFY_INPUTS: usize = 16;

#[derive(Subcommand)]
pub enum HardnessCmd {
    /// Generate a seeded corpus; labels go to a `.labels` file next to it.
    Gen {
        /// `bool`, `arith` or `word`.
        kind: String,
        /// Postfix length (bool), formula depth (arith) or word length (word).
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'n', long, default_value_t = 100)]
        count: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every instance; with `--labels`, compare against them.
    Eval {
        kind: String,
        file: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Translate a fan-in-2 circuit netlist into a width-5 branching program.
    Barrington {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn kind(s: &str) -> Result<Kind, Failure> {
    s.parse().map_err(usage)
}

fn labels_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".labels");
    PathBuf::from(s)
}

pub fn run(cmd: HardnessCmd) -> Result<(), Failure> {
    match cmd {
        HardnessCmd::Gen { kind: k, size, seed, count, out } => {
            let c = generate(kind(&k)?, size, count, seed).map_err(usage)?;
            match out {
                Some(path) => {
                    write(&path, &c.instances_text())?;
                    write(&labels_path(&path), &c.labels_text())?;
                    let v = serde_json::json!({
                        "kind": c.kind.to_string(),
                        "size": c.size,
                        "seed": c.seed,
                        "count": c.instances.len(),
                        "labels": c.label_counts(),
                    });
                    print!("{}", json(&v));
                    Ok(())
                }
                None => emit(None, &c.instances_text()),
            }
        }
        HardnessCmd::Eval { kind: k, file, labels, out } => {
            let k = kind(&k)?;
            let text = read(&file)?;
            let got = text
                .lines()
                .enumerate()
                .map(|(i, l)| label(k, l).map_err(|e| usage(format!("{}:{}: {e}", file.display(), i + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            let mut body = got.join("\n");
            body.push('\n');
            let Some(lp) = labels else {
                return emit(out.as_ref(), &body);
            };
            if let Some(path) = &out {
                write(path, &body)?;
            }
            let want: Vec<String> = read(&lp)?.lines().map(str::to_string).collect();
            if want.len() != got.len() {
                return Err(usage(format!("{} instances but {} labels", got.len(), want.len())));
            }
            let wrong: Vec<usize> = (0..got.len()).filter(|&i| got[i] != want[i]).collect();
            println!(
                "labels: {} ({} instances, {} mismatches)",
                if wrong.is_empty() { "PASS" } else { "FAIL" },
                got.len(),
                wrong.len()
            );
            match wrong.first() {
                None => Ok(()),
                Some(i) => Err(failed(format!("line {}: label {} but evaluates to {}", i + 1, want[*i], got[*i]))),
            }
        }
        HardnessCmd::Barrington { file, out } => {
            let c = Circuit::from_netlist(&read(&file)?).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let low = lower_to_and_not(&c).map_err(usage)?;
            let prog = barrington_transform(&low).map_err(usage)?;
            let n = c.num_inputs();
            let depth = low.depth();
            let bound = 4f64.powi(depth as i32);
            let mut mismatches = None;
            if n <= VERIFY_INPUTS {
                let mut bad = 0u64;
                for a in 0..1u64 << n {
                    let x: Vec<bool> = (0..n).map(|i| a >> i & 1 == 1).collect();
                    let want = c.evaluate(&x).map_err(failed)?[0];
                    if eval_pbp(&prog, &x).map_err(failed)? != want {
                        bad += 1;
                    }
                }
                mismatches = Some(bad);
            }
            let within = prog.len() as f64 <= bound;
            let v = serde_json::json!({
                "inputs": n,
                "depth": depth,
                "length": prog.len(),
                "length_bound": bound,
                "within_bound": within,
                "verified_assignments": mismatches.map(|_| 1u64 << n),
                "mismatches": mismatches,
            });
            match &out {
                Some(path) => {
                    write(path, &format!("{prog}"))?;
                    print!("{}", json(&v));
                }
                None => {
                    print!("{prog}");
                    eprint!("{}", json(&v));
                }
            }
            if !within || mismatches.is_some_and(|m| m > 0) {
                return Err(failed("branching program disagrees with the circuit or exceeds 4^depth"));
            }
            Ok(())
        }
    }
}
