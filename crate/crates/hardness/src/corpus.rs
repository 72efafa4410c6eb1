//! Seeded instance corpora with labels from the reference evaluators.
//!
//! One instance per line: postfix Boolean formulas, `ring | formula |
//! assignment` arithmetic instances, or space-separated S5 words. Labels go
//! one per line in a sidecar file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{ArithFormula, ArithInstance, Semiring};
use crate::boolean::BoolFormula;
use crate::error::{Error, Result};
use crate::perm::{compose, format_word, parse_word, word_problem, Permutation};

pub const MAX_BOOL_SYMBOLS: usize = 4095;
pub const MAX_ARITH_DEPTH: usize = 16;
pub const MAX_WORD_LENGTH: usize = 100_000;
/// Modulus and variable count of generated arithmetic instances.
pub const ARITH_MODULUS: u64 = 7;
pub const ARITH_VARS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// `size` is the exact postfix length.
    Bool,
    /// `size` is the formula depth; instances are over Z_7 with 4 variables.
    Arith,
    /// `size` is the word length; half the words compose to the identity.
    Word,
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bool" => Ok(Kind::Bool),
            "arith" => Ok(Kind::Arith),
            "word" | "s5" => Ok(Kind::Word),
            _ => Err(Error::Parse { pos: 0, msg: format!("unknown corpus kind `{s}` (bool, arith, word)") }),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Bool => "bool",
            Kind::Arith => "arith",
            Kind::Word => "word",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Corpus {
    pub kind: Kind,
    pub size: usize,
    pub seed: u64,
    pub instances: Vec<String>,
    pub labels: Vec<String>,
}

impl Corpus {
    pub fn instances_text(&self) -> String {
        lines(&self.instances)
    }

    pub fn labels_text(&self) -> String {
        lines(&self.labels)
    }

    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for l in &self.labels {
            *counts.entry(l.clone()).or_default() += 1;
        }
        counts
    }
}

fn lines(xs: &[String]) -> String {
    let mut s = xs.join("\n");
    s.push('\n');
    s
}

pub fn check_size(kind: Kind, size: usize) -> Result<()> {
    let ok = match kind {
        Kind::Bool => (1..=MAX_BOOL_SYMBOLS).contains(&size),
        Kind::Arith => size <= MAX_ARITH_DEPTH,
        Kind::Word => (1..=MAX_WORD_LENGTH).contains(&size),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSize(format!("{kind} size {size}")))
    }
}

/// `count` instances; output depends only on `(kind, size, count, seed)`.
pub fn generate(kind: Kind, size: usize, count: usize, seed: u64) -> Result<Corpus> {
    check_size(kind, size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let (inst, label) = match kind {
            Kind::Bool => {
                let f = random_bool(&mut rng, size);
                (f.to_postfix(), u8::from(f.eval()).to_string())
            }
            Kind::Arith => {
                let inst = random_arith_instance(&mut rng, size);
                let v = inst.eval()?;
                (inst.to_string(), v.to_string())
            }
            Kind::Word => {
                let w = random_word(&mut rng, size, true);
                (format_word(&w), u8::from(word_problem(&w)?).to_string())
            }
        };
        instances.push(inst);
        labels.push(label);
    }
    Ok(Corpus { kind, size, seed, instances, labels })
}

/// Re-evaluates one corpus line.
pub fn label(kind: Kind, line: &str) -> Result<String> {
    match kind {
        Kind::Bool => Ok(u8::from(BoolFormula::parse_postfix(line)?.eval()).to_string()),
        Kind::Arith => Ok(line.parse::<ArithInstance>()?.eval()?.to_string()),
        Kind::Word => Ok(u8::from(word_problem(&parse_word(line)?)?).to_string()),
    }
}

/// Formula with exactly `size` postfix symbols.
pub fn random_bool<R: Rng>(rng: &mut R, size: usize) -> BoolFormula {
    assert!(size >= 1);
    if size == 1 {
        return BoolFormula::Const(rng.gen());
    }
    if size == 2 || rng.gen_ratio(1, 4) {
        return BoolFormula::Not(Box::new(random_bool(rng, size - 1)));
    }
    let left = rng.gen_range(1..=size - 2);
    let a = Box::new(random_bool(rng, left));
    let b = Box::new(random_bool(rng, size - 1 - left));
    if rng.gen() {
        BoolFormula::And(a, b)
    } else {
        BoolFormula::Or(a, b)
    }
}

/// Formula of exactly the given depth over `x1..x{vars}` with constants in `[0, modulus)`.
pub fn random_arith<R: Rng>(rng: &mut R, depth: usize, vars: usize, modulus: u64) -> ArithFormula {
    if depth == 0 {
        return if rng.gen_ratio(2, 3) {
            ArithFormula::Var(rng.gen_range(1..=vars))
        } else {
            ArithFormula::Const(BigInt::from(rng.gen_range(0..modulus)))
        };
    }
    if rng.gen_ratio(1, 8) {
        return ArithFormula::Neg(Box::new(random_arith(rng, depth - 1, vars, modulus)));
    }
    let deep = Box::new(random_arith(rng, depth - 1, vars, modulus));
    let other_depth = rng.gen_range(0..depth);
    let other = Box::new(random_arith(rng, other_depth, vars, modulus));
    let (a, b) = if rng.gen() { (deep, other) } else { (other, deep) };
    if rng.gen() {
        ArithFormula::Add(a, b)
    } else {
        ArithFormula::Mul(a, b)
    }
}

pub fn random_arith_instance<R: Rng>(rng: &mut R, depth: usize) -> ArithInstance {
    let formula = random_arith(rng, depth, ARITH_VARS, ARITH_MODULUS);
    let assignment = (0..ARITH_VARS).map(|_| BigInt::from(rng.gen_range(0..ARITH_MODULUS))).collect();
    ArithInstance { ring: Semiring::Mod(ARITH_MODULUS), formula, assignment }
}

pub fn random_s5<R: Rng>(rng: &mut R) -> Permutation {
    let mut images: Vec<usize> = (0..5).collect();
    images.shuffle(rng);
    Permutation::new(images).expect("shuffle is a bijection")
}

/// Uniform S5 word; with `balanced`, half the time the last letter is
/// replaced so that the word composes to the identity.
pub fn random_word<R: Rng>(rng: &mut R, len: usize, balanced: bool) -> Vec<Permutation> {
    let mut w: Vec<Permutation> = (0..len).map(|_| random_s5(rng)).collect();
    if balanced && rng.gen() {
        let prefix = if len > 1 { compose(&w[..len - 1]).expect("uniform domain") } else { Permutation::identity(5) };
        w[len - 1] = prefix.inverse();
    }
    w
}
