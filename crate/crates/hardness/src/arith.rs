//! Arithmetic formulas over a semiring, in S-expression form:
//! `(+ a b)`, `(* a b)`, `(- a)`, integer literals and variables `x1`, `x2`, ...

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semiring {
    Integers,
    /// `+` is OR, `*` is AND, unary `-` is NOT.
    Booleans,
    /// Integers modulo `m`.
    Mod(u64),
}

impl Semiring {
    /// Brings a value into the semiring: Booleans map nonzero to 1, `Z_m` reduces.
    pub fn normalize(&self, v: &BigInt) -> BigInt {
        match self {
            Semiring::Integers => v.clone(),
            Semiring::Booleans => BigInt::from(u8::from(!v.is_zero())),
            Semiring::Mod(m) => v.mod_floor(&BigInt::from(*m)),
        }
    }

    fn add(&self, a: BigInt, b: BigInt) -> BigInt {
        match self {
            Semiring::Booleans => BigInt::from(u8::from(!a.is_zero() || !b.is_zero())),
            _ => self.normalize(&(a + b)),
        }
    }

    fn mul(&self, a: BigInt, b: BigInt) -> BigInt {
        self.normalize(&(a * b))
    }

    fn neg(&self, a: BigInt) -> BigInt {
        match self {
            Semiring::Booleans => BigInt::one() - a,
            _ => self.normalize(&-a),
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semiring::Integers => write!(f, "Z"),
            Semiring::Booleans => write!(f, "B"),
            Semiring::Mod(m) => write!(f, "Z{m}"),
        }
    }
}

impl FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" => Ok(Semiring::Integers),
            "B" => Ok(Semiring::Booleans),
            _ => {
                let m: u64 = s
                    .strip_prefix('Z')
                    .and_then(|m| m.parse().ok())
                    .ok_or_else(|| Error::Parse { pos: 0, msg: format!("unknown semiring `{s}`") })?;
                if m < 2 {
                    return Err(Error::InvalidModulus(m));
                }
                Ok(Semiring::Mod(m))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithFormula {
    Const(BigInt),
    /// 1-based variable index.
    Var(usize),
    Neg(Box<ArithFormula>),
    Add(Box<ArithFormula>, Box<ArithFormula>),
    Mul(Box<ArithFormula>, Box<ArithFormula>),
}

impl ArithFormula {
    /// Largest variable index used (0 when there are none).
    pub fn num_vars(&self) -> usize {
        match self {
            ArithFormula::Const(_) => 0,
            ArithFormula::Var(i) => *i,
            ArithFormula::Neg(a) => a.num_vars(),
            ArithFormula::Add(a, b) | ArithFormula::Mul(a, b) => a.num_vars().max(b.num_vars()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ArithFormula::Const(_) | ArithFormula::Var(_) => 0,
            ArithFormula::Neg(a) => 1 + a.depth(),
            ArithFormula::Add(a, b) | ArithFormula::Mul(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Value at `assignment` (`c_1..c_n`); constants and inputs are first
    /// brought into the semiring.
    pub fn eval(&self, ring: Semiring, assignment: &[BigInt]) -> Result<BigInt> {
        if self.num_vars() > assignment.len() {
            return Err(Error::ArityMismatch { expected: self.num_vars(), got: assignment.len() });
        }
        Ok(self.eval_unchecked(ring, assignment))
    }

    fn eval_unchecked(&self, ring: Semiring, c: &[BigInt]) -> BigInt {
        match self {
            ArithFormula::Const(v) => ring.normalize(v),
            ArithFormula::Var(i) => ring.normalize(&c[i - 1]),
            ArithFormula::Neg(a) => ring.neg(a.eval_unchecked(ring, c)),
            ArithFormula::Add(a, b) => ring.add(a.eval_unchecked(ring, c), b.eval_unchecked(ring, c)),
            ArithFormula::Mul(a, b) => ring.mul(a.eval_unchecked(ring, c), b.eval_unchecked(ring, c)),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let toks = tokenize(s);
        let mut pos = 0;
        let f = parse_expr(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(Error::Parse { pos: toks[pos].0, msg: format!("trailing input `{}`", toks[pos].1) });
        }
        Ok(f)
    }
}

impl fmt::Display for ArithFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithFormula::Const(v) => write!(f, "{v}"),
            ArithFormula::Var(i) => write!(f, "x{i}"),
            ArithFormula::Neg(a) => write!(f, "(- {a})"),
            ArithFormula::Add(a, b) => write!(f, "(+ {a} {b})"),
            ArithFormula::Mul(a, b) => write!(f, "(* {a} {b})"),
        }
    }
}

impl FromStr for ArithFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn tokenize(s: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, String)> = None;
    for (i, ch) in s.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            out.extend(cur.take());
            if !ch.is_whitespace() {
                out.push((i, ch.to_string()));
            }
        } else {
            cur.get_or_insert_with(|| (i, String::new())).1.push(ch);
        }
    }
    out.extend(cur);
    out
}

fn parse_expr(toks: &[(usize, String)], pos: &mut usize) -> Result<ArithFormula> {
    let end = toks.last().map_or(0, |t| t.0 + t.1.len());
    let (at, tok) = toks.get(*pos).ok_or(Error::Parse { pos: end, msg: "unexpected end of input".into() })?;
    *pos += 1;
    if tok != "(" {
        if let Some(i) = tok.strip_prefix('x') {
            return match i.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(ArithFormula::Var(i)),
                _ => Err(Error::Parse { pos: *at, msg: format!("bad variable `{tok}`") }),
            };
        }
        return tok
            .parse::<BigInt>()
            .map(ArithFormula::Const)
            .map_err(|_| Error::Parse { pos: *at, msg: format!("bad atom `{tok}`") });
    }
    let (op_at, op) = toks.get(*pos).ok_or(Error::Parse { pos: end, msg: "missing operator".into() })?;
    *pos += 1;
    let a = parse_expr(toks, pos)?;
    let f = match op.as_str() {
        "-" => ArithFormula::Neg(Box::new(a)),
        "+" | "*" => {
            let b = parse_expr(toks, pos)?;
            if op == "+" {
                ArithFormula::Add(Box::new(a), Box::new(b))
            } else {
                ArithFormula::Mul(Box::new(a), Box::new(b))
            }
        }
        _ => return Err(Error::Parse { pos: *op_at, msg: format!("unknown operator `{op}`") }),
    };
    match toks.get(*pos) {
        Some((_, t)) if t == ")" => {
            *pos += 1;
            Ok(f)
        }
        Some((p, t)) => Err(Error::Parse { pos: *p, msg: format!("expected `)`, found `{t}`") }),
        None => Err(Error::Parse { pos: end, msg: "missing `)`".into() }),
    }
}

/// Evaluation instance: semiring, formula and assignment, written as
/// `Z7 | (+ x1 3) | 4 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithInstance {
    pub ring: Semiring,
    pub formula: ArithFormula,
    pub assignment: Vec<BigInt>,
}

impl ArithInstance {
    pub fn eval(&self) -> Result<BigInt> {
        self.formula.eval(self.ring, &self.assignment)
    }
}

impl fmt::Display for ArithInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.assignment.iter().map(|v| v.to_string()).collect();
        write!(f, "{} | {} | {}", self.ring, self.formula, vals.join(" "))
    }
}

impl FromStr for ArithInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 3 {
            return Err(Error::Parse { pos: 0, msg: "expected `ring | formula | assignment`".into() });
        }
        let ring = parts[0].trim().parse()?;
        let formula = parts[1].trim().parse()?;
        let assignment = parts[2]
            .split_whitespace()
            .map(|t| t.parse::<BigInt>().map_err(|_| Error::Parse { pos: 0, msg: format!("bad value `{t}`") }))
            .collect::<Result<Vec<_>>>()?;
        Ok(ArithInstance { ring, formula, assignment })
    }
}
