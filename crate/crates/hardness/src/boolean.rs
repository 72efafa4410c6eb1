//! Closed Boolean formulas over `{0, 1, ∧, ∨, ¬, (, )}` in infix and postfix
//! form. ASCII `&`, `|`, `!` (or `~`) are accepted as aliases.
//!
//! Postfix: `0` and `1` are formulas, `αβ∧` and `αβ∨` are formulas when
//! `|α| >= |β|`, and `α¬` is a formula.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolFormula {
    Const(bool),
    Not(Box<BoolFormula>),
    And(Box<BoolFormula>, Box<BoolFormula>),
    Or(Box<BoolFormula>, Box<BoolFormula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Zero,
    One,
    And,
    Or,
    Not,
    Open,
    Close,
}

fn symbols(s: &str) -> Result<Vec<(usize, Sym)>> {
    s.char_indices()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, c)| {
            let sym = match c {
                '0' => Sym::Zero,
                '1' => Sym::One,
                '∧' | '&' => Sym::And,
                '∨' | '|' => Sym::Or,
                '¬' | '!' | '~' => Sym::Not,
                '(' => Sym::Open,
                ')' => Sym::Close,
                _ => return Err(Error::Parse { pos: i, msg: format!("symbol `{c}` is not in the alphabet") }),
            };
            Ok((i, sym))
        })
        .collect()
}

impl BoolFormula {
    pub fn eval(&self) -> bool {
        match self {
            BoolFormula::Const(b) => *b,
            BoolFormula::Not(a) => !a.eval(),
            BoolFormula::And(a, b) => a.eval() && b.eval(),
            BoolFormula::Or(a, b) => a.eval() || b.eval(),
        }
    }

    /// Length of the postfix form.
    pub fn len(&self) -> usize {
        match self {
            BoolFormula::Const(_) => 1,
            BoolFormula::Not(a) => 1 + a.len(),
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => 1 + a.len() + b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn depth(&self) -> usize {
        match self {
            BoolFormula::Const(_) => 0,
            BoolFormula::Not(a) => 1 + a.depth(),
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Postfix form; a binary node writes its longer operand first (swapping
    /// is sound because both connectives commute).
    pub fn to_postfix(&self) -> String {
        let mut out = String::new();
        self.write_postfix(&mut out);
        out
    }

    fn write_postfix(&self, out: &mut String) {
        match self {
            BoolFormula::Const(b) => out.push(if *b { '1' } else { '0' }),
            BoolFormula::Not(a) => {
                a.write_postfix(out);
                out.push('¬');
            }
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => {
                let (x, y) = if a.len() >= b.len() { (a, b) } else { (b, a) };
                x.write_postfix(out);
                y.write_postfix(out);
                out.push(if matches!(self, BoolFormula::And(..)) { '∧' } else { '∨' });
            }
        }
    }

    /// Fully parenthesized infix: `(α∧β)`, `(α∨β)`, `¬α`.
    pub fn to_infix(&self) -> String {
        match self {
            BoolFormula::Const(b) => if *b { "1" } else { "0" }.to_string(),
            BoolFormula::Not(a) => format!("¬{}", a.to_infix()),
            BoolFormula::And(a, b) => format!("({}∧{})", a.to_infix(), b.to_infix()),
            BoolFormula::Or(a, b) => format!("({}∨{})", a.to_infix(), b.to_infix()),
        }
    }

    /// Operand order normalized as in the postfix form.
    pub fn canonical(&self) -> BoolFormula {
        match self {
            BoolFormula::Const(_) => self.clone(),
            BoolFormula::Not(a) => BoolFormula::Not(Box::new(a.canonical())),
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => {
                let (x, y) =
                    if a.len() >= b.len() { (a.canonical(), b.canonical()) } else { (b.canonical(), a.canonical()) };
                if matches!(self, BoolFormula::And(..)) {
                    BoolFormula::And(Box::new(x), Box::new(y))
                } else {
                    BoolFormula::Or(Box::new(x), Box::new(y))
                }
            }
        }
    }

    /// Parses postfix, enforcing `|α| >= |β|` on binary connectives.
    pub fn parse_postfix(s: &str) -> Result<BoolFormula> {
        let mut stack: Vec<BoolFormula> = Vec::new();
        let syms = symbols(s)?;
        for &(pos, sym) in &syms {
            let need =
                |stack: &mut Vec<BoolFormula>| stack.pop().ok_or(Error::Parse { pos, msg: "missing operand".into() });
            let node = match sym {
                Sym::Zero => BoolFormula::Const(false),
                Sym::One => BoolFormula::Const(true),
                Sym::Not => BoolFormula::Not(Box::new(need(&mut stack)?)),
                Sym::And | Sym::Or => {
                    let b = need(&mut stack)?;
                    let a = need(&mut stack)?;
                    if a.len() < b.len() {
                        return Err(Error::Parse {
                            pos,
                            msg: format!("left operand shorter than right ({} < {})", a.len(), b.len()),
                        });
                    }
                    if sym == Sym::And {
                        BoolFormula::And(Box::new(a), Box::new(b))
                    } else {
                        BoolFormula::Or(Box::new(a), Box::new(b))
                    }
                }
                Sym::Open | Sym::Close => return Err(Error::Parse { pos, msg: "parentheses in postfix".into() }),
            };
            stack.push(node);
        }
        let end = s.len();
        match (stack.pop(), stack.is_empty()) {
            (Some(f), true) => Ok(f),
            (None, _) => Err(Error::Parse { pos: end, msg: "empty formula".into() }),
            (Some(_), false) => Err(Error::Parse { pos: end, msg: format!("{} operands left over", stack.len() + 1) }),
        }
    }

    /// Parses infix with `¬` binding tightest, then `∧`, then `∨`.
    pub fn parse_infix(s: &str) -> Result<BoolFormula> {
        let syms = symbols(s)?;
        let mut p = InfixParser { syms: &syms, pos: 0, end: s.len() };
        let f = p.or()?;
        match p.peek() {
            None => Ok(f),
            Some((pos, _)) => Err(Error::Parse { pos, msg: "trailing input".into() }),
        }
    }
}

impl fmt::Display for BoolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_infix())
    }
}

struct InfixParser<'a> {
    syms: &'a [(usize, Sym)],
    pos: usize,
    end: usize,
}

impl InfixParser<'_> {
    fn peek(&self) -> Option<(usize, Sym)> {
        self.syms.get(self.pos).copied()
    }

    fn or(&mut self) -> Result<BoolFormula> {
        let mut f = self.and()?;
        while let Some((_, Sym::Or)) = self.peek() {
            self.pos += 1;
            f = BoolFormula::Or(Box::new(f), Box::new(self.and()?));
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<BoolFormula> {
        let mut f = self.unary()?;
        while let Some((_, Sym::And)) = self.peek() {
            self.pos += 1;
            f = BoolFormula::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<BoolFormula> {
        let (pos, sym) = self.peek().ok_or(Error::Parse { pos: self.end, msg: "unexpected end of input".into() })?;
        self.pos += 1;
        match sym {
            Sym::Zero => Ok(BoolFormula::Const(false)),
            Sym::One => Ok(BoolFormula::Const(true)),
            Sym::Not => Ok(BoolFormula::Not(Box::new(self.unary()?))),
            Sym::Open => {
                let f = self.or()?;
                match self.peek() {
                    Some((_, Sym::Close)) => {
                        self.pos += 1;
                        Ok(f)
                    }
                    Some((p, _)) => Err(Error::Parse { pos: p, msg: "expected `)`".into() }),
                    None => Err(Error::Parse { pos: self.end, msg: "missing `)`".into() }),
                }
            }
            _ => Err(Error::Parse { pos, msg: "expected an operand".into() }),
        }
    }
}
