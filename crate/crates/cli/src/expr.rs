//! Infix expressions over p-bit floats.

use tcbench_core::elem::{exp_fp, log_fp, sigmoid_fp, silu_fp, softplus_fp, sqrt_fp};
use tcbench_core::fp::{fp_add, fp_div, fp_floor, fp_mul, fp_sub, parse_decimal, round_p, FpNumber};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(String),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(String, Box<Expr>),
}

pub const FUNCTIONS: [&str; 7] = ["floor", "exp", "log", "sqrt", "softplus", "silu", "sigmoid"];

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok<'_>)>, String> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            // exponent suffix such as 1e-3
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push((start, Tok::Num(&s[start..i])));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(&s[start..i])));
        } else if "+-*/()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?} at {i}"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.peek() == Some(Tok::Op(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected `{c}` at {}", self.at()))
        }
    }

    fn sum(&mut self) -> Result<Expr, String> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            self.pos += 1;
            lhs = Expr::Bin(c, Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            self.pos += 1;
            lhs = Expr::Bin(c, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.peek() == Some(Tok::Op('-')) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, String> {
        let at = self.at();
        match self.peek() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Lit(n.to_string()))
            }
            Some(Tok::Ident(f)) => {
                if !FUNCTIONS.contains(&f) {
                    return Err(format!("unknown function `{f}` at {at}"));
                }
                self.pos += 1;
                self.expect('(')?;
                let arg = self.sum()?;
                self.expect(')')?;
                Ok(Expr::Call(f.to_string(), Box::new(arg)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(format!("expected a number, function or `(` at {at}")),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr, String> {
    let mut p = Parser { toks: lex(s)?, pos: 0, len: s.len() };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input at {}", p.at()));
    }
    Ok(e)
}

/// Evaluates bottom-up, rounding every literal and every intermediate result
/// to `p` bits.
pub fn eval(e: &Expr, p: u32) -> tcbench_core::Result<FpNumber> {
    Ok(match e {
        Expr::Lit(s) => {
            let q = parse_decimal(s).ok_or_else(|| tcbench_core::Error::InvalidParams(format!("bad literal {s:?}")))?;
            round_p(&q, p)?
        }
        Expr::Neg(x) => eval(x, p)?.neg(),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, p)?, eval(b, p)?);
            match op {
                '+' => fp_add(&a, &b)?,
                '-' => fp_sub(&a, &b)?,
                '*' => fp_mul(&a, &b)?,
                _ => fp_div(&a, &b)?,
            }
        }
        Expr::Call(f, x) => {
            let x = eval(x, p)?;
            match f.as_str() {
                "floor" => fp_floor(&x)?,
                "exp" => exp_fp(&x)?,
                "log" => log_fp(&x)?,
                "sqrt" => sqrt_fp(&x)?,
                "softplus" => softplus_fp(&x)?,
                "silu" => silu_fp(&x)?,
                _ => sigmoid_fp(&x)?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_errors() {
        let e = parse("1+2*3").unwrap();
        assert_eq!(eval(&e, 8).unwrap().to_f64(), 7.0);
        assert_eq!(eval(&parse("-(1+1)*2").unwrap(), 8).unwrap().to_f64(), -4.0);
        // the definitional floor rounds to nearest, ties to even
        assert_eq!(eval(&parse("floor(2.5)").unwrap(), 8).unwrap().to_f64(), 2.0);
        assert_eq!(eval(&parse("floor(2.75)").unwrap(), 8).unwrap().to_f64(), 3.0);
        assert_eq!(eval(&parse("1e1/4").unwrap(), 8).unwrap().to_f64(), 2.5);
        for bad in ["", "1+", "foo(1)", "(1", "1 2", "1 $ 2", "exp 1"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        assert_eq!(eval(&parse("1/0").unwrap(), 8), Err(tcbench_core::Error::DivisionByZero));
    }
}
