//! Evaluators written independently of the library: a right-to-left prefix
//! stack machine for arithmetic formulas, string rewriting for Boolean
//! formulas and pointwise chasing for permutation words.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use tcbench_hardness::{Permutation, Semiring};

/// Right-to-left stack machine over the prefix token stream of the printed
/// S-expression.
pub fn stack_eval(text: &str, ring: Semiring, c: &[BigInt]) -> BigInt {
    let norm = |v: BigInt| match ring {
        Semiring::Integers => v,
        Semiring::Booleans => BigInt::from(u8::from(v != BigInt::from(0))),
        Semiring::Mod(m) => v.mod_floor(&BigInt::from(m)),
    };
    let spaced = text.replace(['(', ')'], " ");
    let toks: Vec<&str> = spaced.split_whitespace().collect();
    let mut stack: Vec<BigInt> = Vec::new();
    for t in toks.iter().rev() {
        match *t {
            "+" => {
                let a = stack.pop().unwrap();
                let b = stack.pop().unwrap();
                stack.push(if ring == Semiring::Booleans {
                    BigInt::from(u8::from(a + b > BigInt::from(0)))
                } else {
                    norm(a + b)
                });
            }
            "*" => {
                let a = stack.pop().unwrap();
                let b = stack.pop().unwrap();
                stack.push(norm(a * b));
            }
            "-" => {
                let a = stack.pop().unwrap();
                stack.push(if ring == Semiring::Booleans { BigInt::from(1) - a } else { norm(-a) });
            }
            v if v.starts_with('x') => stack.push(norm(c[v[1..].parse::<usize>().unwrap() - 1].clone())),
            v => stack.push(norm(v.parse().unwrap())),
        }
    }
    assert_eq!(stack.len(), 1);
    stack.pop().unwrap()
}

/// Rewrites innermost redexes of the infix string until one symbol is left.
pub fn rewrite_eval(infix: &str) -> bool {
    let rules = [
        ("¬0", "1"),
        ("¬1", "0"),
        ("(0∧0)", "0"),
        ("(0∧1)", "0"),
        ("(1∧0)", "0"),
        ("(1∧1)", "1"),
        ("(0∨0)", "0"),
        ("(0∨1)", "1"),
        ("(1∨0)", "1"),
        ("(1∨1)", "1"),
    ];
    let mut s = infix.to_string();
    while s.chars().count() > 1 {
        let before = s.clone();
        for (from, to) in rules {
            s = s.replace(from, to);
        }
        assert_ne!(s, before, "stuck at {s}");
    }
    s == "1"
}

/// `Π(x)` by following `x` through each permutation in turn.
pub fn chase(perms: &[Permutation]) -> Vec<usize> {
    (0..perms[0].n()).map(|x| perms.iter().fold(x, |y, p| p.images()[y])).collect()
}
