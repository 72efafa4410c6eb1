//! Permutations of `[n]`, composition and the word problem.
//!
//! Text form is one-line notation with 1-based images, e.g. `23451` for the
//! 5-cycle (1 2 3 4 5); domains up to 9 points use one digit per image,
//! larger ones separate images with commas.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// From 0-based images.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::NotAPermutation(format!("{images:?}")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// From disjoint cycles in 1-based notation, e.g. `(1 2 3)(4 5)`.
    pub fn from_cycles(s: &str, n: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let bad = |m: &str| Error::Parse { pos: 0, msg: m.to_string() };
        for cycle in s.split(')').map(str::trim).filter(|c| !c.is_empty()) {
            let body = cycle.strip_prefix('(').ok_or_else(|| bad("cycle must start with `(`"))?;
            let pts = body
                .split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| match t.parse::<usize>() {
                    Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                    _ => Err(bad(&format!("bad point `{t}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            for (k, &x) in pts.iter().enumerate() {
                images[x] = pts[(k + 1) % pts.len()];
            }
        }
        Self::new(images)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    /// `next ∘ self`: apply `self`, then `next`.
    pub fn then(&self, next: &Permutation) -> Result<Permutation> {
        if self.n() != next.n() {
            return Err(Error::DomainMismatch(self.n(), next.n()));
        }
        Ok(Permutation { images: self.images.iter().map(|&i| next.images[i]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imgs: Vec<String> = self.images.iter().map(|i| (i + 1).to_string()).collect();
        f.write_str(&imgs.join(if self.n() <= 9 { "" } else { "," }))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> =
            if s.contains(',') { s.split(',').collect() } else { s.split("").filter(|t| !t.is_empty()).collect() };
        let images = toks
            .iter()
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Parse { pos: 0, msg: format!("bad image `{t}` in `{s}`") }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(images)
    }
}

/// `π_k ∘ ... ∘ π_1`: the first permutation is applied first.
pub fn compose(perms: &[Permutation]) -> Result<Permutation> {
    let first = perms.first().ok_or_else(|| Error::InvalidSize("empty permutation sequence".into()))?;
    perms[1..].iter().try_fold(first.clone(), |acc, p| acc.then(p))
}

/// 1 iff the composition is the identity.
pub fn word_problem(perms: &[Permutation]) -> Result<bool> {
    Ok(compose(perms)?.is_identity())
}

pub fn parse_word(line: &str) -> Result<Vec<Permutation>> {
    line.split_whitespace().map(str::parse).collect()
}

pub fn format_word(perms: &[Permutation]) -> String {
    perms.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}
