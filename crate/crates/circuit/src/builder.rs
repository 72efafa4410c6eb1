//! Circuit construction with constant folding and structural sharing, plus
//! the constant-depth arithmetic blocks the float primitives are made of.
//!
//! Wires are gate ids. Multi-bit values are `Vec<usize>`, least significant
//! bit first.

use std::collections::HashMap;

use crate::ir::{Circuit, Gate, GateKind};

#[derive(Debug, Default)]
pub struct Builder {
    gates: Vec<Gate>,
    memo: HashMap<Gate, usize>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self) -> usize {
        self.gates.push(Gate::new(GateKind::Input, vec![]));
        self.gates.len() - 1
    }

    pub fn inputs(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.input()).collect()
    }

    fn intern(&mut self, g: Gate) -> usize {
        if let Some(&id) = self.memo.get(&g) {
            return id;
        }
        self.gates.push(g.clone());
        let id = self.gates.len() - 1;
        self.memo.insert(g, id);
        id
    }

    pub fn zero(&mut self) -> usize {
        self.intern(Gate::new(GateKind::Const0, vec![]))
    }

    pub fn one(&mut self) -> usize {
        self.intern(Gate::new(GateKind::Const1, vec![]))
    }

    pub fn constant(&mut self, v: bool) -> usize {
        if v {
            self.one()
        } else {
            self.zero()
        }
    }

    fn kind(&self, w: usize) -> GateKind {
        self.gates[w].kind
    }

    pub fn is_zero(&self, w: usize) -> bool {
        self.kind(w) == GateKind::Const0
    }

    pub fn not(&mut self, x: usize) -> usize {
        match self.kind(x) {
            GateKind::Const0 => self.one(),
            GateKind::Const1 => self.zero(),
            GateKind::Not => self.gates[x].inputs[0],
            _ => self.intern(Gate::new(GateKind::Not, vec![x])),
        }
    }

    pub fn and(&mut self, xs: &[usize]) -> usize {
        let mut ins = Vec::with_capacity(xs.len());
        for &x in xs {
            match self.kind(x) {
                GateKind::Const0 => return self.zero(),
                GateKind::Const1 => {}
                _ => ins.push(x),
            }
        }
        ins.sort_unstable();
        ins.dedup();
        match ins.len() {
            0 => self.one(),
            1 => ins[0],
            _ => self.intern(Gate::new(GateKind::And, ins)),
        }
    }

    pub fn or(&mut self, xs: &[usize]) -> usize {
        let mut ins = Vec::with_capacity(xs.len());
        for &x in xs {
            match self.kind(x) {
                GateKind::Const1 => return self.one(),
                GateKind::Const0 => {}
                _ => ins.push(x),
            }
        }
        ins.sort_unstable();
        ins.dedup();
        match ins.len() {
            0 => self.zero(),
            1 => ins[0],
            _ => self.intern(Gate::new(GateKind::Or, ins)),
        }
    }

    /// At least `k` of `xs`, counted with multiplicity.
    pub fn threshold(&mut self, k: usize, xs: &[usize]) -> usize {
        let mut k = k as i64;
        let mut ins = Vec::with_capacity(xs.len());
        for &x in xs {
            match self.kind(x) {
                GateKind::Const1 => k -= 1,
                GateKind::Const0 => {}
                _ => ins.push(x),
            }
        }
        if k <= 0 {
            return self.one();
        }
        if k as usize > ins.len() {
            return self.zero();
        }
        if k == 1 {
            return self.or(&ins);
        }
        if k as usize == ins.len() {
            return self.and(&ins);
        }
        ins.sort_unstable();
        self.intern(Gate::new(GateKind::Threshold(k as u32), ins))
    }

    pub fn and2(&mut self, a: usize, b: usize) -> usize {
        self.and(&[a, b])
    }

    pub fn or2(&mut self, a: usize, b: usize) -> usize {
        self.or(&[a, b])
    }

    pub fn xor(&mut self, a: usize, b: usize) -> usize {
        self.count(&[a, b])[0]
    }

    /// `s ? a : b`
    pub fn mux(&mut self, s: usize, a: usize, b: usize) -> usize {
        let ns = self.not(s);
        let x = self.and2(s, a);
        let y = self.and2(ns, b);
        self.or2(x, y)
    }

    /// Binary value of the number of set wires, from threshold gates
    /// `[count >= a]`: bit t of the count is an alternating sum of those
    /// over the intervals where bit t is set, which is one more threshold.
    pub fn count(&mut self, xs: &[usize]) -> Vec<usize> {
        let xs: Vec<usize> = xs.iter().copied().filter(|&x| !self.is_zero(x)).collect();
        let h = xs.len();
        match h {
            0 => return vec![self.zero()],
            1 => return xs,
            _ => {}
        }
        let at_least: Vec<usize> = (0..=h).map(|a| if a == 0 { usize::MAX } else { self.threshold(a, &xs) }).collect();
        let nbits = usize::BITS as usize - h.leading_zeros() as usize;
        (0..nbits)
            .map(|t| {
                let step = 1usize << t;
                let mut terms = Vec::new();
                let mut subtracted = 0;
                let mut a = step;
                while a <= h {
                    terms.push(at_least[a]);
                    if a + step <= h {
                        let nb = self.not(at_least[a + step]);
                        terms.push(nb);
                        subtracted += 1;
                    }
                    a += 2 * step;
                }
                self.threshold(1 + subtracted, &terms)
            })
            .collect()
    }

    /// Sum of rows modulo `2^width` by column counting. Each round replaces
    /// the rows by the binary column counts; `rounds` fixes how many are run
    /// (so depth does not depend on the number of rows), otherwise rounds
    /// continue until two rows are left. Two rows are then added by
    /// carry lookahead.
    pub fn add_rows(&mut self, rows: &[Vec<usize>], width: usize, rounds: Option<usize>) -> Vec<usize> {
        let mut rows: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.resize(width, self.zero());
                r.truncate(width);
                r
            })
            .collect();
        let mut done = 0;
        while rounds.map_or(rows.len() > 2, |n| done < n) {
            let mut next: Vec<Vec<usize>> = Vec::new();
            for j in 0..width {
                let column: Vec<usize> = rows.iter().map(|r| r[j]).collect();
                for (t, bit) in self.count(&column).into_iter().enumerate() {
                    if t >= next.len() {
                        next.push(vec![self.zero(); width]);
                    }
                    if j + t < width {
                        next[t][j + t] = bit;
                    }
                }
            }
            next.retain(|r| r.iter().any(|&w| !self.is_zero(w)));
            rows = next;
            done += 1;
        }
        assert!(rows.len() <= 2, "row reduction left {} rows", rows.len());
        match rows.len() {
            0 => vec![self.zero(); width],
            1 => rows.pop().unwrap(),
            _ => self.add2(&rows[0], &rows[1]),
        }
    }

    /// Two-operand sum modulo `2^len` with lookahead carries.
    pub fn add2(&mut self, a: &[usize], b: &[usize]) -> Vec<usize> {
        let n = a.len();
        let gen: Vec<usize> = (0..n).map(|i| self.and2(a[i], b[i])).collect();
        let prop: Vec<usize> = (0..n).map(|i| self.or2(a[i], b[i])).collect();
        (0..n)
            .map(|j| {
                let chains: Vec<usize> = (0..j)
                    .map(|i| {
                        let mut t = vec![gen[i]];
                        t.extend_from_slice(&prop[i + 1..j]);
                        self.and(&t)
                    })
                    .collect();
                let carry = self.or(&chains);
                self.count(&[a[j], b[j], carry])[0]
            })
            .collect()
    }

    /// `x XOR (s AND any lower bit of x)`: the two's complement negation of
    /// `x` when `s` is set, `x` otherwise.
    pub fn negate_if(&mut self, s: usize, x: &[usize]) -> Vec<usize> {
        (0..x.len())
            .map(|i| {
                let below = self.or(&x[..i]);
                let flip = self.and2(s, below);
                self.xor(x[i], flip)
            })
            .collect()
    }

    /// `x <= y` for two's complement values of equal width.
    pub fn le_signed(&mut self, x: &[usize], y: &[usize]) -> usize {
        let n = x.len();
        let mut xs = x.to_vec();
        let mut ys = y.to_vec();
        // flipping the sign bits turns the signed order into the unsigned one
        xs[n - 1] = self.not(x[n - 1]);
        ys[n - 1] = self.not(y[n - 1]);
        let eq: Vec<usize> = (0..n)
            .map(|i| {
                let d = self.xor(xs[i], ys[i]);
                self.not(d)
            })
            .collect();
        let wins: Vec<usize> = (0..n)
            .map(|j| {
                let ny = self.not(ys[j]);
                let mut t = vec![xs[j], ny];
                t.extend_from_slice(&eq[j + 1..]);
                self.and(&t)
            })
            .collect();
        let gt = self.or(&wins);
        self.not(gt)
    }

    /// One-hot decode of a two's complement field: `(value, wire)` for every
    /// value the field can hold.
    pub fn decode_signed(&mut self, bits: &[usize]) -> Vec<(i64, usize)> {
        let n = bits.len() as u32;
        let neg: Vec<usize> = bits.iter().map(|&b| self.not(b)).collect();
        (0..1u64 << n)
            .map(|pattern| {
                let lits: Vec<usize> =
                    (0..n as usize).map(|i| if pattern >> i & 1 == 1 { bits[i] } else { neg[i] }).collect();
                let v = if pattern >> (n - 1) & 1 == 1 { pattern as i64 - (1i64 << n) } else { pattern as i64 };
                (v, self.and(&lits))
            })
            .collect()
    }

    pub fn finish(self, outputs: Vec<usize>) -> Circuit {
        Circuit::new(self.gates, outputs).expect("builder emits gates in topological order")
    }
}
