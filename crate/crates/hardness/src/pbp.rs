//! Width-5 permutation branching programs and Barrington's translation of
//! fan-in-2 AND/NOT circuits into them.

use std::fmt;
use std::sync::OnceLock;

use tcbench_circuit::{Circuit, Gate, GateKind};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// A permutation of five points, by 0-based images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct S5(pub [u8; 5]);

impl S5 {
    pub const IDENTITY: S5 = S5([0, 1, 2, 3, 4]);
    /// The accepting cycle (1 2 3 4 5).
    pub const ACCEPT: S5 = S5([1, 2, 3, 4, 0]);

    /// Apply `self`, then `next`.
    pub fn then(self, next: S5) -> S5 {
        S5(self.0.map(|i| next.0[i as usize]))
    }

    pub fn inverse(self) -> S5 {
        let mut inv = [0u8; 5];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        S5(inv)
    }

    pub fn is_five_cycle(self) -> bool {
        let mut x = 0u8;
        for step in 1..=5 {
            x = self.0[x as usize];
            if x == 0 {
                return step == 5;
            }
        }
        false
    }

    /// `θ x θ⁻¹`: maps `θ(i)` to `θ(x(i))`.
    pub fn conjugate(self, theta: S5) -> S5 {
        let mut out = [0u8; 5];
        for i in 0..5 {
            out[theta.0[i] as usize] = theta.0[self.0[i] as usize];
        }
        S5(out)
    }

    /// A `θ` with `θ from θ⁻¹ = to`, both 5-cycles.
    fn conjugator(from: S5, to: S5) -> S5 {
        let mut theta = [0u8; 5];
        let (mut a, mut g) = (0u8, 0u8);
        for _ in 0..5 {
            theta[a as usize] = g;
            a = from.0[a as usize];
            g = to.0[g as usize];
        }
        S5(theta)
    }

    pub fn to_permutation(self) -> Permutation {
        Permutation::new(self.0.iter().map(|&i| i as usize).collect()).expect("valid S5 element")
    }

    pub fn from_permutation(p: &Permutation) -> Result<S5> {
        if p.n() != 5 {
            return Err(Error::DomainMismatch(p.n(), 5));
        }
        let mut out = [0u8; 5];
        for (o, &i) in out.iter_mut().zip(p.images()) {
            *o = i as u8;
        }
        Ok(S5(out))
    }
}

impl fmt::Display for S5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.0 {
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

/// Yields `on_one` when variable `var` is 1 and `on_zero` otherwise. An
/// instruction with `on_one == on_zero` is constant and reads nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    pub var: usize,
    pub on_one: S5,
    pub on_zero: S5,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbpProgram {
    pub instructions: Vec<Instruction>,
    pub accept: S5,
}

impl PbpProgram {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Composition of the selected permutations, first instruction first.
    pub fn run(&self, assignment: &[bool]) -> Result<S5> {
        let mut acc = S5::IDENTITY;
        for ins in &self.instructions {
            let step = if ins.on_one == ins.on_zero {
                ins.on_one
            } else {
                let bit =
                    *assignment.get(ins.var).ok_or(Error::IndexOutOfRange { index: ins.var, len: assignment.len() })?;
                if bit {
                    ins.on_one
                } else {
                    ins.on_zero
                }
            };
            acc = acc.then(step);
        }
        Ok(acc)
    }
}

/// 1 iff the program composes to its accepting cycle.
pub fn eval_pbp(prog: &PbpProgram, assignment: &[bool]) -> Result<bool> {
    Ok(prog.run(assignment)? == prog.accept)
}

impl fmt::Display for PbpProgram {
    /// One `var on_one on_zero` line per instruction (0-based variable).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ACCEPT {}", self.accept)?;
        for ins in &self.instructions {
            writeln!(f, "{} {} {}", ins.var, ins.on_one, ins.on_zero)?;
        }
        Ok(())
    }
}

/// Two 5-cycles whose commutator is a 5-cycle, and that commutator.
fn commutator_base() -> (S5, S5, S5) {
    static BASE: OnceLock<(S5, S5, S5)> = OnceLock::new();
    *BASE.get_or_init(|| {
        let cycles: Vec<S5> = permutations5().into_iter().filter(|p| p.is_five_cycle()).collect();
        for &a in &cycles {
            for &b in &cycles {
                let c = a.then(b).then(a.inverse()).then(b.inverse());
                if c.is_five_cycle() {
                    return (a, b, c);
                }
            }
        }
        unreachable!("S5 has 5-cycles with a 5-cycle commutator")
    })
}

fn permutations5() -> Vec<S5> {
    let mut out = Vec::with_capacity(120);
    let mut cur = [0u8; 5];
    fn go(k: usize, used: u8, cur: &mut [u8; 5], out: &mut Vec<S5>) {
        if k == 5 {
            out.push(S5(*cur));
            return;
        }
        for v in 0..5u8 {
            if used & (1 << v) == 0 {
                cur[k] = v;
                go(k + 1, used | (1 << v), cur, out);
            }
        }
    }
    go(0, 0, &mut cur, &mut out);
    out
}

/// Program that yields the 5-cycle `target` when the circuit's single
/// output is 1 and the identity when it is 0. Gates must be inputs,
/// constants, NOT, or AND of fan-in exactly 2; a depth-`d` circuit gives
/// length at most `4^d`.
pub fn barrington_transform(c: &Circuit) -> Result<PbpProgram> {
    if c.outputs().len() != 1 {
        return Err(Error::InvalidSize(format!("need exactly one output, circuit has {}", c.outputs().len())));
    }
    for (id, g) in c.gates().iter().enumerate() {
        let ok = match g.kind {
            GateKind::Input | GateKind::Const0 | GateKind::Const1 | GateKind::Not => true,
            GateKind::And => g.inputs.len() == 2,
            _ => false,
        };
        if !ok {
            return Err(Error::UnsupportedGate { id, kind: format!("{}/{}", g.kind.name(), g.inputs.len()) });
        }
    }
    let mut var_of = vec![0usize; c.gates().len()];
    for (v, &id) in c.inputs().iter().enumerate() {
        var_of[id] = v;
    }
    let mut out = Vec::new();
    build(c, &var_of, c.outputs()[0], S5::ACCEPT, &mut out);
    Ok(PbpProgram { instructions: out, accept: S5::ACCEPT })
}

fn build(c: &Circuit, var_of: &[usize], id: usize, target: S5, out: &mut Vec<Instruction>) {
    let g = &c.gates()[id];
    match g.kind {
        GateKind::Input => out.push(Instruction { var: var_of[id], on_one: target, on_zero: S5::IDENTITY }),
        GateKind::Const0 => out.push(Instruction { var: 0, on_one: S5::IDENTITY, on_zero: S5::IDENTITY }),
        GateKind::Const1 => out.push(Instruction { var: 0, on_one: target, on_zero: target }),
        GateKind::Not => {
            // yields target⁻¹ or the identity; then append target
            build(c, var_of, g.inputs[0], target.inverse(), out);
            let last = out.last_mut().expect("subprogram is nonempty");
            last.on_one = last.on_one.then(target);
            last.on_zero = last.on_zero.then(target);
        }
        GateKind::And => {
            let (a0, b0, c0) = commutator_base();
            let theta = S5::conjugator(c0, target);
            let (a, b) = (a0.conjugate(theta), b0.conjugate(theta));
            build(c, var_of, g.inputs[0], a, out);
            build(c, var_of, g.inputs[1], b, out);
            build(c, var_of, g.inputs[0], a.inverse(), out);
            build(c, var_of, g.inputs[1], b.inverse(), out);
        }
        _ => unreachable!("gate kinds checked before building"),
    }
}

/// Rewrites OR by De Morgan and splits wide AND/OR into balanced fan-in-2
/// trees, so the circuit fits [`barrington_transform`]. THRESHOLD gates are
/// rejected.
pub fn lower_to_and_not(c: &Circuit) -> Result<Circuit> {
    let mut gates: Vec<Gate> = Vec::new();
    let mut map = Vec::with_capacity(c.gates().len());
    let push = |gates: &mut Vec<Gate>, kind, inputs| {
        gates.push(Gate::new(kind, inputs));
        gates.len() - 1
    };
    fn and_tree(gates: &mut Vec<Gate>, xs: &[usize]) -> usize {
        if xs.len() == 1 {
            return xs[0];
        }
        let (l, r) = xs.split_at(xs.len() / 2);
        let a = and_tree(gates, l);
        let b = and_tree(gates, r);
        gates.push(Gate::new(GateKind::And, vec![a, b]));
        gates.len() - 1
    }
    for (id, g) in c.gates().iter().enumerate() {
        let ins: Vec<usize> = g.inputs.iter().map(|&i| map[i]).collect();
        let new = match g.kind {
            GateKind::Input | GateKind::Const0 | GateKind::Const1 => push(&mut gates, g.kind, vec![]),
            GateKind::Not => push(&mut gates, GateKind::Not, ins),
            GateKind::And => and_tree(&mut gates, &ins),
            GateKind::Or => {
                let neg: Vec<usize> = ins.iter().map(|&i| push(&mut gates, GateKind::Not, vec![i])).collect();
                let a = and_tree(&mut gates, &neg);
                push(&mut gates, GateKind::Not, vec![a])
            }
            GateKind::Threshold(_) => return Err(Error::UnsupportedGate { id, kind: "THRESHOLD".into() }),
        };
        map.push(new);
    }
    let outputs = c.outputs().iter().map(|&o| map[o]).collect();
    Ok(Circuit::new(gates, outputs).expect("lowering keeps topological order"))
}
