//! The fixed enumeration of fan-in-2 AND/NOT circuits used for exhaustive
//! Barrington checks.
//!
//! Formulas of depth at most `d` over `n` inputs are built level by level:
//! level 0 holds the inputs and both constants, and level `d` adds `¬e` for
//! every `e` of level `d-1` and `e ∧ f` for every pair `e <= f` (by position)
//! of level `d-1`. Each formula appears once. Children are listed in
//! enumeration order, so `f ∧ e` is not generated separately.

use std::rc::Rc;

use tcbench_circuit::{Circuit, Gate, GateKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(usize),
    Const(bool),
    Not(Rc<Expr>),
    And(Rc<Expr>, Rc<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[bool]) -> bool {
        match self {
            Expr::Var(i) => x[*i],
            Expr::Const(b) => *b,
            Expr::Not(a) => !a.eval(x),
            Expr::And(a, b) => a.eval(x) && b.eval(x),
        }
    }

    /// Tree-shaped circuit: `n` INPUT gates, then the formula's gates in post-order.
    pub fn to_circuit(&self, n: usize) -> Circuit {
        let mut gates: Vec<Gate> = (0..n).map(|_| Gate::new(GateKind::Input, vec![])).collect();
        let out = self.emit(&mut gates);
        Circuit::new(gates, vec![out]).expect("post-order is topological")
    }

    fn emit(&self, gates: &mut Vec<Gate>) -> usize {
        let g = match self {
            Expr::Var(i) => return *i,
            Expr::Const(b) => Gate::new(if *b { GateKind::Const1 } else { GateKind::Const0 }, vec![]),
            Expr::Not(a) => {
                let x = a.emit(gates);
                Gate::new(GateKind::Not, vec![x])
            }
            Expr::And(a, b) => {
                let x = a.emit(gates);
                let y = b.emit(gates);
                Gate::new(GateKind::And, vec![x, y])
            }
        };
        gates.push(g);
        gates.len() - 1
    }
}

fn leaves(n: usize) -> Vec<Rc<Expr>> {
    let mut out: Vec<Rc<Expr>> = (0..n).map(|i| Rc::new(Expr::Var(i))).collect();
    out.push(Rc::new(Expr::Const(false)));
    out.push(Rc::new(Expr::Const(true)));
    out
}

/// The items of the next level from the previous one, lazily.
fn next_level(n: usize, prev: Rc<Vec<Rc<Expr>>>) -> impl Iterator<Item = Rc<Expr>> {
    let nots = {
        let prev = prev.clone();
        (0..prev.len()).map(move |i| Rc::new(Expr::Not(prev[i].clone())))
    };
    let ands = (0..prev.len()).flat_map(move |i| {
        let prev = prev.clone();
        (i..prev.len()).map(move |j| Rc::new(Expr::And(prev[i].clone(), prev[j].clone())))
    });
    leaves(n).into_iter().chain(nots).chain(ands)
}

/// Every formula of depth at most `depth` over `n` inputs, in the fixed order.
pub fn formulas(n: usize, depth: usize) -> Box<dyn Iterator<Item = Rc<Expr>>> {
    if depth == 0 {
        return Box::new(leaves(n).into_iter());
    }
    let mut level = Rc::new(leaves(n));
    for _ in 1..depth {
        level = Rc::new(next_level(n, level).collect());
    }
    Box::new(next_level(n, level))
}

/// Number of formulas `formulas(n, depth)` yields.
pub fn family_size(n: usize, depth: usize) -> usize {
    let mut count = n + 2;
    for _ in 0..depth {
        count = n + 2 + count + count * (count + 1) / 2;
    }
    count
}
