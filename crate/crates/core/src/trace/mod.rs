//! Symbolic depth calculus over traced computations.
//!
//! Every primitive is charged one named depth constant. A traced run is a DAG
//! of such events and its depth is the heaviest path, kept as a linear
//! combination of constants rather than a number.

mod registry;
mod report;
mod tracer;

pub use registry::{compositional_mamba, formula_registry, Formula};
pub use report::{
    default_grid, depth_report, depth_report_for, trace_components, DepthReport, FormulaCheck, ShapeRow, COMPONENTS,
};
pub use tracer::{TVal, Tracer};

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DepthConstant {
    Std,
    Oplus,
    Otimes,
    Exp,
    Sqrt,
    Log,
    Sp,
    Dup,
}

impl DepthConstant {
    pub const ALL: [DepthConstant; 8] = [
        DepthConstant::Std,
        DepthConstant::Oplus,
        DepthConstant::Otimes,
        DepthConstant::Exp,
        DepthConstant::Sqrt,
        DepthConstant::Log,
        DepthConstant::Sp,
        DepthConstant::Dup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DepthConstant::Std => "d_std",
            DepthConstant::Oplus => "d_oplus",
            DepthConstant::Otimes => "d_otimes",
            DepthConstant::Exp => "d_exp",
            DepthConstant::Sqrt => "d_sqrt",
            DepthConstant::Log => "d_log",
            DepthConstant::Sp => "d_sp",
            DepthConstant::Dup => "d_dup",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }

    /// `d_log` and `d_sp` are themselves sums of other constants.
    pub fn is_composite(self) -> bool {
        matches!(self, DepthConstant::Log | DepthConstant::Sp)
    }
}

/// Nonnegative integer combination of depth constants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DepthExpr([u64; 8]);

impl DepthExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(c: DepthConstant) -> Self {
        Self::term(c, 1)
    }

    pub fn term(c: DepthConstant, k: u64) -> Self {
        let mut e = Self::zero();
        e.0[c.index()] = k;
        e
    }

    pub fn from_terms(terms: &[(DepthConstant, u64)]) -> Self {
        terms.iter().fold(Self::zero(), |acc, &(c, k)| acc + Self::term(c, k))
    }

    pub fn coeff(&self, c: DepthConstant) -> u64 {
        self.0[c.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn scale(&self, k: u64) -> Self {
        Self(self.0.map(|x| x * k))
    }

    /// Coefficient-wise maximum.
    pub fn join(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, x) in out.0.iter_mut().zip(other.0) {
            *o = (*o).max(x);
        }
        out
    }

    /// Coefficient-wise `<=`: a bound under every nonnegative assignment.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0).all(|(&a, b)| a <= b)
    }

    /// `self - other`, saturating per coefficient.
    pub fn saturating_sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, x) in out.0.iter_mut().zip(other.0) {
            *o = o.saturating_sub(x);
        }
        out
    }

    /// Replaces `d_sp` and `d_log` by their definitions in base constants.
    pub fn expand(&self) -> Self {
        use DepthConstant::*;
        let log = Self::from_terms(&[(Oplus, 2), (Otimes, 2), (Std, 3)]);
        let sp = Self::from_terms(&[(Exp, 1), (Std, 1)]) + log;
        let mut out = *self;
        let (nl, ns) = (out.0[Log.index()], out.0[Sp.index()]);
        out.0[Log.index()] = 0;
        out.0[Sp.index()] = 0;
        out + log.scale(nl) + sp.scale(ns)
    }

    pub fn evaluate(&self, a: &Assignment) -> u64 {
        self.0.iter().zip(a.0).map(|(&k, w)| k * w).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (DepthConstant, u64)> + '_ {
        DepthConstant::ALL.into_iter().map(|c| (c, self.coeff(c))).filter(|&(_, k)| k != 0)
    }

    pub fn to_map(&self) -> BTreeMap<String, u64> {
        self.terms().map(|(c, k)| (c.name().to_string(), k)).collect()
    }
}

impl Add for DepthExpr {
    type Output = DepthExpr;
    fn add(mut self, rhs: DepthExpr) -> DepthExpr {
        for (o, x) in self.0.iter_mut().zip(rhs.0) {
            *o += x;
        }
        self
    }
}

impl fmt::Display for DepthExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms()
            .map(|(c, k)| if k == 1 { c.name().to_string() } else { format!("{k}·{}", c.name()) })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Serialize for DepthExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DepthExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, u64>::deserialize(d)?;
        let mut e = DepthExpr::zero();
        for (k, v) in map {
            let c = DepthConstant::from_name(&k)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown depth constant {k}")))?;
            e = e + DepthExpr::term(c, v);
        }
        Ok(e)
    }
}

/// Numeric weights for the depth constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment(pub [u64; 8]);

impl Default for Assignment {
    /// One everywhere except `d_dup`, which is wiring and costs nothing.
    fn default() -> Self {
        let mut w = [1; 8];
        w[DepthConstant::Dup.index()] = 0;
        Assignment(w)
    }
}

impl Assignment {
    pub fn uniform(k: u64) -> Self {
        Assignment([k; 8])
    }

    pub fn weight(&self, c: DepthConstant) -> u64 {
        self.0[c.index()]
    }

    /// Parses `d_std=1,d_exp=3` style lists; `all=k` sets every constant and
    /// later entries override earlier ones. Unlisted constants keep the
    /// default.
    pub fn parse(s: &str) -> Result<Self> {
        let mut a = Assignment::default();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected name=value, got {item:?}")))?;
            let v: u64 = v.trim().parse().map_err(|_| Error::InvalidParams(format!("bad weight in {item:?}")))?;
            match k.trim() {
                "all" => a = Assignment::uniform(v),
                name => {
                    let c = DepthConstant::from_name(name)
                        .ok_or_else(|| Error::InvalidParams(format!("unknown depth constant {name:?}")))?;
                    a.0[c.index()] = v;
                }
            }
        }
        Ok(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Leaf,
    Add,
    Mul,
    Div,
    Floor,
    Compare,
    MulConst,
    Normalize,
    RecipGuarded,
    MulGuarded,
    Gather,
    IterAdd,
    IterMul,
    Exp,
    Sqrt,
    Broadcast,
    Carry,
    Barrier,
}

impl OpKind {
    pub fn cost(self) -> DepthExpr {
        use OpKind::*;
        match self {
            Add | Mul | Div | Floor | Compare | MulConst | Normalize | RecipGuarded | MulGuarded | Gather => {
                DepthExpr::unit(DepthConstant::Std)
            }
            IterAdd => DepthExpr::unit(DepthConstant::Oplus),
            IterMul => DepthExpr::unit(DepthConstant::Otimes),
            Exp => DepthExpr::unit(DepthConstant::Exp),
            Sqrt => DepthExpr::unit(DepthConstant::Sqrt),
            Broadcast => DepthExpr::unit(DepthConstant::Dup),
            Leaf | Carry | Barrier => DepthExpr::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub op: OpKind,
    pub cost: DepthExpr,
    pub preds: Vec<usize>,
    /// Loop-carried source: a value from the previous step of a recurrence.
    /// Counted by [`CostTrace::sequential_depth`] only.
    pub carry: Option<usize>,
}

impl TraceNode {
    pub fn new(op: OpKind, preds: Vec<usize>) -> Self {
        Self { op, cost: op.cost(), preds, carry: None }
    }
}

/// An executed computation as a DAG of charged events.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTrace {
    nodes: Vec<TraceNode>,
    outputs: Vec<usize>,
}

impl CostTrace {
    /// Checks that every reference is in range. Order is free; cycles are
    /// reported by the depth queries.
    pub fn from_nodes(nodes: Vec<TraceNode>, outputs: Vec<usize>) -> Result<Self> {
        let n = nodes.len();
        let bad = |i: usize| i >= n;
        for (i, node) in nodes.iter().enumerate() {
            if node.preds.iter().copied().any(bad) || node.carry.is_some_and(bad) {
                return Err(Error::InvalidParams(format!("node {i} refers past the end of the trace")));
            }
        }
        if outputs.iter().copied().any(bad) {
            return Err(Error::InvalidParams("output refers past the end of the trace".into()));
        }
        Ok(Self { nodes, outputs })
    }

    pub fn nodes(&self) -> &[TraceNode] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of charged events (leaves, carries and barriers excluded).
    pub fn size(&self) -> usize {
        self.nodes.iter().filter(|n| !n.cost.is_zero()).count()
    }

    pub fn op_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            *out.entry(format!("{:?}", n.op)).or_default() += 1;
        }
        out
    }

    fn topo_order(&self, with_carry: bool) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for (i, node) in self.nodes.iter().enumerate() {
            let carry = if with_carry { node.carry } else { None };
            for p in node.preds.iter().copied().chain(carry) {
                indeg[i] += 1;
                succ[p].push(i);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &s in &succ[i] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push_back(s);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(Error::CycleDetected(stuck));
        }
        Ok(order)
    }

    /// Maximal path weights ending at each node, as antichains.
    fn frontiers(&self, with_carry: bool) -> Result<Vec<Vec<DepthExpr>>> {
        let order = self.topo_order(with_carry)?;
        let mut front: Vec<Vec<DepthExpr>> = vec![Vec::new(); self.nodes.len()];
        for i in order {
            let node = &self.nodes[i];
            let carry = if with_carry { node.carry } else { None };
            let mut cands: Vec<DepthExpr> = Vec::new();
            for p in node.preds.iter().copied().chain(carry) {
                cands.extend(front[p].iter().copied());
            }
            if cands.is_empty() {
                cands.push(DepthExpr::zero());
            }
            front[i] = maximal(cands.into_iter().map(|d| d + node.cost).collect());
        }
        Ok(front)
    }

    fn sinks(&self) -> Vec<usize> {
        if self.outputs.is_empty() {
            (0..self.nodes.len()).collect()
        } else {
            self.outputs.clone()
        }
    }

    /// Every maximal path weight ending at an output (or anywhere, when no
    /// output is marked). Loop-carried edges are not data paths here.
    pub fn critical_frontier(&self) -> Result<Vec<DepthExpr>> {
        let front = self.frontiers(false)?;
        let all = self.sinks().into_iter().flat_map(|i| front[i].clone()).collect();
        Ok(maximal(all))
    }

    /// Least expression bounding every path. When the frontier has one
    /// element this is the heaviest path itself.
    pub fn critical_depth(&self) -> Result<DepthExpr> {
        Ok(self.critical_frontier()?.iter().fold(DepthExpr::zero(), |acc, d| acc.join(d)))
    }

    /// Heaviest path under a numeric assignment.
    pub fn critical_depth_at(&self, a: &Assignment) -> Result<u64> {
        Ok(self.critical_frontier()?.iter().map(|d| d.evaluate(a)).max().unwrap_or(0))
    }

    /// Depth with loop-carried edges followed: the cost of running a
    /// recurrence step after step.
    pub fn sequential_depth(&self) -> Result<DepthExpr> {
        let front = self.frontiers(true)?;
        let all: Vec<DepthExpr> = self.sinks().into_iter().flat_map(|i| front[i].clone()).collect();
        Ok(maximal(all).iter().fold(DepthExpr::zero(), |acc, d| acc.join(d)))
    }
}

/// Drops duplicates and dominated expressions.
fn maximal(mut xs: Vec<DepthExpr>) -> Vec<DepthExpr> {
    xs.sort_unstable();
    xs.dedup();
    let keep: Vec<bool> = (0..xs.len()).map(|i| !xs.iter().enumerate().any(|(j, y)| j != i && xs[i].le(y))).collect();
    xs.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    WithinBound,
    Exceeds(DepthExpr),
    NotComparable,
}

impl Verdict {
    pub fn is_within(&self) -> bool {
        matches!(self, Verdict::WithinBound)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::WithinBound => write!(f, "WithinBound"),
            Verdict::Exceeds(d) => write!(f, "Exceeds({d})"),
            Verdict::NotComparable => write!(f, "NotComparable"),
        }
    }
}

/// Compares a traced depth against a formula, both expanded to base
/// constants.
pub fn check_depth(traced: &DepthExpr, formula: &DepthExpr) -> Verdict {
    let (t, f) = (traced.expand(), formula.expand());
    if t.le(&f) {
        Verdict::WithinBound
    } else if f.le(&t) {
        Verdict::Exceeds(t.saturating_sub(&f))
    } else {
        Verdict::NotComparable
    }
}
