use std::cmp::Ordering;

use crate::arith::{Arith, FpSteps, PBit};
use crate::elem;
use crate::error::Result;
use crate::fp::{self, FpNumber, Rational};

use super::{CostTrace, OpKind, TraceNode};

/// A p-bit value together with the trace node that produced it. Constants
/// and inputs have no node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TVal {
    pub value: FpNumber,
    pub node: Option<usize>,
}

#[derive(Clone, Debug, Default)]
struct Scope {
    floor: Option<usize>,
    since: Vec<usize>,
}

/// The p-bit backend, recording every charged operation.
///
/// Barriers order stages inside the innermost scope only, so independent
/// branches computed in sibling scopes stay parallel.
#[derive(Clone, Debug)]
pub struct Tracer {
    inner: PBit,
    nodes: Vec<TraceNode>,
    scopes: Vec<Scope>,
    outputs: Vec<usize>,
}

impl Tracer {
    pub fn new(p: u32) -> Self {
        Self { inner: PBit::new(p), nodes: Vec::new(), scopes: vec![Scope::default()], outputs: Vec::new() }
    }

    pub fn precision(&self) -> u32 {
        self.inner.p
    }

    /// An untraced input value.
    pub fn input(&self, value: FpNumber) -> TVal {
        TVal { value, node: None }
    }

    pub fn mark_output(&mut self, v: &TVal) {
        if let Some(n) = v.node {
            self.outputs.push(n);
        }
    }

    pub fn finish(self) -> CostTrace {
        CostTrace { nodes: self.nodes, outputs: self.outputs }
    }

    fn scope(&mut self) -> &mut Scope {
        self.scopes.last_mut().expect("root scope is never popped")
    }

    fn push(&mut self, op: OpKind, preds: &[&TVal]) -> usize {
        let floor = self.scope().floor;
        let mut ps: Vec<usize> = preds.iter().filter_map(|v| v.node).chain(floor).collect();
        ps.sort_unstable();
        ps.dedup();
        let id = self.nodes.len();
        self.nodes.push(TraceNode::new(op, ps));
        self.scope().since.push(id);
        id
    }

    fn emit(&mut self, op: OpKind, preds: &[&TVal], value: FpNumber) -> TVal {
        let node = Some(self.push(op, preds));
        TVal { value, node }
    }

    pub fn floor(&mut self, x: &TVal) -> Result<TVal> {
        let v = fp::fp_floor(&x.value)?;
        Ok(self.emit(OpKind::Floor, &[x], v))
    }

    pub fn compare(&mut self, a: &TVal, b: &TVal) -> Result<Ordering> {
        let o = fp::fp_compare(&a.value, &b.value)?;
        self.push(OpKind::Compare, &[a, b]);
        Ok(o)
    }

    pub fn sqrt(&mut self, x: &TVal) -> Result<TVal> {
        let v = elem::sqrt_fp(&x.value)?;
        Ok(self.emit(OpKind::Sqrt, &[x], v))
    }
}

impl Arith for Tracer {
    type Value = TVal;

    fn constant(&mut self, q: &Rational) -> Result<TVal> {
        Ok(TVal { value: self.inner.constant(q)?, node: None })
    }
    fn to_rational(&self, v: &TVal) -> Rational {
        v.value.to_rational()
    }
    fn is_zero(&self, v: &TVal) -> bool {
        v.value.is_zero()
    }
    fn neg(&mut self, v: &TVal) -> TVal {
        TVal { value: v.value.neg(), node: v.node }
    }
    fn add(&mut self, a: &TVal, b: &TVal) -> Result<TVal> {
        let v = self.inner.add(&a.value, &b.value)?;
        Ok(self.emit(OpKind::Add, &[a, b], v))
    }
    fn mul(&mut self, a: &TVal, b: &TVal) -> Result<TVal> {
        let v = self.inner.mul(&a.value, &b.value)?;
        Ok(self.emit(OpKind::Mul, &[a, b], v))
    }
    fn div(&mut self, a: &TVal, b: &TVal) -> Result<TVal> {
        let v = self.inner.div(&a.value, &b.value)?;
        Ok(self.emit(OpKind::Div, &[a, b], v))
    }
    fn mul_const(&mut self, x: &TVal, c: &Rational) -> Result<TVal> {
        let v = self.inner.mul_const(&x.value, c)?;
        Ok(self.emit(OpKind::MulConst, &[x], v))
    }
    fn iter_add(&mut self, xs: &[TVal]) -> Result<TVal> {
        let vals: Vec<FpNumber> = xs.iter().map(|x| x.value.clone()).collect();
        let v = self.inner.iter_add(&vals)?;
        let refs: Vec<&TVal> = xs.iter().collect();
        Ok(self.emit(OpKind::IterAdd, &refs, v))
    }
    fn iter_mul(&mut self, xs: &[TVal]) -> Result<TVal> {
        let vals: Vec<FpNumber> = xs.iter().map(|x| x.value.clone()).collect();
        let v = self.inner.iter_mul(&vals)?;
        let refs: Vec<&TVal> = xs.iter().collect();
        Ok(self.emit(OpKind::IterMul, &refs, v))
    }
    fn exp(&mut self, x: &TVal) -> Result<TVal> {
        self.exp_at(x)
    }
    fn log(&mut self, x: &TVal) -> Result<TVal> {
        elem::log_schedule(self, x)
    }
    fn softplus(&mut self, x: &TVal) -> Result<TVal> {
        elem::softplus_schedule(self, x)
    }
    fn sigmoid(&mut self, x: &TVal) -> Result<TVal> {
        elem::sigmoid_schedule(self, x)
    }
    fn silu(&mut self, x: &TVal) -> Result<TVal> {
        elem::silu_schedule(self, x)
    }
    fn recip_guarded(&mut self, x: &TVal) -> Result<TVal> {
        let v = self.inner.recip_guarded(&x.value)?;
        Ok(self.emit(OpKind::RecipGuarded, &[x], v))
    }
    fn mul_guarded(&mut self, a: &TVal, b: &TVal, guard: &TVal) -> Result<TVal> {
        let v = self.inner.mul_guarded(&a.value, &b.value, &guard.value)?;
        Ok(self.emit(OpKind::MulGuarded, &[a, b, guard], v))
    }
    fn broadcast(&mut self, v: &TVal) -> TVal {
        self.emit(OpKind::Broadcast, &[v], v.value.clone())
    }
    fn gather(&mut self, v: Option<&TVal>) -> Result<TVal> {
        match v {
            Some(v) => Ok(self.emit(OpKind::Gather, &[v], v.value.clone())),
            None => {
                let z = FpNumber::zero(self.inner.p);
                Ok(self.emit(OpKind::Gather, &[], z))
            }
        }
    }
    fn carry(&mut self, v: &TVal) -> TVal {
        let id = self.nodes.len();
        let mut node = TraceNode::new(OpKind::Carry, Vec::new());
        node.carry = v.node;
        self.nodes.push(node);
        TVal { value: v.value.clone(), node: Some(id) }
    }
    fn barrier(&mut self) {
        let scope = self.scope();
        if scope.since.is_empty() {
            return;
        }
        let mut preds = std::mem::take(&mut scope.since);
        preds.extend(scope.floor);
        let id = self.nodes.len();
        self.nodes.push(TraceNode::new(OpKind::Barrier, preds));
        self.scope().floor = Some(id);
    }
    fn enter(&mut self) {
        let floor = self.scope().floor;
        self.scopes.push(Scope { floor, since: Vec::new() });
    }
    fn leave(&mut self) {
        if self.scopes.len() == 1 {
            return;
        }
        let child = self.scopes.pop().expect("checked above");
        let parent_floor = self.scope().floor;
        let parent = self.scope();
        parent.since.extend(child.since);
        if child.floor != parent_floor {
            parent.since.extend(child.floor);
        }
    }
}

impl FpSteps for Tracer {
    fn fp<'a>(&self, v: &'a TVal) -> &'a FpNumber {
        &v.value
    }
    fn widen(&mut self, v: &TVal, q: u32) -> TVal {
        TVal { value: v.value.widen(q), node: v.node }
    }
    fn narrow(&mut self, v: &TVal, q: u32) -> Result<TVal> {
        Ok(TVal { value: v.value.round_to(q)?, node: v.node })
    }
    fn constant_at(&mut self, c: &Rational, q: u32) -> Result<TVal> {
        Ok(TVal { value: fp::round_p(c, q)?, node: None })
    }
    fn log_normalize(&mut self, x: &TVal) -> Result<(TVal, TVal)> {
        let (u, k) = elem::log_split(&x.value)?;
        let id = Some(self.push(OpKind::Normalize, &[x]));
        Ok((TVal { value: u, node: id }, TVal { value: k, node: id }))
    }
    fn exp_at(&mut self, x: &TVal) -> Result<TVal> {
        let v = elem::exp_fp(&x.value)?;
        Ok(self.emit(OpKind::Exp, &[x], v))
    }
}
