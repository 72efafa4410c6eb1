//! Gate-level DAG with unbounded fan-in AND/OR and threshold gates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Input,
    Const0,
    Const1,
    Not,
    And,
    Or,
    /// 1 iff at least `k` inputs are 1. Inputs may repeat; each occurrence counts.
    Threshold(u32),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Input => "INPUT",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
            GateKind::Not => "NOT",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Threshold(_) => "THRESHOLD",
        }
    }

    pub fn is_source(&self) -> bool {
        matches!(self, GateKind::Input | GateKind::Const0 | GateKind::Const1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, inputs: Vec<usize>) -> Self {
        Gate { kind, inputs }
    }

    /// MAJORITY over `inputs`: more than half of them set.
    pub fn majority(inputs: Vec<usize>) -> Self {
        let k = inputs.len() as u32 / 2 + 1;
        Gate { kind: GateKind::Threshold(k), inputs }
    }
}

/// An acyclic circuit whose gate ids are their positions, in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    gates: Vec<Gate>,
    outputs: Vec<usize>,
    inputs: Vec<usize>,
}

impl Circuit {
    /// Validates arities and that every gate only reads earlier gates.
    pub fn new(gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self> {
        for (id, g) in gates.iter().enumerate() {
            check_gate(id, g)?;
        }
        for &o in &outputs {
            if o >= gates.len() {
                return Err(Error::InvalidGate { id: o, reason: "output refers to a missing gate".into() });
            }
        }
        let inputs = gates.iter().enumerate().filter(|(_, g)| g.kind == GateKind::Input).map(|(i, _)| i).collect();
        Ok(Circuit { gates, outputs, inputs })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Ids of the INPUT gates, in assignment order.
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        let mut values = Vec::new();
        self.evaluate_into(assignment, &mut values)?;
        Ok(self.outputs.iter().map(|&o| values[o]).collect())
    }

    /// Evaluates every gate into `values`, reusing its allocation.
    pub fn evaluate_into(&self, assignment: &[bool], values: &mut Vec<bool>) -> Result<()> {
        if assignment.len() != self.inputs.len() {
            return Err(Error::ArityMismatch { expected: self.inputs.len(), got: assignment.len() });
        }
        values.clear();
        values.reserve(self.gates.len());
        let mut next_input = 0;
        for g in &self.gates {
            let v = match g.kind {
                GateKind::Input => {
                    next_input += 1;
                    assignment[next_input - 1]
                }
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::Not => !values[g.inputs[0]],
                GateKind::And => g.inputs.iter().all(|&i| values[i]),
                GateKind::Or => g.inputs.iter().any(|&i| values[i]),
                GateKind::Threshold(k) => g.inputs.iter().filter(|&&i| values[i]).count() >= k as usize,
            };
            values.push(v);
        }
        Ok(())
    }

    /// Per-gate depth: sources are 0, every other gate one more than its deepest input.
    pub fn levels(&self) -> Vec<usize> {
        let mut lv = vec![0usize; self.gates.len()];
        for (id, g) in self.gates.iter().enumerate() {
            if !g.kind.is_source() {
                lv[id] = 1 + g.inputs.iter().map(|&i| lv[i]).max().unwrap_or(0);
            }
        }
        lv
    }

    /// Longest input-to-output path, counting non-source gates.
    pub fn depth(&self) -> usize {
        let lv = self.levels();
        self.outputs.iter().map(|&o| lv[o]).max().unwrap_or(0)
    }

    /// Number of non-INPUT gates.
    pub fn size(&self) -> usize {
        self.gates.iter().filter(|g| g.kind != GateKind::Input).count()
    }

    /// Total number of wires into gates.
    pub fn wires(&self) -> usize {
        self.gates.iter().map(|g| g.inputs.len()).sum()
    }

    /// Rewrites AND, OR and THRESHOLD(k) as MAJORITY gates padded with constants.
    /// NOT gates stay.
    pub fn to_majority_only(&self) -> Circuit {
        let mut gates: Vec<Gate> = Vec::with_capacity(self.gates.len() + 2);
        let mut map = Vec::with_capacity(self.gates.len());
        let mut zero = None;
        let mut one = None;
        for g in &self.gates {
            let ins: Vec<usize> = g.inputs.iter().map(|&i| map[i]).collect();
            let n = ins.len() as i64;
            let k = match g.kind {
                GateKind::And => n,
                GateKind::Or => 1,
                GateKind::Threshold(k) => i64::from(k),
                _ => {
                    gates.push(Gate::new(g.kind, ins));
                    map.push(gates.len() - 1);
                    continue;
                }
            };
            // pad so that floor((n + z) / 2) + 1 counts as k on the original inputs
            let (pad, z) = if 2 * k > n { (&mut zero, 2 * k - n - 1) } else { (&mut one, n - 2 * k + 1) };
            let mut ins = ins;
            if z > 0 {
                let c = *pad.get_or_insert_with(|| {
                    let kind = if 2 * k > n { GateKind::Const0 } else { GateKind::Const1 };
                    gates.push(Gate::new(kind, vec![]));
                    gates.len() - 1
                });
                ins.extend(std::iter::repeat_n(c, z as usize));
            }
            gates.push(Gate::majority(ins));
            map.push(gates.len() - 1);
        }
        let outputs = self.outputs.iter().map(|&o| map[o]).collect();
        Circuit::new(gates, outputs).expect("rewrite keeps topological order")
    }

    /// Every gate is a source, a NOT or a MAJORITY.
    pub fn is_majority_only(&self) -> bool {
        self.gates.iter().all(|g| match g.kind {
            GateKind::Threshold(k) => k as usize == g.inputs.len() / 2 + 1,
            GateKind::And | GateKind::Or => false,
            _ => true,
        })
    }

    /// Canonical netlist text: one `id KIND [k] inputs...` line per gate, then `OUTPUT ids...`.
    pub fn to_netlist(&self) -> String {
        self.to_string()
    }

    pub fn from_netlist(text: &str) -> Result<Circuit> {
        text.parse()
    }
}

fn check_gate(id: usize, g: &Gate) -> Result<()> {
    let bad = |reason: &str| Err(Error::InvalidGate { id, reason: reason.to_string() });
    if let Some(&i) = g.inputs.iter().find(|&&i| i >= id) {
        return Err(Error::InvalidGate { id, reason: format!("input {i} is not an earlier gate") });
    }
    match g.kind {
        GateKind::Input | GateKind::Const0 | GateKind::Const1 if !g.inputs.is_empty() => bad("source gate with inputs"),
        GateKind::Not if g.inputs.len() != 1 => bad("NOT needs exactly one input"),
        GateKind::And | GateKind::Or if g.inputs.is_empty() => bad("empty fan-in"),
        GateKind::Threshold(k) if k == 0 || k as usize > g.inputs.len() => bad("threshold needs 1 <= k <= fan-in"),
        _ => Ok(()),
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, g) in self.gates.iter().enumerate() {
            write!(f, "{id} {}", g.kind.name())?;
            if let GateKind::Threshold(k) = g.kind {
                write!(f, " {k}")?;
            }
            for i in &g.inputs {
                write!(f, " {i}")?;
            }
            writeln!(f)?;
        }
        write!(f, "OUTPUT")?;
        for o in &self.outputs {
            write!(f, " {o}")?;
        }
        writeln!(f)
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Circuit> {
        let mut gates = Vec::new();
        let mut outputs = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |msg: String| Error::Parse { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut toks = body.split_whitespace();
            let head = toks.next().unwrap_or_default();
            let ids = |toks: std::str::SplitWhitespace<'_>| -> Result<Vec<usize>> {
                toks.map(|t| t.parse::<usize>().map_err(|_| err(format!("bad gate id `{t}`")))).collect()
            };
            if head == "OUTPUT" {
                if outputs.is_some() {
                    return Err(err("duplicate OUTPUT line".into()));
                }
                let outs = ids(toks)?;
                if let Some(&o) = outs.iter().find(|&&o| o >= gates.len()) {
                    return Err(err(format!("output {o} refers to a missing gate")));
                }
                outputs = Some(outs);
                continue;
            }
            if outputs.is_some() {
                return Err(err("gate after OUTPUT line".into()));
            }
            let id: usize = head.parse().map_err(|_| err(format!("expected a gate id, found `{head}`")))?;
            if id != gates.len() {
                return Err(err(format!("gate id {id} out of order, expected {}", gates.len())));
            }
            let kind = match toks.next() {
                Some("INPUT") => GateKind::Input,
                Some("CONST0") => GateKind::Const0,
                Some("CONST1") => GateKind::Const1,
                Some("NOT") => GateKind::Not,
                Some("AND") => GateKind::And,
                Some("OR") => GateKind::Or,
                Some("THRESHOLD") => {
                    let k = toks.next().ok_or_else(|| err("THRESHOLD without k".into()))?;
                    GateKind::Threshold(k.parse().map_err(|_| err(format!("bad threshold `{k}`")))?)
                }
                Some(other) => return Err(err(format!("unknown gate kind `{other}`"))),
                None => return Err(err("missing gate kind".into())),
            };
            let gate = Gate::new(kind, ids(toks)?);
            if let Some(&i) = gate.inputs.iter().find(|&&i| i >= id) {
                return Err(err(format!(
                    "gate {id} reads gate {i}, which is not earlier (cycle or forward reference)"
                )));
            }
            check_gate(id, &gate).map_err(|e| err(e.to_string()))?;
            gates.push(gate);
        }
        let outputs =
            outputs.ok_or(Error::Parse { line: text.lines().count().max(1), msg: "missing OUTPUT line".into() })?;
        Circuit::new(gates, outputs)
    }
}
