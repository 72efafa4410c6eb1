//! Equivalence of synthesized circuits with the float library, and the
//! depth/size scaling of iterated addition.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tcbench_core::fp::FpNumber;

use crate::encoding::BitEncoding;
use crate::error::Result;
use crate::ir::Circuit;
use crate::synth::{encode_operands, synthesize, Primitive};

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub primitive: String,
    pub p: u32,
    pub exp_bits: u32,
    pub window: (i64, i64),
    pub exhaustive: bool,
    pub cases: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<String>,
    pub depth: usize,
    pub size: usize,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.cases > 0
    }
}

struct Checker<'a> {
    prim: Primitive,
    enc: &'a BitEncoding,
    circuit: &'a Circuit,
    values: Vec<bool>,
    cases: u64,
    mismatches: u64,
    first: Option<String>,
}

impl Checker<'_> {
    fn run(&mut self, operands: &[FpNumber]) -> Result<()> {
        let bits = encode_operands(self.enc, operands)?;
        let want = self.prim.reference(operands)?;
        self.circuit.evaluate_into(&bits, &mut self.values)?;
        let got: Vec<bool> = self.circuit.outputs().iter().map(|&o| self.values[o]).collect();
        self.cases += 1;
        if !self.prim.outputs_agree(&got, &want) {
            self.mismatches += 1;
            if self.first.is_none() {
                let ops: Vec<String> =
                    operands.iter().map(|x| format!("<{}, {}>", x.significand(), x.exponent())).collect();
                self.first = Some(format!(
                    "operands [{}]: circuit {:?}, expected {:?}",
                    ops.join(", "),
                    bits_str(&got),
                    bits_str(&want)
                ));
            }
        }
        Ok(())
    }

    fn report(self, exhaustive: bool) -> CheckReport {
        CheckReport {
            primitive: self.prim.name(),
            p: self.enc.p,
            exp_bits: self.enc.exp_bits,
            window: self.enc.window(),
            exhaustive,
            cases: self.cases,
            mismatches: self.mismatches,
            first_mismatch: self.first,
            depth: self.circuit.depth(),
            size: self.circuit.size(),
        }
    }
}

fn bits_str(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Every operand tuple of in-window values. The count is `values^arity`, so
/// for iterated addition this is only practical at small `m`.
pub fn check_exhaustive(prim: Primitive, enc: &BitEncoding) -> Result<CheckReport> {
    let circuit = synthesize(prim, enc)?;
    check_circuit_exhaustive(prim, enc, &circuit)
}

pub fn check_circuit_exhaustive(prim: Primitive, enc: &BitEncoding, circuit: &Circuit) -> Result<CheckReport> {
    let vals = enc.values();
    let k = prim.arity();
    let mut ck = Checker { prim, enc, circuit, values: Vec::new(), cases: 0, mismatches: 0, first: None };
    let mut idx = vec![0usize; k];
    let mut ops: Vec<FpNumber> = vec![vals[0].clone(); k];
    'outer: loop {
        for (o, &i) in ops.iter_mut().zip(&idx) {
            *o = vals[i].clone();
        }
        ck.run(&ops)?;
        for d in (0..k).rev() {
            idx[d] += 1;
            if idx[d] < vals.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    Ok(ck.report(true))
}

/// `samples` operand tuples drawn uniformly from the in-window values.
pub fn check_sampled(prim: Primitive, enc: &BitEncoding, samples: u64, seed: u64) -> Result<CheckReport> {
    let circuit = synthesize(prim, enc)?;
    let vals = enc.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ck = Checker { prim, enc, circuit: &circuit, values: Vec::new(), cases: 0, mismatches: 0, first: None };
    for _ in 0..samples {
        let ops: Vec<FpNumber> = (0..prim.arity()).map(|_| vals.choose(&mut rng).expect("nonempty").clone()).collect();
        ck.run(&ops)?;
    }
    Ok(ck.report(false))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalePoint {
    pub m: usize,
    pub depth: usize,
    pub size: usize,
}

pub fn iter_add_scaling(enc: &BitEncoding, ms: &[usize]) -> Result<Vec<ScalePoint>> {
    ms.iter()
        .map(|&m| {
            let c = synthesize(Primitive::IterAdd(m), enc)?;
            Ok(ScalePoint { m, depth: c.depth(), size: c.size() })
        })
        .collect()
}

/// Least-squares slope of `log size` against `log m`: the degree of the
/// polynomial that best fits the size growth.
pub fn growth_degree(points: &[ScalePoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.size as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
