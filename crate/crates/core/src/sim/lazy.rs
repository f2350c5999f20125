//! Windowed contraction of sandwich circuits with diagonal bodies.
//!
//! Because every body gate is diagonal, a qubit can enter the live window at
//! its first gate (as `H|prep>`) and be projected onto `<out|H` right after its
//! last gate. Circuits with hundreds of ancillas then stay within a window of
//! a few qubits as long as gates touching one gadget are emitted together.
//! Retired projection factors are folded into a base-2 logarithm so amplitudes
//! like `2^-269` keep full relative precision.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::circuit::{Circuit, GateKind};
use crate::compiler::{LoweringTrace, PaddingRecord};
use crate::error::{Error, Result};

/// Default ceiling on the number of simultaneously live qubits.
pub const DEFAULT_WINDOW_LIMIT: usize = 24;

/// A complex number stored as `value * 2^log2_factor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledAmplitude {
    pub re: f64,
    pub im: f64,
    pub log2_factor: f64,
}

impl ScaledAmplitude {
    pub fn new(value: C64, log2_factor: f64) -> Self {
        if value == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self {
            re: value.re,
            im: value.im,
            log2_factor,
        }
    }

    pub fn zero() -> Self {
        Self {
            re: 0.0,
            im: 0.0,
            log2_factor: 0.0,
        }
    }

    pub fn mantissa(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    /// Linear-domain value (underflows for very small amplitudes).
    pub fn value(&self) -> C64 {
        self.mantissa() * self.log2_factor.exp2()
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    /// `log2 |value|`, or `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        self.mantissa().norm().log2() + self.log2_factor
    }
}

struct Contractor<'c> {
    circuit: &'c Circuit,
    preps: Vec<u8>,
    /// Recorded outcome per qubit (ignored for kept qubits).
    out: Vec<u8>,
    keep: Vec<bool>,
    last: Vec<Option<usize>>,
    done: Vec<bool>,
    live: Vec<usize>,
    pos: Vec<Option<usize>>,
    amps: Vec<C64>,
    log2: f64,
    zero: bool,
    max_window: usize,
}

impl<'c> Contractor<'c> {
    fn new(circuit: &'c Circuit, preps: Vec<u8>, out: Vec<u8>, keep: &[usize], max_window: usize) -> Result<Self> {
        circuit.check_well_formed()?;
        if !circuit.sandwich {
            return Err(Error::UnsupportedShape(
                "lazy contraction needs a sandwich circuit".into(),
            ));
        }
        if let Some(g) = circuit.body.iter().find(|g| !g.kind.is_diagonal()) {
            return Err(Error::UnsupportedShape(format!(
                "lazy contraction needs a diagonal body, found {}",
                g.kind.name()
            )));
        }
        let n = circuit.num_qubits();
        let mut last = vec![None; n];
        for (i, g) in circuit.body.iter().enumerate() {
            for &q in &g.targets {
                last[q] = Some(i);
            }
        }
        let mut keep_mask = vec![false; n];
        keep.iter().for_each(|&q| keep_mask[q] = true);
        Ok(Self {
            circuit,
            preps,
            out,
            keep: keep_mask,
            last,
            done: vec![false; n],
            live: Vec::new(),
            pos: vec![None; n],
            amps: vec![C64::new(1.0, 0.0)],
            log2: 0.0,
            zero: false,
            max_window,
        })
    }

    fn physical_out(&self, q: usize) -> u8 {
        self.out[q] ^ self.circuit.outcome_flip.contains(&q) as u8
    }

    fn admit(&mut self, q: usize) -> Result<()> {
        if self.live.len() >= self.max_window {
            return Err(Error::ResourceLimit {
                what: "lazy live-window width",
                actual: self.live.len() + 1,
                limit: self.max_window,
            });
        }
        let sign = if self.preps[q] == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
        let mut next = Vec::with_capacity(self.amps.len() * 2);
        next.extend(self.amps.iter().map(|a| a * FRAC_1_SQRT_2));
        next.extend(self.amps.iter().map(|a| a * sign));
        self.amps = next;
        self.pos[q] = Some(self.live.len());
        self.live.push(q);
        Ok(())
    }

    /// Projects `q` onto `<y|H` and drops it from the window.
    fn retire(&mut self, q: usize) {
        let p = self.pos[q].expect("retiring a live qubit");
        let top = self.live.len() - 1;
        if p != top {
            let (bp, bt) = (1usize << p, 1usize << top);
            for i in 0..self.amps.len() {
                if i & bp != 0 && i & bt == 0 {
                    self.amps.swap(i, i ^ bp ^ bt);
                }
            }
            let moved = self.live[top];
            self.live[p] = moved;
            self.pos[moved] = Some(p);
        }
        self.live.pop();
        self.pos[q] = None;
        self.done[q] = true;
        let half = self.amps.len() / 2;
        let sign = if self.physical_out(q) == 1 { -1.0 } else { 1.0 };
        let next: Vec<C64> = (0..half)
            .map(|i| (self.amps[i] + self.amps[i + half] * sign) * FRAC_1_SQRT_2)
            .collect();
        self.amps = next;
        let n2: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        if n2 == 0.0 {
            self.zero = true;
        } else {
            let inv = 1.0 / n2.sqrt();
            self.amps.iter_mut().for_each(|a| *a *= inv);
            self.log2 += 0.5 * n2.log2();
        }
    }

    fn apply_range(&mut self, range: std::ops::Range<usize>) -> Result<()> {
        for i in range {
            if self.zero {
                return Ok(());
            }
            let g = &self.circuit.body[i];
            for &q in &g.targets {
                if self.pos[q].is_none() {
                    if self.done[q] {
                        return Err(Error::Consistency(format!(
                            "gate {i} touches already retired qubit {q}"
                        )));
                    }
                    self.admit(q)?;
                }
            }
            let t: Vec<usize> = g.targets.iter().map(|&q| self.pos[q].unwrap()).collect();
            let phase_mask = t.iter().fold(0usize, |m, &p| m | 1 << p);
            let phase = match g.kind {
                GateKind::CZ | GateKind::CCZ => C64::new(-1.0, 0.0),
                k => super::state::omega_pow(k.t_exponent().expect("diagonal")),
            };
            if phase != C64::new(1.0, 0.0) {
                for (j, a) in self.amps.iter_mut().enumerate() {
                    if j & phase_mask == phase_mask {
                        *a *= phase;
                    }
                }
            }
            for &q in &g.targets {
                if self.last[q] == Some(i) && !self.keep[q] {
                    self.retire(q);
                }
            }
        }
        Ok(())
    }

    /// Marks `qubits` as accounted for by an externally computed factor.
    fn account(&mut self, qubits: &[usize], factor: C64, log2: f64) -> Result<()> {
        for &q in qubits {
            if self.pos[q].is_some() || self.done[q] {
                return Err(Error::Consistency(format!(
                    "padding qubit {q} is also used by a functional gadget"
                )));
            }
            self.done[q] = true;
        }
        if factor == C64::new(0.0, 0.0) {
            self.zero = true;
        } else {
            let n = factor.norm();
            self.amps.iter_mut().for_each(|a| *a *= factor / n);
            self.log2 += n.log2() + log2;
        }
        Ok(())
    }

    /// Closes remaining qubits; returns the kept-register vector (bit `k` is
    /// `keep_order[k]`) and its log2 scale.
    fn finish(mut self, keep_order: &[usize]) -> Result<(Vec<C64>, f64)> {
        let n = self.circuit.num_qubits();
        for q in 0..n {
            if self.done[q] || self.keep[q] || self.pos[q].is_some() {
                continue;
            }
            // Untouched qubit: <y|H H|prep> = delta(y, prep).
            if self.physical_out(q) != self.preps[q] {
                self.zero = true;
            }
            self.done[q] = true;
        }
        if self.zero {
            return Ok((vec![C64::new(0.0, 0.0); 1 << keep_order.len()], 0.0));
        }
        for &q in keep_order {
            if self.pos[q].is_none() {
                self.admit(q)?;
            }
        }
        let mut s = StateVector::from_amplitudes(std::mem::take(&mut self.amps));
        for &q in keep_order {
            let p = self.pos[q].unwrap();
            s.h(p);
            if self.circuit.outcome_flip.contains(&q) {
                s.x(p);
            }
        }
        let amps = s.into_amplitudes();
        let mut outv = vec![C64::new(0.0, 0.0); 1 << keep_order.len()];
        for (j, a) in amps.iter().enumerate() {
            let k = keep_order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (bit, &q)| acc | (j >> self.pos[q].unwrap() & 1) << bit);
            outv[k] = *a;
        }
        Ok((outv, self.log2))
    }
}

fn preps_of(c: &Circuit) -> Vec<u8> {
    c.qubits.iter().map(|q| q.prep).collect()
}

/// Amplitude of the recorded outcome `out` (one bit per qubit) by windowed
/// contraction over the body in program order.
pub fn lazy_amplitude(c: &Circuit, out: &[u8]) -> Result<ScaledAmplitude> {
    lazy_amplitude_with_limit(c, out, DEFAULT_WINDOW_LIMIT)
}

pub fn lazy_amplitude_with_limit(c: &Circuit, out: &[u8], max_window: usize) -> Result<ScaledAmplitude> {
    if out.len() != c.num_qubits() {
        return Err(Error::InputShape(format!(
            "outcome has {} bits, circuit has {} qubits",
            out.len(),
            c.num_qubits()
        )));
    }
    let mut k = Contractor::new(c, preps_of(c), out.to_vec(), &[], max_window)?;
    k.apply_range(0..c.body.len())?;
    let (v, log2) = k.finish(&[])?;
    Ok(ScaledAmplitude::new(v[0], log2))
}

/// Postselected map from `inputs` to `outputs` (see
/// [`DenseSimulator::action`](super::dense::DenseSimulator::action)) computed
/// by windowed contraction. Returns the matrix and a common `log2` scale.
pub fn lazy_action(c: &Circuit, inputs: &[usize], outputs: &[usize]) -> Result<(DMatrix<C64>, f64)> {
    for q in 0..c.num_qubits() {
        if !outputs.contains(&q) && !c.postselect.contains_key(&q) {
            return Err(Error::Argument(format!(
                "qubit {q} is neither an output nor postselected"
            )));
        }
    }
    let mut out = vec![0u8; c.num_qubits()];
    for (&q, &b) in &c.postselect {
        out[q] = b;
    }
    let mut columns = Vec::with_capacity(1 << inputs.len());
    for col in 0..1usize << inputs.len() {
        let mut preps = preps_of(c);
        for (k, &q) in inputs.iter().enumerate() {
            preps[q] = (col >> k & 1) as u8;
        }
        let mut k = Contractor::new(c, preps, out.clone(), outputs, DEFAULT_WINDOW_LIMIT)?;
        k.apply_range(0..c.body.len())?;
        columns.push(k.finish(outputs)?);
    }
    let scale = columns
        .iter()
        .filter(|(v, _)| v.iter().any(|a| a.norm() > 0.0))
        .map(|(_, l)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = if scale.is_finite() { scale } else { 0.0 };
    let mut m = DMatrix::zeros(1 << outputs.len(), 1 << inputs.len());
    for (j, (v, l)) in columns.iter().enumerate() {
        let f = (l - scale).exp2();
        for (i, a) in v.iter().enumerate() {
            m[(i, j)] = a * f;
        }
    }
    Ok((m, scale))
}

/// Trace-driven contraction of a lowered circuit onto its all-postselected
/// outcome (outputs read as `0`).
///
/// Functional gadgets are contracted in trace order; padding blocks are
/// folded in analytically: `(1+i)/2` per `HSH` black and `1/2` per
/// white-black `H^2 CZ H^2` pair.
pub fn run_lazy(c: &Circuit, trace: &LoweringTrace) -> Result<ScaledAmplitude> {
    let mut out = vec![0u8; c.num_qubits()];
    for (&q, &b) in &c.postselect {
        out[q] = b;
    }
    run_lazy_outcome(c, trace, &out)
}

/// As [`run_lazy`] for an arbitrary recorded outcome.
pub fn run_lazy_outcome(c: &Circuit, trace: &LoweringTrace, out: &[u8]) -> Result<ScaledAmplitude> {
    if out.len() != c.num_qubits() {
        return Err(Error::InputShape("outcome width mismatch".into()));
    }
    if trace.total_qubits != c.num_qubits() {
        return Err(Error::Consistency(format!(
            "trace describes {} qubits, circuit has {}",
            trace.total_qubits,
            c.num_qubits()
        )));
    }
    let mut k = Contractor::new(c, preps_of(c), out.to_vec(), &[], DEFAULT_WINDOW_LIMIT)?;
    let mut cursor = 0usize;
    for step in &trace.steps {
        for g in &step.gadgets {
            let (s, e) = g.gates;
            if s != cursor || e < s || e > c.body.len() {
                return Err(Error::Consistency(format!(
                    "gadget gate range {s}..{e} does not continue at {cursor}"
                )));
            }
            k.apply_range(s..e)?;
            cursor = e;
        }
    }
    for pad in &trace.padding {
        let (s, e) = pad.gates;
        if s != cursor || e > c.body.len() {
            return Err(Error::Consistency(format!(
                "padding gate range {s}..{e} does not continue at {cursor}"
            )));
        }
        check_padding(c, pad, out)?;
        let hsh = pad.hsh_blacks.len();
        let pairs = pad.pairs.len();
        let phase = super::state::omega_pow((hsh % 8) as u8);
        let mut qubits = pad.hsh_blacks.clone();
        qubits.extend(pad.pairs.iter().flat_map(|&(w, b)| [w, b]));
        k.account(&qubits, phase, -0.5 * hsh as f64 - pairs as f64)?;
        cursor = e;
    }
    if cursor != c.body.len() {
        return Err(Error::Consistency(format!(
            "trace covers {cursor} of {} body gates",
            c.body.len()
        )));
    }
    let (v, log2) = k.finish(&[])?;
    Ok(ScaledAmplitude::new(v[0], log2))
}

fn check_padding(c: &Circuit, pad: &PaddingRecord, out: &[u8]) -> Result<()> {
    let (s, e) = pad.gates;
    let gates = &c.body[s..e];
    let expected = pad.hsh_blacks.len() + pad.pairs.len();
    if gates.len() != expected {
        return Err(Error::Consistency(format!(
            "padding block has {} gates, trace expects {expected}",
            gates.len()
        )));
    }
    let (phase_gates, cz_gates) = gates.split_at(pad.hsh_blacks.len());
    for (g, &b) in phase_gates.iter().zip(&pad.hsh_blacks) {
        if g.kind.t_exponent() != Some(2) || g.targets != [b] {
            return Err(Error::Consistency(format!("expected S on padding black {b}")));
        }
    }
    for (g, &(w, b)) in cz_gates.iter().zip(&pad.pairs) {
        if g.kind != GateKind::CZ || g.targets != [w, b] {
            return Err(Error::Consistency(format!("expected CZ({w},{b}) in padding")));
        }
    }
    let all = pad
        .hsh_blacks
        .iter()
        .copied()
        .chain(pad.pairs.iter().flat_map(|&(w, b)| [w, b]));
    for q in all {
        if c.qubits[q].prep != 0 || out[q] != 0 || c.outcome_flip.contains(&q) {
            return Err(Error::Consistency(format!(
                "padding qubit {q} must be prepared and read as 0"
            )));
        }
    }
    Ok(())
}
