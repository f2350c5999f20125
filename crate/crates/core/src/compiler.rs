//! From polynomials to IQP circuits, and from IQP circuits to ADIQP ones.
//!
//! [`build_cf`] turns a degree-3 polynomial into the IQP circuit `C_f`.
//! [`lower_to_adiqp`] rewrites its body with the white-qubit gadgets so that
//! every CZ joins a white and a black qubit and every phase sits on a black
//! qubit. Each quadratic slot `{i,j}` owns 3 black ancillas and each cubic slot
//! owns 25 white and 105 black ancillas; slots whose monomial is absent are
//! padded so the ancilla count never depends on `f`.

use std::collections::VecDeque;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Color, Gate, GateKind, Role};
use crate::error::{Error, Result};
use crate::f2poly::PolyF2Deg3;
use crate::gadgets::{gadget, GadgetKind};
use crate::linalg;
use crate::circuit::validate_adiqp;
use crate::sim::{lazy_action, run_lazy, ScaledAmplitude};

/// Ancillas per quadratic slot.
pub const PAIR_SLOT: usize = 3;
/// White ancillas per cubic slot.
pub const TRIPLE_WHITES: usize = 25;
/// Black ancillas per cubic slot.
pub const TRIPLE_BLACKS: usize = 105;
/// Blacks padded with `HSH` in an unused cubic slot; the rest form pairs.
const TRIPLE_HSH: usize = TRIPLE_BLACKS - TRIPLE_WHITES;

/// Largest logical register [`lower_universal`] accepts.
pub const MAX_UNIVERSAL_QUBITS: usize = 4;

fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// The IQP circuit of `f`: one `Z`, `CZ` or `CCZ` per monomial.
pub fn build_cf(f: &PolyF2Deg3) -> Circuit {
    let mut c = Circuit::sandwich();
    for _ in 0..f.n() {
        c.add_qubit(Color::White, 0, Role::InputOutput);
    }
    for i in f.linear() {
        c.push(Gate::new(GateKind::Z, &[i]));
    }
    for [i, j] in f.quadratic() {
        c.push(Gate::cz(i, j));
    }
    for [i, j, k] in f.cubic() {
        c.push(Gate::ccz(i, j, k));
    }
    c
}

/// Gate counts of a Clifford+T sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    pub cz: usize,
    pub h: usize,
    pub t: usize,
    pub sdg: usize,
    pub other: usize,
}

pub fn census(gates: &[Gate]) -> GateCensus {
    let mut c = GateCensus::default();
    for g in gates {
        match g.kind {
            GateKind::CZ => c.cz += 1,
            GateKind::H => c.h += 1,
            GateKind::TPower(1) => c.t += 1,
            GateKind::SDagger => c.sdg += 1,
            _ => c.other += 1,
        }
    }
    c
}

fn cnot(a: usize, b: usize, out: &mut Vec<Gate>) {
    out.extend([Gate::h(b), Gate::cz(a, b), Gate::h(b)]);
}

/// Controlled-S from two CNOTs, three T and one S†.
fn controlled_s(a: usize, t: usize, out: &mut Vec<Gate>) {
    out.extend([Gate::t(a, 1), Gate::t(t, 1)]);
    cnot(a, t, out);
    out.extend([Gate::t(t, 1), Gate::new(GateKind::SDagger, &[t])]);
    cnot(a, t, out);
}

/// CCZ on qubits `0, 1, 2` over `{CZ, H, T, S†}`, in time order.
///
/// Uses `S^2 = Z`: controlled-S from the first control, then from the second
/// control conjugated by CNOTs so the middle one cancels the overlap.
pub fn ccz_decompose() -> Vec<Gate> {
    let (c1, c2, t) = (0, 1, 2);
    let mut g = Vec::with_capacity(37);
    controlled_s(c1, t, &mut g);
    cnot(c1, c2, &mut g);
    // Controlled-S† as controlled-S followed by CZ.
    controlled_s(c2, t, &mut g);
    g.push(Gate::cz(c2, t));
    cnot(c1, c2, &mut g);
    controlled_s(c2, t, &mut g);
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaBudget {
    pub n: usize,
    pub m: usize,
    pub white_ancillas: usize,
    pub black_ancillas: usize,
}

pub fn ancilla_budget(n: usize) -> AncillaBudget {
    let triples = choose(n, 3);
    let m = (TRIPLE_WHITES + TRIPLE_BLACKS) * triples + PAIR_SLOT * choose(n, 2);
    let white_ancillas = TRIPLE_WHITES * triples;
    AncillaBudget {
        n,
        m,
        white_ancillas,
        black_ancillas: m - white_ancillas,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoweringTarget {
    Adiqp,
    AdiqpStar,
}

/// One gadget (or single-black phase) emitted for a source gate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetRecord {
    pub kind: String,
    /// Half-open range of body gate indices.
    pub gates: (usize, usize),
    /// White locations the gadget acted on.
    pub wires: Vec<usize>,
    pub ancillas: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Source gate, with 1-based logical indices.
    pub source: String,
    pub gadgets: Vec<GadgetRecord>,
    pub ancillas_consumed: usize,
    /// Qubit whose preparation was flipped (for `Z`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep_flip: Option<usize>,
}

/// Padding of an unused slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingRecord {
    pub slot: String,
    pub gates: (usize, usize),
    /// Blacks carrying `HSH`.
    pub hsh_blacks: Vec<usize>,
    /// White-black pairs carrying `H^2 CZ H^2`.
    pub pairs: Vec<(usize, usize)>,
}

impl PaddingRecord {
    pub fn size(&self) -> usize {
        self.hsh_blacks.len() + 2 * self.pairs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoweringTrace {
    pub target: LoweringTarget,
    pub n: usize,
    pub total_qubits: usize,
    pub budget: AncillaBudget,
    /// Ancillas this target must use in total.
    pub expected_ancillas: usize,
    pub steps: Vec<TraceStep>,
    pub padding: Vec<PaddingRecord>,
    pub consumed: usize,
    pub padded: usize,
    /// Logical qubit `k` enters at `inputs[k]` and leaves at `outputs[k]`.
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl LoweringTrace {
    /// Checks the totals against the per-step records and the budget.
    pub fn reconcile(&self) -> Result<()> {
        let consumed: usize = self.steps.iter().map(|s| s.ancillas_consumed).sum();
        let listed: usize = self
            .steps
            .iter()
            .flat_map(|s| &s.gadgets)
            .map(|g| g.ancillas.len())
            .sum();
        let padded: usize = self.padding.iter().map(PaddingRecord::size).sum();
        if consumed != self.consumed || listed != consumed || padded != self.padded {
            return Err(Error::Consistency(format!(
                "trace totals disagree: consumed {} (steps {consumed}, gadgets {listed}), padded {} (records {padded})",
                self.consumed, self.padded
            )));
        }
        if consumed + padded != self.expected_ancillas {
            return Err(Error::Consistency(format!(
                "consumed {consumed} + padded {padded} != {} ancillas",
                self.expected_ancillas
            )));
        }
        if self.total_qubits != self.n + self.expected_ancillas {
            return Err(Error::Consistency(format!(
                "{} qubits for n = {} and {} ancillas",
                self.total_qubits, self.n, self.expected_ancillas
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    fn relabel(&mut self, perm: &[usize]) {
        let map = |v: &mut Vec<usize>| v.iter_mut().for_each(|q| *q = perm[*q]);
        for s in &mut self.steps {
            for g in &mut s.gadgets {
                map(&mut g.wires);
                map(&mut g.ancillas);
            }
            if let Some(q) = &mut s.prep_flip {
                *q = perm[*q];
            }
        }
        for p in &mut self.padding {
            map(&mut p.hsh_blacks);
            p.pairs.iter_mut().for_each(|(w, b)| {
                *w = perm[*w];
                *b = perm[*b];
            });
        }
        map(&mut self.inputs);
        map(&mut self.outputs);
    }
}

/// Ancillas reserved for one slot.
#[derive(Default)]
struct Pool {
    whites: VecDeque<usize>,
    blacks: VecDeque<usize>,
}

impl Pool {
    fn take(&mut self, color: Color) -> Result<usize> {
        let q = match color {
            Color::White => self.whites.pop_front(),
            Color::Black => self.blacks.pop_front(),
        };
        q.ok_or_else(|| Error::Consistency(format!("slot ran out of {color:?} ancillas")))
    }
}

/// Emits gadgets onto a growing circuit, tracking where each logical qubit
/// currently lives.
struct Emitter {
    c: Circuit,
    loc: Vec<usize>,
}

impl Emitter {
    fn new(n: usize) -> Self {
        let mut c = Circuit::sandwich();
        for _ in 0..n {
            c.add_qubit(Color::White, 0, Role::InputOutput);
        }
        Self {
            c,
            loc: (0..n).collect(),
        }
    }

    fn fresh(&mut self, color: Color, count: usize) -> VecDeque<usize> {
        (0..count)
            .map(|_| self.c.add_qubit(color, 0, Role::Ancilla))
            .collect()
    }

    /// Copies the library gadget `kind` onto logical qubits `logical`.
    fn gadget(&mut self, kind: GadgetKind, logical: &[usize], pool: &mut Pool) -> Result<GadgetRecord> {
        let inst = gadget(kind);
        let wires: Vec<usize> = logical.iter().map(|&k| self.loc[k]).collect();
        let mut map = vec![usize::MAX; inst.circuit.num_qubits()];
        for (&local, &w) in inst.target_whites.iter().zip(&wires) {
            map[local] = w;
        }
        let mut ancillas = Vec::new();
        for q in &inst.circuit.qubits {
            if map[q.index] == usize::MAX {
                map[q.index] = pool.take(q.color)?;
                ancillas.push(map[q.index]);
            }
        }
        let start = self.c.body.len();
        for g in &inst.circuit.body {
            let targets: Vec<usize> = g.targets.iter().map(|&t| map[t]).collect();
            self.c.push(Gate::new(g.kind, &targets));
        }
        for (&k, &local) in logical.iter().zip(&inst.output_whites) {
            self.loc[k] = map[local];
        }
        Ok(GadgetRecord {
            kind: kind.name().to_string(),
            gates: (start, self.c.body.len()),
            wires,
            ancillas,
        })
    }

    /// `S†` inside the body: one black joined to the white, carrying `S`.
    fn s_dagger(&mut self, k: usize, pool: &mut Pool) -> Result<GadgetRecord> {
        let w = self.loc[k];
        let b = pool.take(Color::Black)?;
        let start = self.c.body.len();
        self.c.push(Gate::cz(w, b));
        self.c.push(Gate::t(b, 2));
        Ok(GadgetRecord {
            kind: "s-dagger".into(),
            gates: (start, self.c.body.len()),
            wires: vec![w],
            ancillas: vec![b],
        })
    }

    fn pad(&mut self, slot: String, pool: &mut Pool) -> PaddingRecord {
        let whites: Vec<usize> = pool.whites.drain(..).collect();
        let blacks: Vec<usize> = pool.blacks.drain(..).collect();
        let (paired, hsh) = blacks.split_at(whites.len());
        let start = self.c.body.len();
        for &b in hsh {
            self.c.push(Gate::t(b, 2));
        }
        let pairs: Vec<(usize, usize)> = whites.iter().copied().zip(paired.iter().copied()).collect();
        for &(w, b) in &pairs {
            self.c.push(Gate::cz(w, b));
        }
        PaddingRecord {
            slot,
            gates: (start, self.c.body.len()),
            hsh_blacks: hsh.to_vec(),
            pairs,
        }
    }

    /// Postselects everything but the final locations, assigns roles and
    /// renames the final locations to `0..n`.
    fn finish(mut self, mut trace: LoweringTrace) -> Result<(Circuit, LoweringTrace)> {
        let n = self.loc.len();
        for q in 0..self.c.num_qubits() {
            self.c.qubits[q].role = Role::Ancilla;
        }
        for k in 0..n {
            if self.loc[k] == k {
                self.c.qubits[k].role = Role::InputOutput;
            } else {
                self.c.qubits[k].role = Role::Input;
                self.c.qubits[self.loc[k]].role = Role::Output;
            }
        }
        self.c.postselect = (0..self.c.num_qubits())
            .filter(|q| !self.loc.contains(q))
            .map(|q| (q, 0))
            .collect();
        let mut perm = vec![usize::MAX; self.c.num_qubits()];
        for (k, &q) in self.loc.iter().enumerate() {
            perm[q] = k;
        }
        let mut next = n;
        for p in perm.iter_mut().filter(|p| **p == usize::MAX) {
            *p = next;
            next += 1;
        }
        trace.inputs = (0..n).collect();
        trace.outputs = self.loc.clone();
        trace.total_qubits = self.c.num_qubits();
        trace.relabel(&perm);
        Ok((self.c.relabel(&perm)?, trace))
    }
}

fn fmt_gate(g: &Gate) -> String {
    let t: Vec<String> = g.targets.iter().map(|q| (q + 1).to_string()).collect();
    format!("{}({})", g.kind.name(), t.join(","))
}

/// Reads the monomials back out of a `build_cf`-shaped circuit.
fn monomials_of(cf: &Circuit) -> Result<PolyF2Deg3> {
    let bad = |why: String| Err(Error::UnsupportedShape(why));
    cf.check_well_formed()?;
    if !cf.sandwich {
        return bad("expected a sandwich circuit".into());
    }
    if let Some(q) = cf.qubits.iter().find(|q| q.color != Color::White || q.prep != 0) {
        return bad(format!("qubit {} is not a white qubit prepared in 0", q.index));
    }
    if !cf.postselect.is_empty() || !cf.outcome_flip.is_empty() {
        return bad("C_f carries no postselection or outcome flips".into());
    }
    let mut f = PolyF2Deg3::zero(cf.num_qubits());
    for g in &cf.body {
        if !matches!(g.kind, GateKind::Z | GateKind::CZ | GateKind::CCZ) {
            return bad(format!("gate {} is not Z, CZ or CCZ", fmt_gate(g)));
        }
        let mut t = g.targets.clone();
        t.sort_unstable();
        t.dedup();
        if t.len() != g.targets.len() {
            return bad(format!("gate {} repeats a qubit", fmt_gate(g)));
        }
        let before = f.monomial_count();
        f.toggle(&t)?;
        if f.monomial_count() < before {
            return bad(format!("monomial {} appears twice", fmt_gate(g)));
        }
    }
    Ok(f)
}

fn empty_trace(target: LoweringTarget, n: usize, expected: usize) -> LoweringTrace {
    LoweringTrace {
        target,
        n,
        total_qubits: 0,
        budget: ancilla_budget(n),
        expected_ancillas: expected,
        steps: Vec::new(),
        padding: Vec::new(),
        consumed: 0,
        padded: 0,
        inputs: Vec::new(),
        outputs: Vec::new(),
    }
}

fn pairs_of(n: usize) -> Vec<[usize; 2]> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| [i, j]))
        .collect()
}

fn triples_of(n: usize) -> Vec<[usize; 3]> {
    (0..n)
        .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k])))
        .collect()
}

fn lower(cf: &Circuit, target: LoweringTarget) -> Result<(Circuit, LoweringTrace)> {
    let f = monomials_of(cf)?;
    let n = f.n();
    let pairs = pairs_of(n);
    let triples = if target == LoweringTarget::Adiqp { triples_of(n) } else { Vec::new() };
    let expected = PAIR_SLOT * pairs.len() + (TRIPLE_WHITES + TRIPLE_BLACKS) * triples.len();
    let mut e = Emitter::new(n);
    let mut pair_pools: Vec<Pool> = Vec::new();
    for _ in &pairs {
        let blacks = e.fresh(Color::Black, PAIR_SLOT);
        pair_pools.push(Pool { whites: VecDeque::new(), blacks });
    }
    let mut triple_pools: Vec<Pool> = Vec::new();
    for _ in &triples {
        let whites = e.fresh(Color::White, TRIPLE_WHITES);
        let blacks = e.fresh(Color::Black, TRIPLE_BLACKS);
        triple_pools.push(Pool { whites, blacks });
    }
    let mut trace = empty_trace(target, n, expected);
    let mut used_pairs = vec![false; pairs.len()];
    let mut used_triples = vec![false; triples.len()];
    for g in &cf.body {
        let mut step = TraceStep {
            source: fmt_gate(g),
            gadgets: Vec::new(),
            ancillas_consumed: 0,
            prep_flip: None,
        };
        match g.kind {
            GateKind::Z => {
                let q = g.targets[0];
                e.c.qubits[q].prep ^= 1;
                step.prep_flip = Some(q);
            }
            GateKind::CZ => {
                let mut t = [g.targets[0], g.targets[1]];
                t.sort_unstable();
                let slot = pairs.iter().position(|p| *p == t).expect("pair slot");
                used_pairs[slot] = true;
                let pool = &mut pair_pools[slot];
                step.gadgets.push(e.gadget(GadgetKind::WhiteCZ, &t, pool)?);
            }
            GateKind::CCZ if target == LoweringTarget::AdiqpStar => {
                let start = e.c.body.len();
                let wires: Vec<usize> = g.targets.iter().map(|&k| e.loc[k]).collect();
                e.c.push(Gate::new(GateKind::CCZ, &wires));
                step.gadgets.push(GadgetRecord {
                    kind: "ccz".into(),
                    gates: (start, start + 1),
                    wires,
                    ancillas: Vec::new(),
                });
            }
            GateKind::CCZ => {
                let mut t = [g.targets[0], g.targets[1], g.targets[2]];
                t.sort_unstable();
                let slot = triples.iter().position(|p| *p == t).expect("triple slot");
                used_triples[slot] = true;
                let pool = &mut triple_pools[slot];
                for d in ccz_decompose() {
                    let logical: Vec<usize> = d.targets.iter().map(|&q| t[q]).collect();
                    let rec = match d.kind {
                        GateKind::CZ => e.gadget(GadgetKind::WhiteCZ, &logical, pool)?,
                        GateKind::H => e.gadget(GadgetKind::WhiteH, &logical, pool)?,
                        GateKind::TPower(1) => e.gadget(GadgetKind::WhiteHTH, &logical, pool)?,
                        GateKind::SDagger => e.s_dagger(logical[0], pool)?,
                        k => unreachable!("decomposition emits {}", k.name()),
                    };
                    step.gadgets.push(rec);
                }
                if !pool.whites.is_empty() || !pool.blacks.is_empty() {
                    return Err(Error::Consistency(format!(
                        "CCZ slot left {} white and {} black ancillas unused",
                        pool.whites.len(),
                        pool.blacks.len()
                    )));
                }
            }
            _ => unreachable!("checked by monomials_of"),
        }
        step.ancillas_consumed = step.gadgets.iter().map(|r| r.ancillas.len()).sum();
        trace.consumed += step.ancillas_consumed;
        trace.steps.push(step);
    }
    for (slot, pool) in pair_pools.iter_mut().enumerate() {
        if !used_pairs[slot] {
            let [i, j] = pairs[slot];
            let rec = e.pad(format!("CZ({},{})", i + 1, j + 1), pool);
            trace.padded += rec.size();
            trace.padding.push(rec);
        }
    }
    for (slot, pool) in triple_pools.iter_mut().enumerate() {
        if !used_triples[slot] {
            let [i, j, k] = triples[slot];
            let rec = e.pad(format!("CCZ({},{},{})", i + 1, j + 1, k + 1), pool);
            debug_assert_eq!(rec.hsh_blacks.len(), TRIPLE_HSH);
            trace.padded += rec.size();
            trace.padding.push(rec);
        }
    }
    let (c, trace) = e.finish(trace)?;
    trace.reconcile()?;
    Ok((c, trace))
}

/// Lowers `C_f` to an ADIQP circuit on `n + m` qubits.
///
/// Outputs are qubits `0..n` in logical order, every other qubit is
/// postselected on `0`, and the all-zero amplitude equals
/// `gap(f) / 2^(n + m/2)` up to a phase.
pub fn lower_to_adiqp(cf: &Circuit) -> Result<(Circuit, LoweringTrace)> {
    lower(cf, LoweringTarget::Adiqp)
}

/// Lowers `C_f` to ADIQP*: CCZ gates stay on the whites, CZ and Z are lowered
/// as in [`lower_to_adiqp`].
pub fn lower_to_adiqp_star(cf: &Circuit) -> Result<(Circuit, LoweringTrace)> {
    lower(cf, LoweringTarget::AdiqpStar)
}

/// A postselected ADIQP circuit implementing a white-register unitary.
#[derive(Clone, Debug)]
pub struct UniversalLowering {
    pub circuit: Circuit,
    /// Where logical qubit `k` enters.
    pub inputs: Vec<usize>,
    /// Where logical qubit `k` leaves (always `k`).
    pub outputs: Vec<usize>,
}

/// Lowers a plain circuit over `{H, T, CZ}` on white qubits to a sandwich
/// ADIQP circuit whose all-zero postselected action is the same unitary.
pub fn lower_universal(target: &Circuit) -> Result<UniversalLowering> {
    target.check_well_formed()?;
    let n = target.num_qubits();
    if n > MAX_UNIVERSAL_QUBITS {
        return Err(Error::ResourceLimit {
            what: "universal lowering register",
            actual: n,
            limit: MAX_UNIVERSAL_QUBITS,
        });
    }
    if target.sandwich || target.qubits.iter().any(|q| q.color != Color::White) {
        return Err(Error::Argument("target must be a plain circuit on white qubits".into()));
    }
    let mut e = Emitter::new(n);
    let mut pool = Pool::default();
    let trace = empty_trace(LoweringTarget::Adiqp, n, 0);
    for g in &target.body {
        let kinds: Vec<(GadgetKind, Vec<usize>)> = match g.kind {
            GateKind::H => vec![(GadgetKind::WhiteH, g.targets.clone())],
            GateKind::TPower(1) => {
                let q = g.targets.clone();
                vec![
                    (GadgetKind::WhiteH, q.clone()),
                    (GadgetKind::WhiteHTH, q.clone()),
                    (GadgetKind::WhiteH, q),
                ]
            }
            GateKind::CZ => {
                let (a, b) = (vec![g.targets[0]], vec![g.targets[1]]);
                vec![
                    (GadgetKind::WhiteH, a.clone()),
                    (GadgetKind::WhiteH, b.clone()),
                    (GadgetKind::WhiteCZ, g.targets.clone()),
                    (GadgetKind::WhiteH, a),
                    (GadgetKind::WhiteH, b),
                ]
            }
            k => {
                return Err(Error::Argument(format!(
                    "universal lowering takes H, T and CZ, found {}",
                    k.name()
                )))
            }
        };
        for (kind, logical) in kinds {
            let inst = gadget(kind);
            pool.whites.extend(e.fresh(Color::White, inst.circuit.count(Color::White) - logical.len()));
            pool.blacks.extend(e.fresh(Color::Black, inst.circuit.count(Color::Black)));
            e.gadget(kind, &logical, &mut pool)?;
        }
    }
    let (circuit, trace) = e.finish(trace)?;
    Ok(UniversalLowering {
        circuit,
        inputs: trace.inputs,
        outputs: trace.outputs,
    })
}

/// Distance (up to global phase) between the postselected action of a
/// universal lowering, rescaled by `2^(P/2)` for `P` postselected qubits, and
/// the target unitary.
pub fn universal_residual(target: &Circuit, lowered: &UniversalLowering) -> Result<f64> {
    let n = target.num_qubits();
    let want = linalg::unitary(&target.body, n);
    let (m, log2) = lazy_action(&lowered.circuit, &lowered.inputs, &lowered.outputs)?;
    let p = lowered.circuit.postselect.len() as f64;
    let got = m * C64::new((log2 + p / 2.0).exp2(), 0.0);
    Ok(linalg::phase_aligned_distance(&got, &want))
}

/// The masked circuit `C_{f,x}`: flips the recorded outcome of output qubit
/// `k` whenever `x[k]` is set, since `HZH = X` can be moved into the
/// measurement.
pub fn apply_mask(c: &Circuit, x: &[bool]) -> Result<Circuit> {
    let outputs = c.output_register();
    if x.len() != outputs.len() {
        return Err(Error::Argument(format!(
            "mask has {} bits, circuit has {} output qubits",
            x.len(),
            outputs.len()
        )));
    }
    if outputs.iter().enumerate().any(|(k, &q)| k != q || c.color(q) != Color::White) {
        return Err(Error::Argument(
            "mask needs white outputs on qubits 0..n".into(),
        ));
    }
    let mut out = c.clone();
    for (k, &bit) in x.iter().enumerate() {
        if bit && !out.outcome_flip.remove(&k) {
            out.outcome_flip.insert(k);
        }
    }
    Ok(out)
}

/// Result of checking `|<0|C_f^(2)|0>| = |gap(f)| / 2^(n + m/2)` for one `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapIdentityCheck {
    pub poly: String,
    pub n: usize,
    pub m: usize,
    pub gap: i64,
    pub amplitude: ScaledAmplitude,
    /// `|got/expected − 1|`, or `|got| · 2^(n+m/2)` when the gap is zero.
    pub relative_error: f64,
    pub valid: bool,
    pub reconciled: bool,
    pub ok: bool,
}

/// Tolerance used by [`gap_identity_check`].
pub const GAP_IDENTITY_TOLERANCE: f64 = 1e-9;

/// Compiles `f`, contracts the lowered circuit and compares with the gap.
pub fn gap_identity_check(f: &PolyF2Deg3) -> Result<GapIdentityCheck> {
    let (c, trace) = lower_to_adiqp(&build_cf(f))?;
    let valid = validate_adiqp(&c).ok;
    let reconciled = trace.reconcile().is_ok() && trace.consumed + trace.padded == trace.budget.m;
    let amplitude = run_lazy(&c, &trace)?;
    let gap = f.gap()?;
    let n = f.n();
    let m = trace.budget.m;
    let scale = n as f64 + m as f64 / 2.0;
    let relative_error = if gap == 0 {
        if amplitude.is_zero() {
            0.0
        } else {
            (amplitude.log2_abs() + scale).exp2()
        }
    } else {
        let want = (gap.unsigned_abs() as f64).log2() - scale;
        ((amplitude.log2_abs() - want).exp2() - 1.0).abs()
    };
    Ok(GapIdentityCheck {
        poly: f.to_string(),
        n,
        m,
        gap,
        amplitude,
        relative_error,
        valid,
        reconciled,
        ok: valid && reconciled && relative_error <= GAP_IDENTITY_TOLERANCE,
    })
}
