//! Exact strong simulation of ADIQP circuits whose black qubits each touch at
//! most one CZ, distribution metrics, and the deterministic-NOT search.
//!
//! With every black pendant on a single white, the CZ graph is a disjoint
//! union of stars centred on whites. Each star is simulated on its own: in the
//! frame between the Hadamard layers every pendant black acts on its white as
//! a diagonal Kraus operator `K_v(z)` (black outcome `v`, white value `z`), so
//! the white's 2×2 density matrix is updated once per black.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::distributions::{Distribution as _, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{validate_adiqp, Circuit, Color, Gate, GateKind, Role};
use crate::error::{Error, Result};
use crate::sim::{BitString, DenseSimulator, Distribution, StateVector};

/// Largest joint outcome space a single block may report.
pub const MAX_BLOCK_REPORTED: usize = 16;

/// Largest output width [`ProductDistribution::to_distribution`] expands.
pub const MAX_EXPANDED_WIDTH: usize = 24;

/// A white qubit and the blacks hanging off it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhiteBlock {
    pub white_index: usize,
    /// `(black, d)` with `T^d` the black's total phase.
    pub attached_blacks: Vec<(usize, u8)>,
    pub prep: u8,
}

/// Threshold on the per-black CZ count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DegreeBound {
    /// Blacks may be pendant on one white.
    #[default]
    AtMostOne,
    /// Blacks must be isolated.
    Zero,
}

/// Joint distribution of a few reported qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    /// Positions in the reported register.
    pub positions: Vec<usize>,
    /// `probs[j]`: bit `k` of `j` is the outcome at `positions[k]`.
    pub probs: Vec<f64>,
}

/// A distribution stored as independent factors over disjoint positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    pub width: usize,
    pub factors: Vec<Factor>,
    /// `log2` of the postselection success probability.
    pub log2_success: f64,
}

impl ProductDistribution {
    pub fn prob(&self, bits: &BitString) -> Result<f64> {
        if bits.len() != self.width {
            return Err(Error::InputShape(format!(
                "outcome has {} bits, distribution has width {}",
                bits.len(),
                self.width
            )));
        }
        Ok(self
            .factors
            .iter()
            .map(|f| {
                let j = f
                    .positions
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (k, &p)| acc | (bits.0[p] as usize) << k);
                f.probs[j]
            })
            .product())
    }

    /// `Pr[bit at position = 1]`.
    pub fn marginal_one(&self, position: usize) -> Result<f64> {
        let f = self
            .factors
            .iter()
            .find(|f| f.positions.contains(&position))
            .ok_or_else(|| Error::Argument(format!("no position {position}")))?;
        let k = f.positions.iter().position(|&p| p == position).unwrap();
        Ok(f.probs
            .iter()
            .enumerate()
            .filter(|(j, _)| j >> k & 1 == 1)
            .map(|(_, p)| p)
            .sum())
    }

    pub fn to_distribution(&self) -> Result<Distribution> {
        if self.width > MAX_EXPANDED_WIDTH {
            return Err(Error::ResourceLimit {
                what: "expanded distribution width",
                actual: self.width,
                limit: MAX_EXPANDED_WIDTH,
            });
        }
        let mut joint: Vec<(usize, f64)> = vec![(0, 1.0)];
        for f in &self.factors {
            let mut next = Vec::with_capacity(joint.len() * f.probs.len());
            for &(idx, p) in &joint {
                for (j, &q) in f.probs.iter().enumerate() {
                    if q == 0.0 || p == 0.0 {
                        continue;
                    }
                    let bits = f
                        .positions
                        .iter()
                        .enumerate()
                        .fold(idx, |acc, (k, &pos)| acc | (j >> k & 1) << pos);
                    next.push((bits, p * q));
                }
            }
            joint = next;
        }
        let mut d = Distribution::new(self.width);
        for (idx, p) in joint {
            d.add(BitString::from_index(idx, self.width), p)?;
        }
        Ok(d)
    }

    /// Seeded i.i.d. samples, factor by factor.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<BitString>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samplers: Vec<WeightedIndex<f64>> = self
            .factors
            .iter()
            .map(|f| WeightedIndex::new(&f.probs).map_err(|e| Error::Argument(e.to_string())))
            .collect::<Result<_>>()?;
        Ok((0..shots)
            .map(|_| {
                let mut bits = vec![false; self.width];
                for (f, s) in self.factors.iter().zip(&samplers) {
                    let j = s.sample(&mut rng);
                    for (k, &p) in f.positions.iter().enumerate() {
                        bits[p] = j >> k & 1 == 1;
                    }
                }
                BitString(bits)
            })
            .collect())
    }
}

/// Diagonal Kraus operator of a pendant black in the white's mid frame:
/// `kraus(d, prep)[v][z]`.
///
/// Read off a two-qubit simulation of `white = |z>`, `black = H|prep>`, CZ,
/// `T^d` on the black, then `H` on the black.
fn kraus(d: u8, prep: u8, attached: bool) -> [[C64; 2]; 2] {
    let mut k = [[C64::new(0.0, 0.0); 2]; 2];
    for z in 0..2usize {
        let mut s = StateVector::basis(2, z | (prep as usize) << 1);
        s.h(1);
        if attached {
            s.cz(0, 1);
        }
        s.t_power(1, d);
        s.h(1);
        for v in 0..2usize {
            k[v][z] = s.amplitude(z | v << 1);
        }
    }
    k
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    Reported(usize),
    Postselected(u8),
    Traced,
}

/// Running 2×2 weight `w[z][z']` with a shared `log2` scale.
struct Weights {
    w: [[C64; 2]; 2],
    log2: f64,
}

impl Weights {
    fn new() -> Self {
        Self {
            w: [[C64::new(1.0, 0.0); 2]; 2],
            log2: 0.0,
        }
    }

    fn mul(&mut self, m: [[C64; 2]; 2]) {
        let mut max = 0.0f64;
        for z in 0..2 {
            for zp in 0..2 {
                self.w[z][zp] *= m[z][zp];
                max = max.max(self.w[z][zp].norm());
            }
        }
        if max > 0.0 {
            for row in &mut self.w {
                for x in row {
                    *x /= max;
                }
            }
            self.log2 += max.log2();
        }
    }
}

/// Strong simulation under the default degree bound.
pub fn strong_simulate(c: &Circuit) -> Result<ProductDistribution> {
    strong_simulate_with(c, DegreeBound::AtMostOne)
}

/// Exact distribution over [`Circuit::reported_qubits`], conditioned on the
/// postselection map, in time linear in the number of qubits.
pub fn strong_simulate_with(c: &Circuit, bound: DegreeBound) -> Result<ProductDistribution> {
    let report = validate_adiqp(c);
    if !report.ok {
        let codes: Vec<String> = report.codes().iter().map(|c| format!("{c:?}")).collect();
        return Err(Error::UnsupportedClass(format!(
            "circuit is not ADIQP ({})",
            codes.join(", ")
        )));
    }
    let n = c.num_qubits();
    let limit = match bound {
        DegreeBound::AtMostOne => 1,
        DegreeBound::Zero => 0,
    };
    let mut anchor: Vec<Option<usize>> = vec![None; n];
    let mut phase = vec![0u8; n];
    let mut degree = vec![0usize; n];
    for g in &c.body {
        match g.kind {
            GateKind::CZ => {
                let (w, b) = if c.color(g.targets[0]) == Color::White {
                    (g.targets[0], g.targets[1])
                } else {
                    (g.targets[1], g.targets[0])
                };
                degree[b] += 1;
                anchor[b] = Some(w);
            }
            k => {
                let d = k.t_exponent().expect("validated body is diagonal");
                let q = g.targets[0];
                phase[q] = (phase[q] + d) % 8;
            }
        }
    }
    if let Some(b) = (0..n).find(|&b| degree[b] > limit) {
        return Err(Error::UnsupportedClass(format!(
            "black {b} has {} CZ gates, the bound is {limit}",
            degree[b]
        )));
    }
    let reported = c.reported_qubits();
    let mut fate = vec![Fate::Traced; n];
    for (pos, &q) in reported.iter().enumerate() {
        fate[q] = Fate::Reported(pos);
    }
    for (&q, &b) in &c.postselect {
        if let Fate::Reported(_) = fate[q] {
            continue;
        }
        fate[q] = Fate::Postselected(b);
    }
    let mut blacks_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for b in 0..n {
        if let Some(w) = anchor[b] {
            blacks_of[w].push(b);
        }
    }
    let mut factors = Vec::new();
    let mut log2_success = 0.0;
    for q in 0..n {
        let centre = match c.color(q) {
            Color::White => Some(q),
            Color::Black if anchor[q].is_none() => None,
            Color::Black => continue,
        };
        let (factor, log2) = simulate_block(c, centre, if centre.is_some() { &blacks_of[q] } else { std::slice::from_ref(&q) }, &phase, &fate)?;
        log2_success += log2;
        if let Some(f) = factor {
            factors.push(f);
        }
    }
    Ok(ProductDistribution {
        width: reported.len(),
        factors,
        log2_success,
    })
}

/// One star: `centre` white (or none for a lone black) and `blacks`.
/// Returns the normalized factor over its reported qubits and `log2` of its
/// unnormalized weight.
fn simulate_block(
    c: &Circuit,
    centre: Option<usize>,
    blacks: &[usize],
    phase: &[u8],
    fate: &[Fate],
) -> Result<(Option<Factor>, f64)> {
    let flip = |q: usize| c.outcome_flip.contains(&q) as usize;
    // A lone black behaves like a pendant on a virtual white held at z = 0.
    let (x, white_fate) = match centre {
        Some(w) => (c.qubits[w].prep, fate[w]),
        None => (0, Fate::Traced),
    };
    let mut weights = Weights::new();
    let mut reported_blacks = Vec::new();
    let mut reported_kraus = Vec::new();
    for &b in blacks {
        let k = kraus(phase[b], c.qubits[b].prep, centre.is_some());
        let outer = |v: usize| {
            let mut m = [[C64::new(0.0, 0.0); 2]; 2];
            for z in 0..2 {
                for zp in 0..2 {
                    m[z][zp] = k[v][z] * k[v][zp].conj();
                }
            }
            m
        };
        match fate[b] {
            Fate::Reported(_) => {
                reported_blacks.push(b);
                reported_kraus.push(k);
            }
            Fate::Postselected(v) => weights.mul(outer((v as usize) ^ flip(b))),
            Fate::Traced => {
                let (a, bb) = (outer(0), outer(1));
                let mut m = a;
                for z in 0..2 {
                    for zp in 0..2 {
                        m[z][zp] += bb[z][zp];
                    }
                }
                weights.mul(m);
            }
        }
    }
    if reported_blacks.len() + 1 > MAX_BLOCK_REPORTED {
        return Err(Error::ResourceLimit {
            what: "reported qubits in one block",
            actual: reported_blacks.len() + 1,
            limit: MAX_BLOCK_REPORTED,
        });
    }
    // Mid-frame white state H|x>, restricted to z = 0 for lone blacks.
    let psi: Vec<C64> = match centre {
        Some(_) => (0..2)
            .map(|z| C64::new(if x == 1 && z == 1 { -1.0 } else { 1.0 } * std::f64::consts::FRAC_1_SQRT_2, 0.0))
            .collect(),
        None => vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    };
    let hy = |y: usize, z: usize| if y == 1 && z == 1 { -std::f64::consts::FRAC_1_SQRT_2 } else { std::f64::consts::FRAC_1_SQRT_2 };
    let white_outcomes: Vec<Option<usize>> = match white_fate {
        Fate::Reported(_) => vec![Some(0), Some(1)],
        Fate::Postselected(v) => vec![Some(v as usize ^ flip(centre.unwrap()))],
        Fate::Traced => vec![None],
    };
    let mut positions = Vec::new();
    if let Fate::Reported(p) = white_fate {
        positions.push(p);
    }
    for &b in &reported_blacks {
        if let Fate::Reported(p) = fate[b] {
            positions.push(p);
        }
    }
    let mut probs = vec![0.0; 1 << positions.len()];
    let white_reported = matches!(white_fate, Fate::Reported(_));
    for pattern in 0..1usize << reported_blacks.len() {
        // Product of reported-black Kraus factors per z.
        let mut r = [C64::new(1.0, 0.0); 2];
        for (i, (k, &b)) in reported_kraus.iter().zip(&reported_blacks).enumerate() {
            let v = (pattern >> i & 1) ^ flip(b);
            r[0] *= k[v][0];
            r[1] *= k[v][1];
        }
        for y in &white_outcomes {
            let mut p = C64::new(0.0, 0.0);
            for z in 0..2 {
                for zp in 0..2 {
                    let h = match y {
                        Some(y) => hy(*y, z) * hy(*y, zp),
                        None => (z == zp) as u8 as f64,
                    };
                    p += psi[z] * psi[zp].conj() * r[z] * r[zp].conj() * weights.w[z][zp] * h;
                }
            }
            let mut idx = 0usize;
            let mut shift = 0;
            if white_reported {
                let phys = y.unwrap() ^ flip(centre.unwrap());
                idx |= phys;
                shift = 1;
            }
            idx |= pattern << shift;
            probs[idx] += p.re.max(0.0);
        }
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::DegeneratePostselection);
    }
    probs.iter_mut().for_each(|p| *p /= total);
    let log2 = total.log2() + weights.log2;
    Ok(((!positions.is_empty()).then_some(Factor { positions, probs }), log2))
}

/// `Σ_y |P(y) − Q(y)|`.
pub fn l1_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.width() != q.width() {
        return Err(Error::Argument(format!(
            "distributions over {} and {} bits",
            p.width(),
            q.width()
        )));
    }
    let mut keys: BTreeMap<&BitString, (f64, f64)> = BTreeMap::new();
    for (k, v) in p.iter() {
        keys.entry(k).or_default().0 = v;
    }
    for (k, v) in q.iter() {
        keys.entry(k).or_default().1 = v;
    }
    Ok(keys.values().map(|(a, b)| (a - b).abs()).sum())
}

/// Outcome of [`multiplicative_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativeReport {
    pub holds: bool,
    /// Outcome with the largest `|P − Q| − c·Q`.
    pub worst: Option<BitString>,
    pub worst_excess: f64,
}

/// Checks `|P(y) − Q(y)| ≤ c·Q(y)` for every outcome.
pub fn multiplicative_check(p: &Distribution, q: &Distribution, c: f64) -> Result<MultiplicativeReport> {
    if !(c >= 1.0) {
        return Err(Error::Argument(format!("multiplicative constant {c} is below 1")));
    }
    if p.width() != q.width() {
        return Err(Error::Argument("distributions over different widths".into()));
    }
    let mut worst: Option<(BitString, f64)> = None;
    let mut keys: BTreeMap<&BitString, (f64, f64)> = BTreeMap::new();
    for (k, v) in p.iter() {
        keys.entry(k).or_default().0 = v;
    }
    for (k, v) in q.iter() {
        keys.entry(k).or_default().1 = v;
    }
    for (k, (a, b)) in keys {
        let excess = (a - b).abs() - c * b;
        if worst.as_ref().is_none_or(|(_, e)| excess > *e) {
            worst = Some((k.clone(), excess));
        }
    }
    let holds = worst.as_ref().is_none_or(|(_, e)| *e <= 0.0);
    Ok(MultiplicativeReport {
        holds,
        worst_excess: worst.as_ref().map_or(0.0, |(_, e)| *e),
        worst: if holds { None } else { worst.map(|(k, _)| k) },
    })
}

/// Register layout swept by [`not_infeasibility_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotVariant {
    /// The input white is also the output white.
    SameRegister,
    /// The input white is discarded and a fresh white (prepared in 0) is read.
    DistinctRegister,
}

/// A black in the search family: its white neighbours (local white indices)
/// and its phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlackSpec {
    pub whites: (usize, Option<usize>),
    pub d: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotCandidate {
    pub variant: NotVariant,
    pub white_ancilla_preps: Vec<u8>,
    pub blacks: Vec<BlackSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotSearchReport {
    pub max_blacks: usize,
    pub max_white_ancillas: usize,
    pub exhaustive: bool,
    pub evaluated: usize,
    pub max_success: f64,
    pub best: Option<NotCandidate>,
    pub per_variant: BTreeMap<String, f64>,
}

/// Families larger than this are sampled instead of swept.
pub const EXHAUSTIVE_THRESHOLD: usize = 2_000_000;
/// Samples drawn per variant when sampling.
pub const SAMPLED_CANDIDATES: usize = 200_000;
/// Dense width cap for one candidate.
pub const MAX_NOT_QUBITS: usize = 12;

impl NotCandidate {
    /// Builds the circuit for input bit `x`. White `0` carries the input;
    /// the output white is `0` (same register) or `1` (distinct register).
    pub fn circuit(&self, x: u8) -> Circuit {
        let mut c = Circuit::sandwich();
        match self.variant {
            NotVariant::SameRegister => {
                c.add_qubit(Color::White, x, Role::InputOutput);
            }
            NotVariant::DistinctRegister => {
                c.add_qubit(Color::White, x, Role::Input);
                c.add_qubit(Color::White, 0, Role::Output);
            }
        }
        for &p in &self.white_ancilla_preps {
            c.add_qubit(Color::White, p, Role::Ancilla);
        }
        for spec in &self.blacks {
            let b = c.add_qubit(Color::Black, 0, Role::Ancilla);
            c.push(Gate::cz(spec.whites.0, b));
            if let Some(w) = spec.whites.1 {
                c.push(Gate::cz(w, b));
            }
            c.push(Gate::t(b, spec.d));
        }
        c
    }

    fn whites(&self) -> usize {
        self.white_ancilla_preps.len()
            + match self.variant {
                NotVariant::SameRegister => 1,
                NotVariant::DistinctRegister => 2,
            }
    }
}

/// `min_x Pr[output = x ⊕ 1]` for a circuit family member `circuit(x)`.
pub fn not_success(build: impl Fn(u8) -> Circuit) -> Result<f64> {
    let sim = DenseSimulator::with_limit(MAX_NOT_QUBITS);
    let mut worst = f64::INFINITY;
    for x in 0..2u8 {
        let c = build(x);
        let out = sim.run(&c)?;
        if out.distribution.width() != 1 {
            return Err(Error::Argument("NOT candidates need a one-qubit output".into()));
        }
        let p = out.distribution.prob(&BitString(vec![x == 0]));
        worst = worst.min(p);
    }
    Ok(worst)
}

fn black_types(whites: usize) -> Vec<BlackSpec> {
    let mut out = Vec::new();
    for a in 0..whites {
        let mut sets = vec![(a, None)];
        sets.extend((a + 1..whites).map(|b| (a, Some(b))));
        for s in sets {
            for d in 0..8 {
                out.push(BlackSpec { whites: s, d });
            }
        }
    }
    out
}

/// Multisets of size `k` from `0..n`, as non-decreasing index vectors.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

fn family(max_blacks: usize, max_white_ancillas: usize) -> Vec<NotCandidate> {
    let mut out = Vec::new();
    for variant in [NotVariant::SameRegister, NotVariant::DistinctRegister] {
        for w in 0..=max_white_ancillas {
            let base = match variant {
                NotVariant::SameRegister => 1,
                NotVariant::DistinctRegister => 2,
            };
            let types = black_types(base + w);
            for preps in 0..1usize << w {
                let white_ancilla_preps: Vec<u8> = (0..w).map(|i| (preps >> i & 1) as u8).collect();
                for k in 0..=max_blacks {
                    for m in multisets(types.len(), k) {
                        out.push(NotCandidate {
                            variant,
                            white_ancilla_preps: white_ancilla_preps.clone(),
                            blacks: m.iter().map(|&i| types[i]).collect(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Sweeps ADIQP circuits with one input and one output white for the best
/// deterministic NOT, returning the maximum over the family of
/// `min_x Pr[output = x ⊕ 1]`.
pub fn not_infeasibility_search(max_blacks: usize, max_white_ancillas: usize, seed: u64) -> Result<NotSearchReport> {
    let qubits = 2 + max_white_ancillas + max_blacks;
    if qubits > MAX_NOT_QUBITS {
        return Err(Error::ResourceLimit {
            what: "NOT-search candidate width",
            actual: qubits,
            limit: MAX_NOT_QUBITS,
        });
    }
    let mut candidates = family(max_blacks, max_white_ancillas);
    let exhaustive = candidates.len() <= EXHAUSTIVE_THRESHOLD;
    if !exhaustive {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        candidates.shuffle(&mut rng);
        candidates.truncate(SAMPLED_CANDIDATES);
    }
    let scored: Vec<(f64, usize)> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, cand)| {
            debug_assert!(cand.whites() + cand.blacks.len() <= MAX_NOT_QUBITS);
            not_success(|x| cand.circuit(x)).map(|p| (p, i))
        })
        .collect::<Result<_>>()?;
    let mut per_variant: BTreeMap<String, f64> = BTreeMap::new();
    let mut best: Option<(f64, usize)> = None;
    for &(p, i) in &scored {
        let key = match candidates[i].variant {
            NotVariant::SameRegister => "same-register",
            NotVariant::DistinctRegister => "distinct-register",
        };
        let e = per_variant.entry(key.into()).or_insert(0.0);
        *e = e.max(p);
        if best.is_none_or(|(bp, _)| p > bp) {
            best = Some((p, i));
        }
    }
    Ok(NotSearchReport {
        max_blacks,
        max_white_ancillas,
        exhaustive,
        evaluated: scored.len(),
        max_success: best.map_or(0.0, |(p, _)| p),
        best: best.map(|(_, i)| candidates[i].clone()),
        per_variant,
    })
}
