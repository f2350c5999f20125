//! Graph-state verification: stabilizer generators, a symplectic tableau,
//! noisy copy sources and the `2k+1`-copy stabilizer test.
//!
//! ADIQP circuits only ever produce two-colorable graph states (up to local
//! phases on the blacks). A two-colorable graph state is a CSS state, which
//! is why checking random generators suffices here.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{graph_of, validate_adiqp, Circuit};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sim::StateVector;

/// Largest graph the density-matrix source accepts.
pub const MAX_DENSE_VERTICES: usize = 10;

/// Two-colorable graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphState {
    pub q: usize,
    pub edges: BTreeSet<(usize, usize)>,
    pub coloring: Vec<u8>,
}

impl GraphState {
    /// Builds the graph, finding a two-coloring by breadth-first search.
    pub fn new(q: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= q || b >= q || a == b {
                return Err(Error::Argument(format!("bad edge ({a}, {b}) on {q} vertices")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![Vec::new(); q];
        for &(a, b) in &set {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut coloring = vec![u8::MAX; q];
        for s in 0..q {
            if coloring[s] != u8::MAX {
                continue;
            }
            coloring[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &u in &adj[v] {
                    if coloring[u] == u8::MAX {
                        coloring[u] = coloring[v] ^ 1;
                        queue.push_back(u);
                    } else if coloring[u] == coloring[v] {
                        return Err(Error::Argument("graph is not two-colorable".into()));
                    }
                }
            }
        }
        Ok(Self { q, edges: set, coloring })
    }

    /// Uses a given coloring, which must be proper.
    pub fn with_coloring(q: usize, edges: BTreeSet<(usize, usize)>, coloring: Vec<u8>) -> Result<Self> {
        if coloring.len() != q || edges.iter().any(|&(a, b)| coloring[a] == coloring[b]) {
            return Err(Error::Argument("coloring is not a proper two-coloring".into()));
        }
        Ok(Self { q, edges, coloring })
    }

    pub fn path(q: usize) -> Self {
        Self::new(q, (1..q).map(|i| (i - 1, i))).expect("paths are bipartite")
    }

    /// Random bipartite graph: random sides, each cross pair an edge with
    /// probability `p`.
    pub fn random_bipartite<R: Rng + ?Sized>(q: usize, p: f64, rng: &mut R) -> Self {
        let side: Vec<u8> = (0..q).map(|_| rng.gen_range(0..2)).collect();
        let mut edges = BTreeSet::new();
        for a in 0..q {
            for b in a + 1..q {
                if side[a] != side[b] && rng.gen_bool(p) {
                    edges.insert((a, b));
                }
            }
        }
        Self::new(q, edges).expect("cross edges only")
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Graph state vector `∏ CZ_e |+>^q`.
    pub fn state_vector(&self) -> Result<StateVector> {
        if self.q > 20 {
            return Err(Error::ResourceLimit {
                what: "graph state vector vertices",
                actual: self.q,
                limit: 20,
            });
        }
        let mut s = StateVector::basis(self.q, 0);
        (0..self.q).for_each(|v| s.h(v));
        self.edges.iter().for_each(|&(a, b)| s.cz(a, b));
        Ok(s)
    }
}

/// Packed bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % 64);
        if v {
            self.0[i / 64] |= m;
        } else {
            self.0[i / 64] &= !m;
        }
    }

    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1u64 << (i % 64);
    }

    fn xor(&mut self, o: &Bits) {
        self.0.iter_mut().zip(&o.0).for_each(|(a, b)| *a ^= b);
    }

    fn and_count(&self, o: &Bits) -> u32 {
        self.0.iter().zip(&o.0).map(|(a, b)| (a & b).count_ones()).sum()
    }
}

/// Hermitian Pauli string `±P_1 ⊗ … ⊗ P_q`; `(x, z) = (1, 1)` is `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pauli {
    q: usize,
    x: Bits,
    z: Bits,
    pub negative: bool,
}

impl Pauli {
    pub fn identity(q: usize) -> Self {
        Self {
            q,
            x: Bits::zeros(q),
            z: Bits::zeros(q),
            negative: false,
        }
    }

    pub fn len(&self) -> usize {
        self.q
    }

    pub fn is_empty(&self) -> bool {
        self.q == 0
    }

    pub fn x_bit(&self, i: usize) -> bool {
        self.x.get(i)
    }

    pub fn z_bit(&self, i: usize) -> bool {
        self.z.get(i)
    }

    pub fn set(&mut self, i: usize, x: bool, z: bool) {
        self.x.set(i, x);
        self.z.set(i, z);
    }

    pub fn commutes_with(&self, o: &Pauli) -> bool {
        (self.x.and_count(&o.z) + self.z.and_count(&o.x)).is_multiple_of(2)
    }

    /// Product `self · o` of two commuting Paulis (a Hermitian Pauli again).
    pub fn mul(&self, o: &Pauli) -> Pauli {
        debug_assert!(self.commutes_with(o));
        // Sum of per-qubit phase exponents (powers of i) from X^x Z^z forms.
        let mut e: i64 = 0;
        for i in 0..self.q {
            e += g_phase(self.x.get(i), self.z.get(i), o.x.get(i), o.z.get(i));
        }
        let total = 2 * (self.negative as i64) + 2 * (o.negative as i64) + e;
        let mut x = self.x.clone();
        x.xor(&o.x);
        let mut z = self.z.clone();
        z.xor(&o.z);
        Pauli {
            q: self.q,
            x,
            z,
            negative: total.rem_euclid(4) == 2,
        }
    }

    /// `⟨ψ|P|ψ⟩` for a dense state.
    pub fn expectation_dense(&self, s: &StateVector) -> f64 {
        let xm = self.mask(&self.x);
        let zm = self.mask(&self.z);
        let y = (xm & zm).count_ones();
        let base = C64::new(0.0, 1.0).powu(y) * if self.negative { -1.0 } else { 1.0 };
        let mut acc = C64::new(0.0, 0.0);
        for (j, a) in s.amplitudes().iter().enumerate() {
            let sign = if (zm & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            // P|j> = base · sign(j) · |j ^ x>
            acc += s.amplitude(j ^ xm).conj() * a * sign;
        }
        (acc * base).re
    }

    /// `Tr(ρ P)` for a dense density matrix.
    pub fn expectation_density(&self, rho: &Matrix) -> f64 {
        let xm = self.mask(&self.x);
        let zm = self.mask(&self.z);
        let base = C64::new(0.0, 1.0).powu((xm & zm).count_ones()) * if self.negative { -1.0 } else { 1.0 };
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..rho.nrows() {
            let sign = if (zm & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += rho[(j ^ xm, j)] * sign;
        }
        (acc * base).re
    }

    fn mask(&self, b: &Bits) -> usize {
        (0..self.q).fold(0usize, |m, i| m | (b.get(i) as usize) << i)
    }
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis `(x1,z1)`
/// and `(x2,z2)`.
fn g_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i64 {
    let (x2, z2) = (x2 as i64, z2 as i64);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for i in 0..self.q {
            f.write_str(match (self.x.get(i), self.z.get(i)) {
                (false, false) => "I",
                (true, false) => "X",
                (true, true) => "Y",
                (false, true) => "Z",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let mut p = Pauli::identity(body.chars().count());
        p.negative = negative;
        for (i, ch) in body.chars().enumerate() {
            let (x, z) = match ch {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                other => return Err(Error::Argument(format!("bad Pauli letter {other:?}"))),
            };
            p.set(i, x, z);
        }
        Ok(p)
    }
}

/// One `X_v Z_{N(v)}` per vertex.
pub fn stabilizer_generators(g: &GraphState) -> Vec<Pauli> {
    (0..g.q)
        .map(|v| {
            let mut p = Pauli::identity(g.q);
            p.set(v, true, false);
            for u in g.neighbors(v) {
                p.set(u, false, true);
            }
            p
        })
        .collect()
}

/// Stabilizer generators of a pure state, updated under Clifford gates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerTableau {
    pub q: usize,
    pub rows: Vec<Pauli>,
}

impl StabilizerTableau {
    /// `|0…0>`, stabilized by every `Z_i`.
    pub fn zero_state(q: usize) -> Self {
        let rows = (0..q)
            .map(|i| {
                let mut p = Pauli::identity(q);
                p.set(i, false, true);
                p
            })
            .collect();
        Self { q, rows }
    }

    pub fn graph_state(g: &GraphState) -> Self {
        Self {
            q: g.q,
            rows: stabilizer_generators(g),
        }
    }

    pub fn h(&mut self, a: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x.get(a), r.z.get(a));
            r.negative ^= x && z;
            r.set(a, z, x);
        }
    }

    pub fn s(&mut self, a: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x.get(a), r.z.get(a));
            r.negative ^= x && z;
            r.set(a, x, z ^ x);
        }
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        for r in &mut self.rows {
            let (xa, za, xb, zb) = (r.x.get(a), r.z.get(a), r.x.get(b), r.z.get(b));
            r.negative ^= xa && zb && (xb == za);
            if xa {
                r.x.flip(b);
            }
            if zb {
                r.z.flip(a);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    /// Checks that the rows commute pairwise and are independent.
    pub fn check(&self) -> Result<()> {
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                if !self.rows[i].commutes_with(&self.rows[j]) {
                    return Err(Error::Consistency(format!("rows {i} and {j} anticommute")));
                }
            }
        }
        let vectors: Vec<Bits> = self.rows.iter().map(symplectic).collect();
        if rank(vectors) != self.rows.len() {
            return Err(Error::Consistency("rows are dependent".into()));
        }
        Ok(())
    }
}

fn symplectic(p: &Pauli) -> Bits {
    let mut v = Bits::zeros(2 * p.q);
    for i in 0..p.q {
        v.set(i, p.x.get(i));
        v.set(p.q + i, p.z.get(i));
    }
    v
}

fn rank(mut rows: Vec<Bits>) -> usize {
    let cols = rows.first().map_or(0, |r| r.0.len() * 64);
    let mut r = 0;
    for c in 0..cols {
        if let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) {
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor(&pivot);
                }
            }
            r += 1;
        }
    }
    r
}

/// `⟨P⟩` on the tableau's state: `±1` when `±P` is a stabilizer, else `0`.
pub fn tableau_expectation(t: &StabilizerTableau, p: &Pauli) -> Result<i8> {
    if p.q != t.q {
        return Err(Error::Argument(format!(
            "Pauli on {} qubits, tableau on {}",
            p.q, t.q
        )));
    }
    if t.rows.iter().any(|r| !r.commutes_with(p)) {
        return Ok(0);
    }
    // Solve p = Σ c_i rows_i over GF(2): eliminate on the augmented system
    // whose columns are the generators.
    let q = t.q;
    let n = t.rows.len();
    let mut eqs: Vec<(Bits, bool)> = (0..2 * q)
        .map(|bit| {
            let mut coeffs = Bits::zeros(n);
            for (i, r) in t.rows.iter().enumerate() {
                let b = if bit < q { r.x.get(bit) } else { r.z.get(bit - q) };
                coeffs.set(i, b);
            }
            let rhs = if bit < q { p.x.get(bit) } else { p.z.get(bit - q) };
            (coeffs, rhs)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if let Some(pi) = (r..eqs.len()).find(|&i| eqs[i].0.get(c)) {
            eqs.swap(r, pi);
            let (pc, pr) = eqs[r].clone();
            for (i, e) in eqs.iter_mut().enumerate() {
                if i != r && e.0.get(c) {
                    e.0.xor(&pc);
                    e.1 ^= pr;
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    if eqs[r..].iter().any(|e| e.1) {
        // Commutes with a full stabilizer group but is not in it: only
        // possible for mixed (under-generated) tableaux.
        return Ok(0);
    }
    let mut prod = Pauli::identity(q);
    for (row, &c) in pivots.iter().enumerate() {
        if eqs[row].1 {
            prod = prod.mul(&t.rows[c]);
        }
    }
    Ok(if prod.negative == p.negative { 1 } else { -1 })
}

/// Something that hands out copies of a (possibly noisy) graph state and
/// measures a generator on each.
pub trait CopySource: Sync {
    fn graph(&self) -> &GraphState;
    /// Measures generator `v` on a fresh copy; `true` on outcome `-1`.
    fn measure_generator(&self, v: usize, rng: &mut ChaCha8Rng) -> bool;
    /// Fidelity of a copy with the ideal graph state, when known exactly.
    fn exact_fidelity(&self) -> Option<f64> {
        None
    }
}

/// Noiseless copies, measured through the tableau.
pub struct IdealSource {
    graph: GraphState,
    tableau: StabilizerTableau,
    generators: Vec<Pauli>,
}

impl IdealSource {
    pub fn new(graph: GraphState) -> Self {
        Self {
            tableau: StabilizerTableau::graph_state(&graph),
            generators: stabilizer_generators(&graph),
            graph,
        }
    }
}

impl CopySource for IdealSource {
    fn graph(&self) -> &GraphState {
        &self.graph
    }

    fn measure_generator(&self, v: usize, rng: &mut ChaCha8Rng) -> bool {
        match tableau_expectation(&self.tableau, &self.generators[v]).expect("same width") {
            1 => false,
            -1 => true,
            _ => rng.gen_bool(0.5),
        }
    }

    fn exact_fidelity(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Applies `ρ → (1-p)ρ + (p/4)(ρ + XρX + YρY + ZρZ)` on qubit `k`.
fn depolarize(rho: &Matrix, k: usize, p: f64) -> Matrix {
    let m = 1usize << k;
    let dim = rho.nrows();
    let sgn = |i: usize| if i & m != 0 { -1.0 } else { 1.0 };
    Matrix::from_fn(dim, dim, |i, j| {
        let x = rho[(i ^ m, j ^ m)];
        let z = rho[(i, j)] * sgn(i) * sgn(j);
        let y = x * sgn(i ^ m) * sgn(j ^ m);
        rho[(i, j)] * (1.0 - 0.75 * p) + (x + y + z) * (p / 4.0)
    })
}

/// Dense density-matrix copies with per-qubit depolarizing noise.
pub struct DensitySource {
    graph: GraphState,
    rho: Matrix,
    failure: Vec<f64>,
    fidelity: f64,
}

impl DensitySource {
    pub fn depolarizing(graph: GraphState, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("noise level {p} outside [0, 1]")));
        }
        if graph.q > MAX_DENSE_VERTICES {
            return Err(Error::ResourceLimit {
                what: "density-matrix vertices",
                actual: graph.q,
                limit: MAX_DENSE_VERTICES,
            });
        }
        let psi = graph.state_vector()?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let mut rho = &v * v.adjoint();
        for k in 0..graph.q {
            rho = depolarize(&rho, k, p);
        }
        Self::from_density(graph, rho)
    }

    pub fn from_density(graph: GraphState, rho: Matrix) -> Result<Self> {
        if rho.nrows() != 1 << graph.q || rho.ncols() != rho.nrows() {
            return Err(Error::InputShape("density matrix size does not match the graph".into()));
        }
        let failure = stabilizer_generators(&graph)
            .iter()
            .map(|g| ((1.0 - g.expectation_density(&rho)) / 2.0).clamp(0.0, 1.0))
            .collect();
        let psi = graph.state_vector()?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let fidelity = (v.adjoint() * &rho * &v)[(0, 0)].re;
        Ok(Self {
            graph,
            rho,
            failure,
            fidelity,
        })
    }

    pub fn density(&self) -> &Matrix {
        &self.rho
    }

    /// `Tr(ρ (I − g_v)/2)` per generator.
    pub fn failure_probabilities(&self) -> &[f64] {
        &self.failure
    }
}

impl CopySource for DensitySource {
    fn graph(&self) -> &GraphState {
        &self.graph
    }

    fn measure_generator(&self, v: usize, rng: &mut ChaCha8Rng) -> bool {
        rng.gen_bool(self.failure[v])
    }

    fn exact_fidelity(&self) -> Option<f64> {
        Some(self.fidelity)
    }
}

/// Graph-state copies hit by random Paulis; scales to large graphs.
pub struct PauliFrameSource {
    graph: GraphState,
    generators: Vec<Pauli>,
    /// Probability of each of `X`, `Y`, `Z` per qubit.
    per_pauli: f64,
}

impl PauliFrameSource {
    /// Depolarizing at level `p`: `X`, `Y`, `Z` each with probability `p/4`.
    pub fn depolarizing(graph: GraphState, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("noise level {p} outside [0, 1]")));
        }
        Ok(Self {
            generators: stabilizer_generators(&graph),
            graph,
            per_pauli: p / 4.0,
        })
    }
}

impl CopySource for PauliFrameSource {
    fn graph(&self) -> &GraphState {
        &self.graph
    }

    fn measure_generator(&self, v: usize, rng: &mut ChaCha8Rng) -> bool {
        let g = &self.generators[v];
        // Only qubits in the generator's support can flip its outcome.
        let mut flip = false;
        for i in (0..self.graph.q).filter(|&i| g.x_bit(i) || g.z_bit(i)) {
            let u: f64 = rng.gen();
            let (ex, ez) = if u < self.per_pauli {
                (true, false)
            } else if u < 2.0 * self.per_pauli {
                (true, true)
            } else if u < 3.0 * self.per_pauli {
                (false, true)
            } else {
                continue;
            };
            // Anticommutes iff the symplectic product on this qubit is odd.
            flip ^= (ex && g.z_bit(i)) ^ (ez && g.x_bit(i));
        }
        flip
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorStats {
    pub vertex: usize,
    pub generator: String,
    pub measured: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub copies_used: usize,
    pub tested: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub fidelity_lower_bound: f64,
    /// Index of the copy left untested.
    pub kept_copy: usize,
    pub histogram: Vec<GeneratorStats>,
}

/// `max(0, 1 − q·p̂)`.
pub fn fidelity_bound(q: usize, failure_rate: f64) -> f64 {
    (1.0 - q as f64 * failure_rate).clamp(0.0, 1.0)
}

/// Draws `2k+1` copies, tests a uniformly random generator on `2k` of them
/// and bounds the fidelity of the remaining copy.
///
/// Copy `i` draws from its own ChaCha stream, so the outcome depends only on
/// the seed, not on the number of worker threads.
pub fn stabilizer_test(source: &dyn CopySource, k: usize, seed: u64) -> Result<TestOutcome> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let g = source.graph();
    if g.q == 0 {
        return Err(Error::Argument("graph has no vertices".into()));
    }
    let copies = 2 * k + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kept_copy = rng.gen_range(0..copies);
    let results: Vec<(usize, bool)> = (0..copies)
        .into_par_iter()
        .filter(|&i| i != kept_copy)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(i as u64 + 1);
            let v = r.gen_range(0..g.q);
            (v, source.measure_generator(v, &mut r))
        })
        .collect();
    let generators = stabilizer_generators(g);
    let mut histogram: Vec<GeneratorStats> = generators
        .iter()
        .enumerate()
        .map(|(v, p)| GeneratorStats {
            vertex: v,
            generator: p.to_string(),
            measured: 0,
            failures: 0,
        })
        .collect();
    for &(v, fail) in &results {
        histogram[v].measured += 1;
        histogram[v].failures += fail as usize;
    }
    let failures = results.iter().filter(|(_, f)| *f).count();
    let failure_rate = failures as f64 / (2 * k) as f64;
    Ok(TestOutcome {
        copies_used: copies,
        tested: 2 * k,
        failures,
        failure_rate,
        fidelity_lower_bound: fidelity_bound(g.q, failure_rate),
        kept_copy,
        histogram,
    })
}

/// Graph of CZ edges of a validated ADIQP circuit; black phases are local
/// diagonal gates and are dropped.
pub fn circuit_to_graphstate(c: &Circuit) -> Result<GraphState> {
    let report = validate_adiqp(c);
    if !report.ok {
        return Err(Error::Argument(format!(
            "circuit is not ADIQP: {}",
            report.violations.first().map_or("", |v| v.message.as_str())
        )));
    }
    let g = graph_of(c)?;
    GraphState::with_coloring(g.vertices, g.edges, g.coloring)
}
