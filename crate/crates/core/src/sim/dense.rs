//! Exact statevector simulation of whole circuits.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::distribution::{BitString, Distribution};
use super::state::StateVector;
use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Default ceiling on dense simulation width (2^24 amplitudes, 256 MiB).
pub const DEFAULT_DENSE_LIMIT: usize = 24;

/// Success probabilities below this are treated as exactly zero.
const DEGENERATE_EPS: f64 = 1e-24;

/// Dense simulator with a configurable qubit ceiling.
#[derive(Clone, Copy, Debug)]
pub struct DenseSimulator {
    pub max_qubits: usize,
}

impl Default for DenseSimulator {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_DENSE_LIMIT,
        }
    }
}

/// Result of [`DenseSimulator::run`]: the distribution over the reported
/// qubits, conditioned on the postselection, and the success probability.
#[derive(Clone, Debug)]
pub struct DenseOutcome {
    pub reported: Vec<usize>,
    pub distribution: Distribution,
    pub success_probability: f64,
}

impl DenseSimulator {
    pub fn with_limit(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    fn check_size(&self, c: &Circuit) -> Result<()> {
        if c.num_qubits() > self.max_qubits {
            return Err(Error::ResourceLimit {
                what: "dense simulation qubit count",
                actual: c.num_qubits(),
                limit: self.max_qubits,
            });
        }
        c.check_well_formed()
    }

    /// Final state in the recorded-outcome basis, starting from `preps`.
    fn evolve_from(&self, c: &Circuit, preps: &[u8]) -> StateVector {
        let start = preps
            .iter()
            .enumerate()
            .fold(0usize, |acc, (q, &b)| acc | ((b as usize & 1) << q));
        let mut s = StateVector::basis(c.num_qubits(), start);
        if c.sandwich {
            (0..c.num_qubits()).for_each(|q| s.h(q));
        }
        c.body.iter().for_each(|g| s.apply(g));
        if c.sandwich {
            (0..c.num_qubits()).for_each(|q| s.h(q));
        }
        c.outcome_flip.iter().for_each(|&q| s.x(q));
        s
    }

    /// Final state vector, outcome flips applied.
    pub fn evolve(&self, c: &Circuit) -> Result<StateVector> {
        self.check_size(c)?;
        let preps: Vec<u8> = c.qubits.iter().map(|q| q.prep).collect();
        Ok(self.evolve_from(c, &preps))
    }

    /// Transition amplitude from the prepared input to the recorded outcome
    /// `out` (one bit per qubit).
    pub fn amplitude(&self, c: &Circuit, out: &[u8]) -> Result<C64> {
        if out.len() != c.num_qubits() {
            return Err(Error::InputShape(format!(
                "outcome has {} bits, circuit has {} qubits",
                out.len(),
                c.num_qubits()
            )));
        }
        let s = self.evolve(c)?;
        let idx = out
            .iter()
            .enumerate()
            .fold(0usize, |acc, (q, &b)| acc | ((b as usize & 1) << q));
        Ok(s.amplitude(idx))
    }

    /// Outcome distribution over [`Circuit::reported_qubits`], conditioned on
    /// the postselection map; other qubits are marginalized.
    pub fn run(&self, c: &Circuit) -> Result<DenseOutcome> {
        let s = self.evolve(c)?;
        let reported = c.reported_qubits();
        let (ps_mask, ps_value) = c.postselect.iter().fold((0usize, 0usize), |(m, v), (&q, &b)| {
            (m | 1 << q, v | (b as usize) << q)
        });
        let mut dist = Distribution::new(reported.len());
        let mut success = 0.0;
        let mut acc = std::collections::BTreeMap::<usize, f64>::new();
        for (i, a) in s.amplitudes().iter().enumerate() {
            if i & ps_mask != ps_value {
                continue;
            }
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            success += p;
            let key = reported
                .iter()
                .enumerate()
                .fold(0usize, |k, (pos, &q)| k | (i >> q & 1) << pos);
            *acc.entry(key).or_insert(0.0) += p;
        }
        if success <= DEGENERATE_EPS {
            return Err(Error::DegeneratePostselection);
        }
        for (k, p) in acc {
            dist.add(BitString::from_index(k, reported.len()), p / success)?;
        }
        Ok(DenseOutcome {
            reported,
            distribution: dist,
            success_probability: success,
        })
    }

    /// `shots` i.i.d. outcomes from the (conditioned) distribution.
    pub fn sample(&self, c: &Circuit, shots: usize, seed: u64) -> Result<Vec<BitString>> {
        if shots == 0 {
            return Err(Error::Argument("shot count must be positive".into()));
        }
        let outcome = self.run(c)?;
        sample_distribution(&outcome.distribution, shots, seed)
    }

    /// Postselected linear map from the `inputs` register to the `outputs`
    /// register.
    ///
    /// Column `j` is the output state (in recorded outcomes) for the
    /// computational input `j` (bit `k` of `j` is the prep of `inputs[k]`).
    /// Every qubit not in `outputs` must be postselected.
    pub fn action(&self, c: &Circuit, inputs: &[usize], outputs: &[usize]) -> Result<DMatrix<C64>> {
        self.check_size(c)?;
        for q in 0..c.num_qubits() {
            if !outputs.contains(&q) && !c.postselect.contains_key(&q) {
                return Err(Error::Argument(format!(
                    "qubit {q} is neither an output nor postselected"
                )));
            }
        }
        let base_out = c
            .postselect
            .iter()
            .fold(0usize, |acc, (&q, &b)| acc | (b as usize) << q);
        let mut m = DMatrix::zeros(1 << outputs.len(), 1 << inputs.len());
        for col in 0..1usize << inputs.len() {
            let mut preps: Vec<u8> = c.qubits.iter().map(|q| q.prep).collect();
            for (k, &q) in inputs.iter().enumerate() {
                preps[q] = (col >> k & 1) as u8;
            }
            let s = self.evolve_from(c, &preps);
            for row in 0..1usize << outputs.len() {
                let idx = outputs
                    .iter()
                    .enumerate()
                    .fold(base_out, |acc, (k, &q)| acc | (row >> k & 1) << q);
                m[(row, col)] = s.amplitude(idx);
            }
        }
        Ok(m)
    }
}

pub fn amplitude(c: &Circuit, out: &[u8]) -> Result<C64> {
    DenseSimulator::default().amplitude(c, out)
}

pub fn run_dense(c: &Circuit) -> Result<DenseOutcome> {
    DenseSimulator::default().run(c)
}

pub fn sample(c: &Circuit, shots: usize, seed: u64) -> Result<Vec<BitString>> {
    DenseSimulator::default().sample(c, shots, seed)
}

/// Seeded i.i.d. draws from `dist` (which is renormalized first).
pub fn sample_distribution(dist: &Distribution, shots: usize, seed: u64) -> Result<Vec<BitString>> {
    let dist = dist.normalized()?;
    let (keys, weights): (Vec<&BitString>, Vec<f64>) = dist.iter().unzip();
    let index = WeightedIndex::new(&weights).map_err(|e| Error::Argument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| keys[index.sample(&mut rng)].clone()).collect())
}
