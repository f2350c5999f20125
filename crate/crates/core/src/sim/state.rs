//! Statevector storage and gate kernels.
//!
//! Qubit `q` is bit `q` of the amplitude index (little-endian).

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::circuit::{Gate, GateKind};

/// Arrays at least this long are updated in parallel.
const PAR_THRESHOLD: usize = 1 << 14;

/// `e^{i pi d / 4}` for `d` in `0..8`, with exact axis values.
pub fn omega_pow(d: u8) -> C64 {
    let r = FRAC_1_SQRT_2;
    match d % 8 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(r, r),
        2 => C64::new(0.0, 1.0),
        3 => C64::new(-r, r),
        4 => C64::new(-1.0, 0.0),
        5 => C64::new(-r, -r),
        6 => C64::new(0.0, -1.0),
        _ => C64::new(r, -r),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The computational basis state `|index>`.
    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(amps.len().is_power_of_two(), "length must be a power of two");
        let qubits = amps.len().trailing_zeros() as usize;
        Self { qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter().map(|a| a.norm_sqr()).sum()
        } else {
            self.amps.iter().map(|a| a.norm_sqr()).sum()
        }
    }

    pub fn scale(&mut self, factor: C64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    fn for_pairs<F>(&mut self, q: usize, f: F)
    where
        F: Fn(&mut C64, &mut C64) + Sync,
    {
        let stride = 1 << q;
        let block = stride << 1;
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(block).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(stride);
                lo.par_iter_mut()
                    .zip(hi.par_iter_mut())
                    .for_each(|(a, b)| f(a, b));
            });
        } else {
            for chunk in self.amps.chunks_mut(block) {
                let (lo, hi) = chunk.split_at_mut(stride);
                lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| f(a, b));
            }
        }
    }

    /// Multiplies every amplitude whose index has all bits of `mask` set.
    fn phase_on_mask(&mut self, mask: usize, phase: C64) {
        let apply = |(i, a): (usize, &mut C64)| {
            if i & mask == mask {
                *a *= phase;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(apply);
        } else {
            self.amps.iter_mut().enumerate().for_each(apply);
        }
    }

    pub fn h(&mut self, q: usize) {
        self.for_pairs(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        });
    }

    pub fn x(&mut self, q: usize) {
        self.for_pairs(q, std::mem::swap);
    }

    /// `diag(1, e^{i pi d/4})` on `q`.
    pub fn t_power(&mut self, q: usize, d: u8) {
        if !d.is_multiple_of(8) {
            self.phase_on_mask(1 << q, omega_pow(d));
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.phase_on_mask((1 << a) | (1 << b), C64::new(-1.0, 0.0));
    }

    pub fn ccz(&mut self, a: usize, b: usize, c: usize) {
        self.phase_on_mask((1 << a) | (1 << b) | (1 << c), C64::new(-1.0, 0.0));
    }

    /// Applies `gate`, reading its targets through `position` (qubit label to
    /// bit position).
    pub fn apply_mapped(&mut self, gate: &Gate, position: impl Fn(usize) -> usize) {
        let t: Vec<usize> = gate.targets.iter().map(|&q| position(q)).collect();
        match gate.kind {
            GateKind::H => self.h(t[0]),
            GateKind::X => self.x(t[0]),
            GateKind::CZ => self.cz(t[0], t[1]),
            GateKind::CCZ => self.ccz(t[0], t[1], t[2]),
            k => self.t_power(t[0], k.t_exponent().expect("phase gate")),
        }
    }

    pub fn apply(&mut self, gate: &Gate) {
        self.apply_mapped(gate, |q| q);
    }
}
