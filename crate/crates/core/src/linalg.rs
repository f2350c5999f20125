//! Small dense matrices used as reference operators. Index bit `k` is qubit
//! `k` (little-endian), matching the simulators.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::circuit::Gate;
use crate::sim::state::{omega_pow, StateVector};

pub type Matrix = DMatrix<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(qubits: usize) -> Matrix {
    Matrix::identity(1 << qubits, 1 << qubits)
}

pub fn hadamard() -> Matrix {
    let r = FRAC_1_SQRT_2;
    Matrix::from_row_slice(2, 2, &[c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)])
}

pub fn t_power(d: u8) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), omega_pow(d)]))
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Diagonal matrix on `qubits` qubits with `phase(index)` on the diagonal.
pub fn diagonal(qubits: usize, phase: impl Fn(usize) -> C64) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_fn(1 << qubits, |i, _| phase(i)))
}

pub fn cz() -> Matrix {
    diagonal(2, |i| if i == 3 { c(-1.0, 0.0) } else { c(1.0, 0.0) })
}

pub fn ccz() -> Matrix {
    diagonal(3, |i| if i == 7 { c(-1.0, 0.0) } else { c(1.0, 0.0) })
}

/// `a ⊗ b` with `b` on the low-order qubits.
pub fn kron(high: &Matrix, low: &Matrix) -> Matrix {
    high.kronecker(low)
}

/// Applies the single-qubit `u` to qubit `q` of a `qubits`-qubit register.
pub fn on_qubit(u: &Matrix, q: usize, qubits: usize) -> Matrix {
    let mut m = Matrix::identity(1, 1);
    for k in (0..qubits).rev() {
        let f = if k == q { u.clone() } else { identity(1) };
        m = kron(&m, &f);
    }
    m
}

/// `u` applied to every qubit.
pub fn on_all(u: &Matrix, qubits: usize) -> Matrix {
    (0..qubits).fold(identity(qubits), |acc, q| on_qubit(u, q, qubits) * acc)
}

/// Unitary of a gate sequence on `qubits` qubits (first gate applied first).
pub fn unitary(gates: &[Gate], qubits: usize) -> Matrix {
    let dim = 1 << qubits;
    let mut m = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(qubits, col);
        gates.iter().for_each(|g| s.apply(g));
        for (row, a) in s.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    m
}

/// Largest singular value.
pub fn op_norm(m: &Matrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `min over phi of ||a - e^{i phi} b||`, with `phi` fixed by the overlap
/// `tr(b^† a)`.
pub fn phase_aligned_distance(a: &Matrix, b: &Matrix) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    op_norm(&(a - b * phase))
}
