//! Exact simulation: dense statevectors, windowed lazy contraction and
//! outcome distributions.

pub mod dense;
pub mod distribution;
pub mod lazy;
pub mod state;

pub use dense::{amplitude, run_dense, sample, DenseOutcome, DenseSimulator, DEFAULT_DENSE_LIMIT};
pub use distribution::{BitString, Distribution};
pub use lazy::{lazy_action, lazy_amplitude, run_lazy, run_lazy_outcome, ScaledAmplitude};
pub use state::StateVector;
