//! Ancilla-driven IQP circuits: polynomial gaps, gadget compilation,
//! simulation and graph-state verification.

pub mod circuit;
pub mod compiler;
pub mod error;
pub mod f2poly;
pub mod gadgets;
pub mod linalg;
pub mod sim;
pub mod strongsim;
pub mod verifier;

pub use circuit::{Circuit, Color, Gate, GateKind, Role};
pub use error::{Error, Result};
pub use f2poly::PolyF2Deg3;

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/gadgets.md")]
    mod gadgets {}
    #[doc = include_str!("../../../book/src/compiler.md")]
    mod compiler {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/strong-simulation.md")]
    mod strong_simulation {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
