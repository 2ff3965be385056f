//! Desk-scale numerics for locally Hamiltonian flows near perfect saddles:
//! the Beta-like constant and extended Gamma conventions, local invariant
//! distributions on jets, singular sector integrals and their asymptotics,
//! interval exchange transformations with weighted endpoint norms, and
//! direct integration of the local flow.

// quadrature and Lanczos constants carry published guard digits
#![allow(clippy::excessive_precision)]
// comparisons written as !(x > 0) reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod flow;
pub mod grading;
pub mod iet;
pub mod jets;
pub mod quad;
pub mod sector;
pub mod special;

pub use error::{Error, Result};
pub use jets::{ComplexJet, SaddleModel};
pub use quad::{QuadSpec, SingPolicy};

pub use num_complex::Complex64;
pub use num_rational::Rational64;
