//! Exact single-mode marginals for boson sampling.
//!
//! The photon-count distribution of one output mode depends only on the
//! squared moduli of that mode's column of the transition matrix, through
//! the elementary symmetric polynomials of those values. This crate
//! computes it in `O(R^2)` for `R` photons, in exact rational or float
//! arithmetic, and provides the slow routes used to check it: permanents
//! over all output configurations and interpolation of the generating
//! function.

pub mod error;
pub mod esp;
pub mod hbs;
pub mod marginals;
pub mod matrix;
pub mod numerics;
pub mod oracle;
pub mod par;
pub mod pgf;
pub mod tables;
pub mod validation;

pub use error::{Error, NumericsError, Result};
pub use marginals::{distinguishable_marginal, marginal, quantum_marginal, MarginalDistribution, Model};
pub use matrix::{ModSquaredGrid, ModeColumn, TransitionMatrix};
pub use numerics::{Backend, Complex, Rational, Scalar};
