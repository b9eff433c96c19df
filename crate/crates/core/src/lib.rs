//! Compressed sparse regression.
//!
//! A data owner releases `Z = ΦX` and `W = ΦY` for a random Gaussian masking
//! matrix `Φ` instead of the raw design `X` and response `Y`. This crate
//! provides the pieces needed to study what survives that compression:
//!
//! * [`linalg`]: small dense linear algebra (Cholesky, Jacobi eigenvalues).
//! * [`compress`]: seeded Gaussian masking operators.
//! * [`lasso`]: LARS/lasso regularization paths, coordinate descent, the
//!   ℓ1-constrained form and KKT certificates.
//! * [`incoherence`]: S-incoherence diagnostics, sample-size bounds and
//!   regularization schedules.
//! * [`concentration`]: analytic tail bounds paired with Monte-Carlo checks.
//! * [`experiments`]: sign-recovery and predictive-risk simulation harnesses.
//! * [`privacy`]: information-rate upper bounds for the released data.
//!
//! The numerical core is generic over [`Scalar`]; the experiment harnesses
//! run in `f64` through the [`RealMatrix`] / [`RealVector`] aliases.

pub mod compress;
pub mod concentration;
pub mod error;
pub mod experiments;
pub mod incoherence;
pub mod lasso;
pub mod linalg;
pub mod privacy;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use scalar::Scalar;

/// Double-precision dense matrix used throughout the experiment code.
pub type RealMatrix = Matrix<f64>;
/// Double-precision dense vector.
pub type RealVector = Vector<f64>;

/// Single-precision variants, handy for quick exploratory runs.
pub type RealMatrix32 = Matrix<f32>;
pub type RealVector32 = Vector<f32>;
