//! Gaussian masking operators: `X ↦ ΦX + γΔ` and `Y ↦ ΦY`.

use crate::linalg::mat_mul;
use crate::rng::SeededStream;
use crate::{Error, RealMatrix, RealVector, Result};

/// An `m × n` masking matrix `Φ` together with the additive noise scale `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionOp {
    m: usize,
    n: usize,
    seed: Option<SeededStream>,
    gamma: f64,
    phi: RealMatrix,
}

impl CompressionOp {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stream `Φ` was drawn from; `None` for injected matrices.
    pub fn stream(&self) -> Option<SeededStream> {
        self.seed
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phi(&self) -> &RealMatrix {
        &self.phi
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        self.gamma = gamma;
        Ok(self)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::invalid("gamma", format!("must be finite and nonnegative, got {gamma}")));
    }
    Ok(())
}

/// Draws `Φ` with i.i.d. `N(0, 1/n)` entries in row-major order from `stream`.
pub fn make_projection(m: usize, n: usize, stream: SeededStream) -> Result<CompressionOp> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("m, n", format!("both must be positive, got m={m}, n={n}")));
    }
    let mut g = stream.gaussian();
    let mut data = vec![0.0; m * n];
    g.fill_normal(&mut data, (1.0 / n as f64).sqrt());
    Ok(CompressionOp {
        m,
        n,
        seed: Some(stream),
        gamma: 0.0,
        phi: RealMatrix::from_raw(m, n, data),
    })
}

/// Wraps a caller-supplied `Φ` verbatim.
pub fn inject_explicit(phi: RealMatrix, gamma: f64) -> Result<CompressionOp> {
    check_gamma(gamma)?;
    Ok(CompressionOp {
        m: phi.rows(),
        n: phi.cols(),
        seed: None,
        gamma,
        phi,
    })
}

/// `Z = Φx + γΔ` with `Δ` i.i.d. `N(0, 1)` drawn from `noise_stream`. The
/// noise stream is untouched when `γ = 0`.
pub fn apply_masking(op: &CompressionOp, x: &RealMatrix, noise_stream: SeededStream) -> Result<RealMatrix> {
    if op.n != x.rows() {
        return Err(Error::dims("apply_masking", format!("x.rows = {}", op.n), format!("x.rows = {}", x.rows())));
    }
    let z = mat_mul(&op.phi, x)?;
    if op.gamma == 0.0 {
        return Ok(z);
    }
    let mut g = noise_stream.gaussian();
    let data = z
        .as_slice()
        .iter()
        .map(|v| v + op.gamma * g.standard_normal())
        .collect();
    RealMatrix::from_vec(z.rows(), z.cols(), data)
}

/// `W = Φy`. Responses never receive additive noise.
pub fn compress_response(op: &CompressionOp, y: &[f64]) -> Result<RealVector> {
    if op.n != y.len() {
        return Err(Error::dims("compress_response", op.n, y.len()));
    }
    op.phi.mul_vec(y)
}
