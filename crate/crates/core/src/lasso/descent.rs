use crate::linalg::soft_threshold;
use crate::{Error, Result, Scalar, Vector};

use super::LassoProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub max_sweeps: usize,
    /// Stop once a full sweep moves no coordinate by more than this.
    pub tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_sweeps: 100_000,
            tol: 1e-10,
        }
    }
}

/// Cyclic coordinate descent for the penalized lasso at a single `λ`.
pub fn solve_penalized<T: Scalar>(prob: &LassoProblem<T>, lambda: T) -> Result<Vector<T>> {
    solve_penalized_with(prob, lambda, DescentOptions::default())
}

pub fn solve_penalized_with<T: Scalar>(
    prob: &LassoProblem<T>,
    lambda: T,
    opts: DescentOptions,
) -> Result<Vector<T>> {
    if !(lambda >= T::zero()) {
        return Err(Error::invalid("lambda", "must be nonnegative"));
    }
    let (gram, xty) = prob.normal_equations();
    let p = prob.cols();
    let tol = T::of(opts.tol);
    let mut beta = vec![T::zero(); p];
    // grad[j] = xty[j] − (Gβ)[j]
    let mut grad = xty;
    let mut last_change = T::infinity();
    for _ in 0..opts.max_sweeps {
        last_change = T::zero();
        for j in 0..p {
            let gjj = gram[(j, j)];
            if gjj <= T::zero() {
                continue;
            }
            let z = grad[j] + gjj * beta[j];
            let new = soft_threshold(z, lambda) / gjj;
            let delta = new - beta[j];
            if delta != T::zero() {
                for (k, g) in grad.iter_mut().enumerate() {
                    *g -= gram[(k, j)] * delta;
                }
                beta[j] = new;
                last_change = last_change.max(delta.abs());
            }
        }
        if last_change <= tol {
            return Ok(Vector::from_raw(beta));
        }
    }
    Err(Error::NotConverged {
        sweeps: opts.max_sweeps,
        last_change: last_change.as_f64(),
    })
}
