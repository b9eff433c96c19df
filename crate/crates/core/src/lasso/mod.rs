//! Lasso solvers.
//!
//! All solvers minimize `(1/(2·scale))‖y − Xβ‖² + λ‖β‖₁`, where `scale` is
//! the row count by default (`n` for raw data, `m` for compressed data).
//!
//! * [`lars_path`]: the full piecewise-linear regularization path (LARS with
//!   the lasso modification).
//! * [`solve_penalized`]: cyclic coordinate descent at a single `λ`; shares
//!   no code with the path and serves as its cross-check.
//! * [`solve_constrained`]: `min ‖y − Xβ‖²` s.t. `‖β‖₁ ≤ L`, read off the path.
//! * [`kkt_residual`]: subgradient optimality certificate.

mod constrained;
mod descent;
mod path;

pub use constrained::{constrained_point, solve_constrained, ConstrainedSolution};
pub use descent::{solve_penalized, solve_penalized_with, DescentOptions};
pub use path::{lars_path, Knot, LassoPath};

use crate::{Error, Matrix, Result, Scalar, Vector};

/// Design/response pair with the objective's `1/(2·scale)` divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoProblem<T> {
    design: Matrix<T>,
    response: Vector<T>,
    scale: T,
}

impl<T: Scalar> LassoProblem<T> {
    /// Uses the row count as the divisor.
    pub fn new(design: Matrix<T>, response: Vector<T>) -> Result<Self> {
        let scale = T::of_usize(design.rows());
        Self::with_scale(design, response, scale)
    }

    pub fn with_scale(design: Matrix<T>, response: Vector<T>, scale: T) -> Result<Self> {
        if response.len() != design.rows() {
            return Err(Error::dims("LassoProblem", design.rows(), response.len()));
        }
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::invalid("scale", "must be positive and finite"));
        }
        Ok(LassoProblem { design, response, scale })
    }

    pub fn design(&self) -> &Matrix<T> {
        &self.design
    }

    pub fn response(&self) -> &Vector<T> {
        &self.response
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn rows(&self) -> usize {
        self.design.rows()
    }

    pub fn cols(&self) -> usize {
        self.design.cols()
    }

    /// `(XᵀX/scale, Xᵀy/scale)`.
    pub(crate) fn normal_equations(&self) -> (Matrix<T>, Vec<T>) {
        let inv = T::one() / self.scale;
        let gram = self.design.gram().scaled(inv);
        let xty = self
            .design
            .t_mul_vec(&self.response)
            .expect("dimensions checked at construction")
            .iter()
            .map(|v| *v * inv)
            .collect();
        (gram, xty)
    }

    /// `‖(1/scale) Xᵀy‖∞`, the smallest `λ` with an all-zero solution.
    pub fn lambda_max(&self) -> T {
        self.normal_equations().1.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn residual(&self, beta: &[T]) -> Result<Vector<T>> {
        let fit = self.design.mul_vec(beta)?;
        self.response.sub(&fit)
    }

    /// Gradient of the fit term, `−(1/scale) Xᵀ(y − Xβ)`.
    pub fn fit_gradient(&self, beta: &[T]) -> Result<Vector<T>> {
        let r = self.residual(beta)?;
        let inv = T::one() / self.scale;
        Ok(Vector::from_raw(
            self.design.t_mul_vec(&r)?.iter().map(|v| -*v * inv).collect(),
        ))
    }

    pub fn objective(&self, beta: &[T], lambda: T) -> Result<T> {
        let r = self.residual(beta)?;
        let l1: T = beta.iter().map(|b| b.abs()).sum();
        Ok(r.norm2_sq() / (T::of(2.0) * self.scale) + lambda * l1)
    }
}

/// Optimality certificate for a candidate lasso solution.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport<T> {
    /// Largest violation `|g_i + λ·sign(β_i)|` over the support.
    pub residual: T,
    /// `sign(β_i)` on the support, `−g_j/λ` off it (`−g_j` when `λ = 0`).
    pub subgradient: Vector<T>,
    /// The implied subgradient `−g_i/λ` agrees in sign with `β_i` on the support.
    pub active_ok: bool,
    /// `max |g_j| ≤ λ(1 + 1e−8)` off the support.
    pub inactive_ok: bool,
}

impl<T: Scalar> KktReport<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.residual <= tol && self.active_ok && self.inactive_ok
    }
}

/// Evaluates the lasso KKT conditions for `beta` at `lambda`.
pub fn kkt_residual<T: Scalar>(prob: &LassoProblem<T>, lambda: T, beta: &[T]) -> Result<KktReport<T>> {
    let g = prob.fit_gradient(beta)?;
    let mut residual = T::zero();
    let mut active_ok = true;
    let mut off_max = T::zero();
    let mut z = Vec::with_capacity(beta.len());
    for (b, gi) in beta.iter().zip(g.iter()) {
        if *b != T::zero() {
            let s = b.signum();
            residual = residual.max((*gi + lambda * s).abs());
            if lambda > T::zero() && (-*gi).signum() != s {
                active_ok = false;
            }
            z.push(s);
        } else {
            off_max = off_max.max(gi.abs());
            z.push(if lambda > T::zero() { -*gi / lambda } else { -*gi });
        }
    }
    // absolute floor of 1e-12 absorbs rounding when λ = 0
    let inactive_ok = off_max <= lambda * T::of(1.0 + 1e-8) + T::of(1e-12);
    Ok(KktReport {
        residual,
        subgradient: Vector::from_raw(z),
        active_ok,
        inactive_ok,
    })
}

/// `‖y − Xβ‖² / (rows · ‖β‖₁)`: the regularization level attributed to a
/// path point when selecting the model closest to a target schedule.
pub fn path_lambda<T: Scalar>(beta: &[T], prob: &LassoProblem<T>) -> Result<T> {
    let l1: T = beta.iter().map(|b| b.abs()).sum();
    if l1 == T::zero() {
        return Err(Error::ZeroNorm);
    }
    let r = prob.residual(beta)?;
    Ok(r.norm2_sq() / (T::of_usize(prob.rows()) * l1))
}

/// Three-way sign with `|β_i| ≤ tol` mapped to zero.
pub fn sign_pattern<T: Scalar>(beta: &[T], tol: T) -> Vec<i8> {
    beta.iter()
        .map(|b| {
            if b.abs() <= tol {
                0
            } else if *b > T::zero() {
                1
            } else {
                -1
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RealMatrix;

    #[test]
    fn sign_pattern_cases() {
        assert_eq!(sign_pattern(&[0.9, -1.7, 0.0], 0.0), vec![1, -1, 0]);
        assert_eq!(sign_pattern(&[1e-12, 2.0], 1e-10), vec![0, 1]);
        let star = [-0.9, -1.7, 1.1, 1.3, 0.9];
        assert_eq!(sign_pattern(&star, 0.0), vec![-1, -1, 1, 1, 1]);
    }

    #[test]
    fn path_lambda_cases() {
        let x = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let beta = [0.5, -2.0];
        let y = x.mul_vec(&beta).unwrap();
        let prob = LassoProblem::new(x, y).unwrap();
        assert_eq!(path_lambda(&beta, &prob).unwrap(), 0.0);
        assert_eq!(path_lambda(&[0.0, 0.0], &prob), Err(Error::ZeroNorm));

        // zero design, ‖β‖₁ = 1, ‖y‖² = m
        let m = 4;
        let prob = LassoProblem::new(RealMatrix::zeros(m, 3), Vector::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(path_lambda(&[0.25, -0.5, 0.25], &prob).unwrap(), 1.0);
    }

    #[test]
    fn kkt_zero_solution_above_lambda_max() {
        let x = RealMatrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]]).unwrap();
        let y = Vector::new(vec![1.0, 2.0, -1.0]).unwrap();
        let prob = LassoProblem::new(x, y).unwrap();
        let lmax = prob.lambda_max();
        let rep = kkt_residual(&prob, lmax, &[0.0, 0.0]).unwrap();
        assert_eq!(rep.residual, 0.0);
        assert!(rep.inactive_ok && rep.active_ok);
        let rep = kkt_residual(&prob, 0.5 * lmax, &[0.0, 0.0]).unwrap();
        assert!(!rep.inactive_ok);
    }

    #[test]
    fn kkt_least_squares_at_zero_lambda() {
        let x = RealMatrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [1.0, 1.0]]).unwrap();
        let y = Vector::new(vec![1.0, 2.0, -1.0, 0.3]).unwrap();
        let prob = LassoProblem::new(x.clone(), y.clone()).unwrap();
        let ols = crate::linalg::solve_spd(&x.gram(), &x.t_mul_vec(&y).unwrap()).unwrap();
        let rep = kkt_residual(&prob, 0.0, &ols).unwrap();
        assert!(rep.residual <= 1e-8);
        assert!(rep.holds(1e-8));
    }

    #[test]
    fn problem_rejects_bad_inputs() {
        let x = RealMatrix::zeros(3, 2);
        assert!(LassoProblem::new(x.clone(), Vector::zeros(2)).is_err());
        assert!(LassoProblem::with_scale(x, Vector::zeros(3), 0.0).is_err());
    }
}
