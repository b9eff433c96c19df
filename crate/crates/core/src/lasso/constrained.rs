use crate::{Error, Result, Scalar, Vector};

use super::path::interpolate;
use super::{lars_path, LassoProblem};

/// Minimizer of `‖y − Xβ‖²` over `‖β‖₁ ≤ radius`, with the penalized `λ` it
/// coincides with (`0` when the constraint is inactive).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSolution<T> {
    pub beta: Vector<T>,
    pub lambda: T,
}

/// ℓ1-constrained least squares.
pub fn solve_constrained<T: Scalar>(prob: &LassoProblem<T>, radius: T) -> Result<Vector<T>> {
    Ok(constrained_point(prob, radius)?.beta)
}

/// Walks the lasso path, on which `‖β‖₁` grows linearly between knots, and
/// stops where it first reaches `radius`.
pub fn constrained_point<T: Scalar>(prob: &LassoProblem<T>, radius: T) -> Result<ConstrainedSolution<T>> {
    if !(radius > T::zero()) {
        return Err(Error::invalid("radius", "must be positive"));
    }
    let path = lars_path(prob)?;
    let knots = path.knots();
    let norms: Vec<T> = knots.iter().map(|k| k.beta.norm1()).collect();
    for k in 1..knots.len() {
        if norms[k] >= radius {
            let span = norms[k] - norms[k - 1];
            let t = if span > T::zero() {
                ((radius - norms[k - 1]) / span).max(T::zero()).min(T::one())
            } else {
                T::one()
            };
            let beta = interpolate(&knots[k - 1].beta, &knots[k].beta, t);
            let lambda = knots[k - 1].lambda + t * (knots[k].lambda - knots[k - 1].lambda);
            return Ok(ConstrainedSolution { beta, lambda });
        }
    }
    let last = knots.last().expect("path has knots");
    Ok(ConstrainedSolution {
        beta: last.beta.clone(),
        lambda: last.lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::{kkt_residual, solve_penalized};
    use crate::linalg::solve_spd;
    use crate::rng::SeededStream;
    use crate::RealMatrix;

    fn random_problem(rows: usize, cols: usize, id: u64) -> LassoProblem<f64> {
        let mut g = SeededStream::new(33, id).gaussian();
        let x = RealMatrix::from_fn(rows, cols, |_, _| g.standard_normal()).unwrap();
        let y: Vec<f64> = (0..rows)
            .map(|i| x[(i, 0)] - 1.5 * x[(i, 2)] + 0.8 * x[(i, 3)] + 0.4 * g.standard_normal())
            .collect();
        LassoProblem::new(x, Vector::new(y).unwrap()).unwrap()
    }

    fn ols(prob: &LassoProblem<f64>) -> Vector<f64> {
        let x = prob.design();
        solve_spd(&x.gram(), &x.t_mul_vec(prob.response()).unwrap()).unwrap()
    }

    #[test]
    fn inactive_constraint_returns_least_squares() {
        let prob = random_problem(30, 5, 1);
        let b_ols = ols(&prob);
        let b = solve_constrained(&prob, b_ols.norm1() * 1.5).unwrap();
        assert!(b.sub(&b_ols).unwrap().norm_inf() < 1e-9);
    }

    #[test]
    fn tiny_radius_gives_near_zero() {
        let prob = random_problem(30, 5, 2);
        let b = solve_constrained(&prob, 1e-9).unwrap();
        assert!(b.norm1() <= 1e-9 + 1e-15);
        assert!(solve_constrained(&prob, 0.0).is_err());
    }

    #[test]
    fn half_radius_matches_penalized_bisection() {
        let prob = random_problem(40, 8, 3);
        let radius = 0.5 * ols(&prob).norm1();
        let sol = constrained_point(&prob, radius).unwrap();
        assert!(sol.beta.norm1() <= radius + 1e-9);

        // independent oracle: bisect λ on coordinate-descent solutions until
        // ‖β(λ)‖₁ = radius
        let (mut lo, mut hi) = (0.0, prob.lambda_max());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if solve_penalized(&prob, mid).unwrap().norm1() > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = solve_penalized(&prob, hi).unwrap();
        let rss = |b: &[f64]| prob.residual(b).unwrap().norm2_sq();
        assert!((rss(&sol.beta) - rss(&oracle)).abs() <= 1e-8);
        assert!((sol.lambda - hi).abs() <= 1e-6);
        assert!(sol.beta.sub(&oracle).unwrap().norm_inf() <= 1e-6);
        assert!(kkt_residual(&prob, sol.lambda, &sol.beta).unwrap().holds(1e-8));

        // and no feasible grid point does better
        let lmax = prob.lambda_max();
        for k in 0..200 {
            let b = solve_penalized(&prob, lmax * k as f64 / 200.0).unwrap();
            if b.norm1() <= radius {
                assert!(rss(&sol.beta) <= rss(&b) + 1e-8);
            }
        }
    }
}
