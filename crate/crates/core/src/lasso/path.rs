use crate::linalg::{solve_upper, solve_upper_transposed};
use crate::{Error, Matrix, Result, Scalar, Vector};

use super::LassoProblem;

/// One breakpoint of the regularization path.
#[derive(Debug, Clone, PartialEq)]
pub struct Knot<T> {
    pub lambda: T,
    pub beta: Vector<T>,
    /// Active variables in order of entry.
    pub active: Vec<usize>,
}

/// Piecewise-linear lasso path, `λ` strictly decreasing from `λ_max` to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath<T> {
    knots: Vec<Knot<T>>,
}

impl<T: Scalar> LassoPath<T> {
    pub fn knots(&self) -> &[Knot<T>] {
        &self.knots
    }

    pub fn lambda_max(&self) -> T {
        self.knots[0].lambda
    }

    /// Solution at an arbitrary `λ` by linear interpolation between knots.
    pub fn beta_at(&self, lambda: T) -> Vector<T> {
        let first = &self.knots[0];
        if lambda >= first.lambda {
            return Vector::zeros(first.beta.len());
        }
        for w in self.knots.windows(2) {
            let (hi, lo) = (&w[0], &w[1]);
            if lambda >= lo.lambda {
                let t = (hi.lambda - lambda) / (hi.lambda - lo.lambda);
                return interpolate(&hi.beta, &lo.beta, t);
            }
        }
        self.knots.last().expect("path has knots").beta.clone()
    }
}

pub(crate) fn interpolate<T: Scalar>(a: &[T], b: &[T], t: T) -> Vector<T> {
    Vector::from_raw(
        a.iter()
            .zip(b)
            .map(|(x, y)| *x + t * (*y - *x))
            .collect(),
    )
}

/// Cholesky factor of the active Gram block, grown one column at a time.
struct ActiveCholesky<T> {
    // row-major upper-triangular factor, dimension k × k
    factor: Vec<Vec<T>>,
}

impl<T: Scalar> ActiveCholesky<T> {
    fn new() -> Self {
        ActiveCholesky { factor: Vec::new() }
    }

    fn len(&self) -> usize {
        self.factor.len()
    }

    /// Appends variable `j`. Returns `false` when the new pivot collapses.
    fn push(&mut self, gram: &Matrix<T>, active: &[usize], j: usize) -> bool {
        let k = self.len();
        let mut r = vec![T::zero(); k];
        for i in 0..k {
            let mut s = gram[(active[i], j)];
            for l in 0..i {
                s -= self.factor[l][i] * r[l];
            }
            r[i] = s / self.factor[i][i];
        }
        let d = gram[(j, j)] - r.iter().map(|v| *v * *v).sum::<T>();
        if !(d > T::of(1e-10) * gram[(j, j)]) || gram[(j, j)] <= T::zero() {
            return false;
        }
        for (row, ri) in self.factor.iter_mut().zip(&r) {
            row.push(*ri);
        }
        let mut last = vec![T::zero(); k + 1];
        last[k] = d.sqrt();
        self.factor.push(last);
        true
    }

    fn rebuild(&mut self, gram: &Matrix<T>, active: &[usize]) -> bool {
        self.factor.clear();
        for (k, &j) in active.iter().enumerate() {
            if !self.push(gram, &active[..k], j) {
                return false;
            }
        }
        true
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        let k = self.len();
        let u = Matrix::from_raw(k, k, self.factor.iter().flatten().copied().collect());
        solve_upper(&u, &solve_upper_transposed(&u, b))
    }
}

enum Event {
    End,
    Join,
    Drop(usize),
}

fn collinear_partner<T: Scalar>(gram: &Matrix<T>, active: &[usize], j: usize) -> usize {
    active
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let ca = gram[(a, j)].abs() / (gram[(a, a)] * gram[(j, j)]).sqrt();
            let cb = gram[(b, j)].abs() / (gram[(b, b)] * gram[(j, j)]).sqrt();
            ca.partial_cmp(&cb).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
        })
        .unwrap_or(j)
}

/// Computes the lasso regularization path with the LARS lasso modification.
///
/// Variables enter when their correlation with the residual reaches `λ` and
/// leave when their coefficient crosses zero. Simultaneous entries are
/// admitted in increasing column order. At most `min(rows, cols)` variables
/// are active; the path ends at `λ = 0`.
pub fn lars_path<T: Scalar>(prob: &LassoProblem<T>) -> Result<LassoPath<T>> {
    let p = prob.cols();
    if p == 0 {
        return Err(Error::invalid("design", "needs at least one column"));
    }
    let (gram, xty) = prob.normal_equations();
    let max_active = prob.rows().min(p);

    let mut beta = vec![T::zero(); p];
    let mut corr = xty.clone();
    let lambda_max = corr.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut lambda = lambda_max;
    let mut knots = vec![Knot {
        lambda,
        beta: Vector::zeros(p),
        active: Vec::new(),
    }];
    if lambda_max == T::zero() {
        return Ok(LassoPath { knots });
    }

    let tie_tol = T::of(1e-9) * lambda_max;
    let step_tol = T::of(1e-13) * lambda_max;
    let tiny = T::of(1e-12);

    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<T> = Vec::new();
    let mut is_active = vec![false; p];
    let mut chol = ActiveCholesky::new();
    let mut blocked: Option<usize> = None;
    let max_iter = 50 * p.max(prob.rows()) + 1000;

    for _ in 0..max_iter {
        for j in 0..p {
            if active.len() >= max_active {
                break;
            }
            if is_active[j] || blocked == Some(j) || corr[j].abs() < lambda - tie_tol {
                continue;
            }
            if !chol.push(&gram, &active, j) {
                return Err(Error::Collinear {
                    first: collinear_partner(&gram, &active, j),
                    second: j,
                });
            }
            active.push(j);
            signs.push(corr[j].signum());
            is_active[j] = true;
        }
        blocked = None;

        let dir = chol.solve(&signs);
        let mut a = vec![T::zero(); p];
        for (k, &i) in active.iter().enumerate() {
            for (j, aj) in a.iter_mut().enumerate() {
                *aj += gram[(j, i)] * dir[k];
            }
        }

        let mut step = lambda;
        let mut event = Event::End;
        if active.len() < max_active {
            for j in (0..p).filter(|&j| !is_active[j]) {
                for (num, den) in [(lambda - corr[j], T::one() - a[j]), (lambda + corr[j], T::one() + a[j])] {
                    if den > tiny {
                        let g = num / den;
                        if g > step_tol && g < step {
                            step = g;
                            event = Event::Join;
                        }
                    }
                }
            }
        }
        for (k, &i) in active.iter().enumerate() {
            if dir[k] != T::zero() {
                let g = -beta[i] / dir[k];
                if g > step_tol && g < step {
                    step = g;
                    event = Event::Drop(k);
                }
            }
        }

        lambda = match event {
            Event::End => T::zero(),
            _ => lambda - step,
        };
        if let Event::Drop(k) = event {
            let i = active.remove(k);
            signs.remove(k);
            is_active[i] = false;
            beta[i] = T::zero();
            blocked = Some(i);
            if !chol.rebuild(&gram, &active) {
                // a subset of an admitted set cannot lose rank
                unreachable!("active Gram block became singular after a drop");
            }
        }

        // equicorrelation solution for the current active set and signs
        let rhs: Vec<T> = active
            .iter()
            .zip(&signs)
            .map(|(&i, s)| xty[i] - lambda * *s)
            .collect();
        let sol = if active.is_empty() { Vec::new() } else { chol.solve(&rhs) };
        for (k, &i) in active.iter().enumerate() {
            beta[i] = sol[k];
        }
        for j in 0..p {
            let mut c = xty[j];
            for &i in &active {
                c -= gram[(j, i)] * beta[i];
            }
            corr[j] = c;
        }

        knots.push(Knot {
            lambda,
            beta: Vector::from_raw(beta.clone()),
            active: active.clone(),
        });
        if matches!(event, Event::End) {
            return Ok(LassoPath { knots });
        }
    }
    Err(Error::invalid("design", format!("path did not terminate within {max_iter} steps")))
}
