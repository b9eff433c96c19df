//! S-incoherence diagnostics, theoretical sample-size bounds and
//! regularization schedules.

use crate::linalg::{cholesky_factor, inf_norm, min_eigen_sym, solve_upper, solve_upper_transposed};
use crate::{Error, Matrix, Result, Scalar};

/// `4e/√(6π) ≈ 2.5044`, the quadratic-term constant of the inner-product
/// tail bound.
pub const C1: f64 = 2.504_401_248_924_918_6;
/// `√8·e ≈ 7.6885`, the linear-term constant of the inner-product tail
/// bound.
pub const C2: f64 = 7.688_462_056_318_234;

/// Relevant variables `S` and the smallest relevant magnitude `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSpec {
    indices: Vec<usize>,
    rho: f64,
}

impl SupportSpec {
    pub fn new(indices: Vec<usize>, rho: f64) -> Result<Self> {
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("indices", "support indices must be distinct"));
        }
        if !(rho > 0.0) {
            return Err(Error::invalid("rho", "minimum signal must be positive"));
        }
        Ok(SupportSpec { indices, rho })
    }

    /// Support and `ρ` of a coefficient vector.
    pub fn from_beta<T: Scalar>(beta: &[T]) -> Result<Self> {
        let indices: Vec<usize> = (0..beta.len()).filter(|&i| beta[i] != T::zero()).collect();
        if indices.is_empty() {
            return Err(Error::invalid("beta", "empty support"));
        }
        let rho = indices.iter().map(|&i| beta[i].abs().as_f64()).fold(f64::INFINITY, f64::min);
        SupportSpec::new(indices, rho)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices of `0..p` outside the support, ascending.
    pub fn complement(&self, p: usize) -> Vec<usize> {
        let mut mask = vec![false; p];
        for &i in &self.indices {
            mask[i] = true;
        }
        (0..p).filter(|&j| !mask[j]).collect()
    }

    fn check_range(&self, p: usize) -> Result<()> {
        if let Some(&bad) = self.indices.iter().find(|&&i| i >= p) {
            return Err(Error::invalid("indices", format!("index {bad} outside 0..{p}")));
        }
        Ok(())
    }
}

/// Gram-block quantities behind the S-incoherence condition.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherenceReport<T> {
    /// `1 − cross_term − gram_dev`; positive iff the design is S-incoherent.
    pub eta: T,
    /// `‖(1/d) X_{Sᶜ}ᵀ X_S‖∞`
    pub cross_term: T,
    /// `‖(1/d) X_Sᵀ X_S − I‖∞`
    pub gram_dev: T,
    /// `‖X_{Sᶜ}ᵀ X_S (X_Sᵀ X_S)⁻¹‖∞`, `+∞` when the support block is singular.
    pub irrep: T,
    /// `Λ_min((1/d) X_Sᵀ X_S)`
    pub min_eig: T,
    pub gram_singular: bool,
}

/// Computes the incoherence quantities of `x` for support `s` using
/// divisor `d` (`n` for raw designs, `m` for projected ones).
pub fn incoherence_report<T: Scalar>(
    x: &Matrix<T>,
    s: &SupportSpec,
    norm_divisor: T,
) -> Result<IncoherenceReport<T>> {
    let p = x.cols();
    s.check_range(p)?;
    let sc = s.complement(p);
    if s.is_empty() || sc.is_empty() {
        return Err(Error::invalid("support", "S and its complement must both be nonempty"));
    }
    if !(norm_divisor > T::zero()) {
        return Err(Error::invalid("norm_divisor", "must be positive"));
    }
    let inv = T::one() / norm_divisor;
    let gram = x.gram().scaled(inv);
    let g_ss = gram.select(s.indices(), s.indices());
    let g_cs = gram.select(&sc, s.indices());

    let cross_term = inf_norm(&g_cs);
    let mut dev = g_ss.clone();
    for i in 0..s.len() {
        dev[(i, i)] -= T::one();
    }
    let gram_dev = inf_norm(&dev);
    let min_eig = min_eigen_sym(&g_ss)?;

    // X_{Sᶜ}ᵀX_S (X_SᵀX_S)⁻¹ = G_cs G_ss⁻¹; the divisor cancels.
    let (irrep, gram_singular) = match cholesky_factor(&g_ss) {
        Ok(u) if (0..s.len()).all(|i| u[(i, i)] * u[(i, i)] >= T::of(1e-12)) => {
            let mut out = Matrix::zeros(sc.len(), s.len());
            for r in 0..sc.len() {
                let row = g_cs.row(r);
                // row · G_ss⁻¹ = (G_ss⁻¹ rowᵀ)ᵀ by symmetry
                let sol = solve_upper(&u, &solve_upper_transposed(&u, row));
                for (c, v) in sol.into_iter().enumerate() {
                    out[(r, c)] = v;
                }
            }
            (inf_norm(&out), false)
        }
        _ => (T::infinity(), true),
    };

    Ok(IncoherenceReport {
        eta: T::one() - cross_term - gram_dev,
        cross_term,
        gram_dev,
        irrep,
        min_eig,
        gram_singular,
    })
}

/// Rescales every column so that its squared ℓ2 norm equals the row count.
pub fn column_normalize<T: Scalar>(x: &Matrix<T>) -> Result<Matrix<T>> {
    let n = T::of_usize(x.rows());
    let mut factors = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let sq: T = x.column(j).iter().map(|v| *v * *v).sum();
        if sq == T::zero() {
            return Err(Error::ZeroColumn { index: j });
        }
        factors.push((n / sq).sqrt());
    }
    Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] * factors[j])
}

/// Lower bound on the compressed sample count `m` under which random
/// projection preserves S-incoherence:
/// `(16 C₁ s²/η² + 4 C₂ s/η)(ln p + c ln n + ln 2(s+1))`.
pub fn sample_size_bound(s: usize, p: usize, n: usize, eta: f64, c: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid("eta", format!("must lie in (0, 1], got {eta}")));
    }
    if s < 1 || p <= s {
        return Err(Error::invalid("s, p", format!("need 1 ≤ s < p, got s={s}, p={p}")));
    }
    if n < 1 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let s = s as f64;
    let coef = 16.0 * C1 * s * s / (eta * eta) + 4.0 * C2 * s / eta;
    let logs = (p as f64).ln() + c * (n as f64).ln() + (2.0 * (s + 1.0)).ln();
    Ok(coef * logs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LogBase {
    Natural,
    #[default]
    Base2,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
        }
    }
}

/// `c · √(log(p − s) · log(s) / m)`.
pub fn lambda_schedule(p: usize, s: usize, m: usize, c: f64, base: LogBase) -> Result<f64> {
    if s < 2 {
        return Err(Error::invalid(
            "s",
            "log s vanishes for s < 2; use s ≥ 2 or pass an explicit λ",
        ));
    }
    if p <= s {
        return Err(Error::invalid("p", format!("need p > s, got p={p}, s={s}")));
    }
    if m < 1 || !(c > 0.0) {
        return Err(Error::invalid("m, c", "need m ≥ 1 and c > 0"));
    }
    Ok(c * (base.log((p - s) as f64) * base.log(s as f64) / m as f64).sqrt())
}

/// Smallest `|β_i|` over the support.
pub fn min_signal<T: Scalar>(beta: &[T], s: &SupportSpec) -> Result<T> {
    if s.is_empty() {
        return Err(Error::invalid("support", "empty support"));
    }
    s.check_range(beta.len())?;
    Ok(s.indices()
        .iter()
        .map(|&i| beta[i].abs())
        .fold(T::infinity(), T::min))
}

/// `‖M⁻¹‖∞` for the symmetric positive definite block `M = (1/d) X_SᵀX_S`.
pub fn support_gram_inverse_norm<T: Scalar>(x: &Matrix<T>, s: &SupportSpec, norm_divisor: T) -> Result<T> {
    s.check_range(x.cols())?;
    let g = x.select_columns(s.indices()).gram().scaled(T::one() / norm_divisor);
    Ok(inf_norm(&crate::linalg::inverse_spd(&g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cholesky_factor, mat_mul, toeplitz};
    use crate::rng::SeededStream;
    use crate::RealMatrix;
    use proptest::prelude::*;

    fn hadamard_columns(n: usize, p: usize) -> RealMatrix {
        RealMatrix::from_fn(n, p, |i, j| if (i & (j + 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 }).unwrap()
    }

    fn gaussian_design(n: usize, sigma: &RealMatrix, id: u64) -> RealMatrix {
        let p = sigma.rows();
        let u = cholesky_factor(sigma).unwrap();
        let mut g = SeededStream::new(404, id).gaussian();
        let raw = RealMatrix::from_fn(n, p, |_, _| g.standard_normal()).unwrap();
        mat_mul(&raw, &u).unwrap()
    }

    #[test]
    fn constants_match_closed_forms() {
        let c1 = 4.0 * std::f64::consts::E / (6.0 * std::f64::consts::PI).sqrt();
        let c2 = 8f64.sqrt() * std::f64::consts::E;
        assert!((C1 - c1).abs() < 1e-14);
        assert!((C2 - c2).abs() < 1e-14);
        assert_eq!(format!("{C1:.4}"), "2.5044");
        assert_eq!(format!("{C2:.4}"), "7.6885");
    }

    #[test]
    fn orthogonal_design_is_fully_incoherent() {
        let x = hadamard_columns(16, 6);
        let s = SupportSpec::new(vec![0, 3], 1.0).unwrap();
        let rep = incoherence_report(&x, &s, 16.0).unwrap();
        assert_eq!(rep.eta, 1.0);
        assert_eq!(rep.irrep, 0.0);
        assert!((rep.min_eig - 1.0).abs() < 1e-14);
        assert!(!rep.gram_singular);
    }

    #[test]
    fn two_column_hand_case() {
        // (1/n) XᵀX = [[1, 0.3], [0.3, 1]] via x₂ = 0.3 x₁ + √0.91 x⊥
        let n = 4;
        let h = hadamard_columns(n, 2);
        let x = RealMatrix::from_fn(n, 2, |i, j| {
            if j == 0 { h[(i, 0)] } else { 0.3 * h[(i, 0)] + 0.91f64.sqrt() * h[(i, 1)] }
        })
        .unwrap();
        let s = SupportSpec::new(vec![0], 1.0).unwrap();
        let rep = incoherence_report(&x, &s, n as f64).unwrap();
        assert!((rep.cross_term - 0.3).abs() < 1e-14);
        assert!(rep.gram_dev.abs() < 1e-14);
        assert!((rep.eta - 0.7).abs() < 1e-14);
    }

    #[test]
    fn toeplitz_ensemble_satisfies_irrepresentable_bounds() {
        let sigma = toeplitz(10, 0.1);
        let x = gaussian_design(2000, &sigma, 1);
        let s = SupportSpec::new(vec![0, 1, 2], 1.0).unwrap();
        let rep = incoherence_report(&x, &s, 2000.0).unwrap();
        assert!(rep.eta > 0.0);
        assert!(rep.irrep <= 1.0 - rep.eta);
        assert!(rep.min_eig >= rep.eta);
    }

    #[test]
    fn singular_support_block_reports_sentinel() {
        let x = RealMatrix::from_rows(&[[1.0, 1.0, 0.0], [2.0, 2.0, 1.0], [0.0, 0.0, 1.0]]).unwrap();
        let s = SupportSpec::new(vec![0, 1], 1.0).unwrap();
        let rep = incoherence_report(&x, &s, 3.0).unwrap();
        assert!(rep.gram_singular);
        assert!(rep.irrep.is_infinite());
        assert!(rep.min_eig.abs() < 1e-12);
    }

    #[test]
    fn report_rejects_degenerate_supports() {
        let x = hadamard_columns(4, 2);
        assert!(incoherence_report(&x, &SupportSpec::new(vec![0, 1], 1.0).unwrap(), 4.0).is_err());
        assert!(incoherence_report(&x, &SupportSpec::new(vec![5], 1.0).unwrap(), 4.0).is_err());
        assert!(SupportSpec::new(vec![1, 1], 1.0).is_err());
        assert!(SupportSpec::new(vec![1], 0.0).is_err());
    }

    #[test]
    fn column_normalize_cases() {
        let x = RealMatrix::from_rows(&[[1.0, 2.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(column_normalize(&x).unwrap(), x);

        let mut g = SeededStream::new(8, 8).gaussian();
        let r = RealMatrix::from_fn(7, 3, |_, _| g.standard_normal()).unwrap();
        let z = column_normalize(&r).unwrap();
        for j in 0..3 {
            let sq: f64 = z.column(j).iter().map(|v| v * v).sum();
            assert!((sq - 7.0).abs() < 1e-10);
        }
        let zero = RealMatrix::from_rows(&[[1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_eq!(column_normalize(&zero), Err(Error::ZeroColumn { index: 1 }));
    }

    #[test]
    fn sample_size_bound_two_routes() {
        let got = sample_size_bound(2, 128, 10_000, 1.0, 2.0).unwrap();
        // factor by factor: 16·2.5044·4 + 4·7.6885·2 and ln128 + 2 ln 10⁴ + ln 6
        let coef = 64.0 * 4.0 * std::f64::consts::E / (6.0 * std::f64::consts::PI).sqrt()
            + 8.0 * 8f64.sqrt() * std::f64::consts::E;
        let logs = 7.0 * std::f64::consts::LN_2 + 8.0 * std::f64::consts::LN_10 + 6f64.ln();
        assert!((got - coef * logs).abs() < 1e-9 * got);
        assert!((coef - 221.79).abs() < 0.01);

        assert!(sample_size_bound(2, 128, 100, 0.0, 2.0).is_err());
        assert!(sample_size_bound(2, 128, 100, 1.5, 2.0).is_err());
        assert!(sample_size_bound(2, 128, 100, 0.5, 2.0).unwrap() > got * 0.0);
    }

    #[test]
    fn sample_size_bound_monotone() {
        for s in 1..20 {
            let a = sample_size_bound(s, 128, 1000, 0.5, 2.0).unwrap();
            let b = sample_size_bound(s + 1, 128, 1000, 0.5, 2.0).unwrap();
            assert!(b > a);
        }
        let mut last = f64::INFINITY;
        for k in 1..=10 {
            let v = sample_size_bound(3, 64, 500, k as f64 / 10.0, 2.0).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn lambda_schedule_cases() {
        assert_eq!(lambda_schedule(4, 2, 1, 1.0, LogBase::Base2).unwrap(), 1.0);
        let a = lambda_schedule(128, 5, 100, 1.0, LogBase::Base2).unwrap();
        let b = lambda_schedule(128, 5, 200, 1.0, LogBase::Base2).unwrap();
        assert!((a / b - 2f64.sqrt()).abs() < 1e-12);
        let n = lambda_schedule(128, 5, 100, 1.0, LogBase::Natural).unwrap();
        assert!((n - (123f64.ln() * 5f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert!((n - 0.278_297).abs() < 1e-6);
        assert!(lambda_schedule(128, 1, 100, 1.0, LogBase::Base2).is_err());
    }

    #[test]
    fn min_signal_cases() {
        let star = [-0.9, -1.7, 1.1, 0.0];
        let s = SupportSpec::new(vec![0, 1, 2], 0.9).unwrap();
        assert_eq!(min_signal(&star, &s).unwrap(), 0.9);
        let eq = [2.0, -2.0, 0.0];
        assert_eq!(min_signal(&eq, &SupportSpec::from_beta(&eq).unwrap()).unwrap(), 2.0);
        let two = [0.9, -1.7, 0.0, 0.0];
        let s2 = SupportSpec::from_beta(&two).unwrap();
        assert_eq!(s2.indices(), &[0, 1]);
        assert_eq!(min_signal(&two, &s2).unwrap(), 0.9);
    }

    fn perturbed_design(seed: u64, n: usize, p: usize, amp: f64) -> RealMatrix {
        let mut g = SeededStream::new(seed, 0).gaussian();
        let h = hadamard_columns(n, p);
        RealMatrix::from_fn(n, p, |i, j| h[(i, j)] + amp * g.standard_normal()).unwrap()
    }

    proptest! {
        #[test]
        fn positive_eta_implies_irrep_and_eigen_bounds(seed in any::<u64>(), amp in 0.0f64..0.6) {
            let x = perturbed_design(seed, 32, 6, amp);
            let s = SupportSpec::new(vec![0, 2], 1.0).unwrap();
            let rep = incoherence_report(&x, &s, 32.0).unwrap();
            prop_assert!((rep.eta - (1.0 - rep.cross_term - rep.gram_dev)).abs() < 1e-15);
            if rep.eta > 0.0 {
                prop_assert!(rep.irrep <= 1.0 - rep.eta + 1e-12);
                prop_assert!(rep.min_eig >= rep.eta - 1e-12);
            }
        }

        #[test]
        fn projected_inverse_norm_chain(seed in any::<u64>(), eta in 0.2f64..1.0) {
            let mut g = SeededStream::new(seed, 1).gaussian();
            let n = 64;
            let x = hadamard_columns(n, 4);
            let m = 40;
            let phi = RealMatrix::from_fn(m, n, |_, _| g.standard_normal() / (n as f64).sqrt()).unwrap();
            let z = mat_mul(&phi, &x).unwrap();
            let s = SupportSpec::new(vec![1, 2], 1.0).unwrap();
            let rep = incoherence_report(&z, &s, m as f64).unwrap();
            if rep.gram_dev <= 1.0 - 3.0 * eta / 4.0 {
                let v = support_gram_inverse_norm(&z, &s, m as f64).unwrap();
                prop_assert!(v <= 4.0 / (3.0 * eta) + 1e-12);
            }
        }

        #[test]
        fn support_inverse_norm_bracket(seed in any::<u64>(), amp in 0.0f64..0.5) {
            let x = perturbed_design(seed, 32, 5, amp);
            let s = SupportSpec::new(vec![0, 1, 3], 1.0).unwrap();
            let rep = incoherence_report(&x, &s, 32.0).unwrap();
            if rep.gram_dev < 1.0 {
                let v = support_gram_inverse_norm(&x, &s, 32.0).unwrap();
                prop_assert!(v >= 1.0 / (1.0 + rep.gram_dev) - 1e-12);
                prop_assert!(v <= 1.0 / (1.0 - rep.gram_dev) + 1e-12);
            }
        }
    }
}
