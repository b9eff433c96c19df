use crate::linalg::{cholesky_factor, toeplitz};
use crate::rng::SeededStream;
use crate::{Error, RealMatrix, RealVector, Result};

/// How the number of relevant variables grows with `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsityRegime {
    /// `s = ⌊αp / log₂(αp)⌋`
    Sublinear { alpha: f64 },
    /// `s = round(α p^γ)`, halves rounded up
    Fractional { alpha: f64, gamma: f64 },
}

pub fn sparsity_level(regime: SparsityRegime, p: usize) -> Result<usize> {
    let pf = p as f64;
    let raw = match regime {
        SparsityRegime::Sublinear { alpha } => {
            let ap = alpha * pf;
            if !(ap > 1.0) {
                return Err(Error::invalid("alpha", format!("αp must exceed 1, got {ap}")));
            }
            (ap / ap.log2()).floor()
        }
        SparsityRegime::Fractional { alpha, gamma } => (alpha * pf.powf(gamma) + 0.5).floor(),
    };
    if !(raw >= 2.0 && raw < pf) {
        return Err(Error::invalid("regime", format!("gives s = {raw}, need 2 ≤ s < p = {p}")));
    }
    Ok(raw as usize)
}

/// `2θσ²s·log₂(p − s) + s + 1` before rounding.
pub fn sample_count_real(theta: f64, s: usize, p: usize, sigma2: f64) -> Result<f64> {
    if p <= s {
        return Err(Error::invalid("p", format!("need p > s, got p={p}, s={s}")));
    }
    if !(theta >= 0.0 && sigma2 > 0.0) {
        return Err(Error::invalid("theta, sigma2", "need θ ≥ 0 and σ² > 0"));
    }
    let s_f = s as f64;
    Ok(2.0 * theta * sigma2 * s_f * ((p - s) as f64).log2() + s_f + 1.0)
}

/// Number of (compressed) samples at control parameter `θ`.
pub fn sample_count(theta: f64, s: usize, p: usize, sigma2: f64) -> Result<usize> {
    let s_f = s as f64;
    let body = sample_count_real(theta, s, p, sigma2)? - s_f - 1.0;
    Ok(body.round() as usize + s + 1)
}

/// Row distribution of a random design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble {
    Identity,
    /// `Σ_ij = ρ^|i−j|`
    Toeplitz { rho: f64 },
}

impl Ensemble {
    /// Upper-triangular `A` with `AᵀA = Σ`.
    pub fn covariance_factor(&self, p: usize) -> Result<RealMatrix> {
        match *self {
            Ensemble::Identity => Ok(RealMatrix::identity(p)),
            Ensemble::Toeplitz { rho } => {
                if !(rho.abs() < 1.0) {
                    return Err(Error::invalid("rho", format!("T(ρ) needs |ρ| < 1, got {rho}")));
                }
                cholesky_factor(&toeplitz(p, rho))
            }
        }
    }
}

/// `n` i.i.d. rows from `N(0, Σ)`.
pub fn gen_design(ensemble: Ensemble, n: usize, p: usize, stream: SeededStream) -> Result<RealMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::invalid("n, p", "must be positive"));
    }
    let mut g = stream.gaussian();
    let mut data = vec![0.0; n * p];
    g.fill_normal(&mut data, 1.0);
    if let Ensemble::Toeplitz { .. } = ensemble {
        let a = ensemble.covariance_factor(p)?;
        let mut row = vec![0.0; p];
        for chunk in data.chunks_mut(p) {
            // x = g A, A upper triangular
            for j in 0..p {
                row[j] = (0..=j).map(|k| chunk[k] * a[(k, j)]).sum();
            }
            chunk.copy_from_slice(&row);
        }
    }
    RealMatrix::from_vec(n, p, data)
}

const BETA_STAR: [f64; 15] = [
    -0.9, -1.7, 1.1, 1.3, 0.9, 2.0, -1.7, -1.3, -0.9, -1.5, 1.3, -0.9, 1.3, 1.1, 0.9,
];

/// The first `s` entries of the fixed coefficient list, zero-padded to `p`;
/// `s = 2` uses `(0.9, −1.7)`.
pub fn gen_beta(s: usize, p: usize) -> Result<RealVector> {
    if !(2..=BETA_STAR.len()).contains(&s) {
        return Err(Error::invalid("s", format!("need 2 ≤ s ≤ 15, got {s}")));
    }
    if p < s {
        return Err(Error::invalid("p", format!("need p ≥ s, got p={p}")));
    }
    let mut beta = vec![0.0; p];
    if s == 2 {
        beta[0] = 0.9;
        beta[1] = -1.7;
    } else {
        beta[..s].copy_from_slice(&BETA_STAR[..s]);
    }
    RealVector::new(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_decimals(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn sparsity_examples() {
        assert_eq!(sparsity_level(SparsityRegime::Sublinear { alpha: 0.1 }, 128).unwrap(), 3);
        assert_eq!(sparsity_level(SparsityRegime::Fractional { alpha: 0.2, gamma: 0.5 }, 512).unwrap(), 5);
        assert_eq!(sparsity_level(SparsityRegime::Sublinear { alpha: 0.4 }, 256).unwrap(), 15);
        assert!(sparsity_level(SparsityRegime::Fractional { alpha: 0.01, gamma: 0.5 }, 128).is_err());
    }

    #[test]
    fn sample_count_examples() {
        assert_eq!(two_decimals(sample_count(1.0, 2, 128, 1.0).unwrap() as f64 / 128.0), 0.24);
        assert_eq!(two_decimals(sample_count(1.0, 5, 512, 1.0).unwrap() as f64 / 512.0), 0.19);
        assert_eq!(two_decimals(sample_count(1.0, 3, 128, 1.0).unwrap() as f64 / 128.0), 0.36);
        assert_eq!(sample_count(0.0, 4, 128, 1.0).unwrap(), 5);
        assert!(sample_count(1.0, 8, 8, 1.0).is_err());
    }

    #[test]
    fn beta_prefixes() {
        let b = gen_beta(2, 5).unwrap();
        assert_eq!(b.as_slice(), &[0.9, -1.7, 0.0, 0.0, 0.0]);
        let b = gen_beta(3, 4).unwrap();
        assert_eq!(b.as_slice(), &[-0.9, -1.7, 1.1, 0.0]);
        assert!((b.norm1() - 3.7).abs() < 1e-12);
        assert_eq!(gen_beta(15, 15).unwrap().as_slice(), &BETA_STAR);
        assert!(gen_beta(1, 4).is_err());
        assert!(gen_beta(16, 20).is_err());
    }

    fn sample_cov(x: &RealMatrix) -> RealMatrix {
        x.gram().scaled(1.0 / x.rows() as f64)
    }

    #[test]
    fn identity_design_covariance() {
        let x = gen_design(Ensemble::Identity, 10_000, 4, SeededStream::new(8, 1)).unwrap();
        let c = sample_cov(&x);
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((c[(i, j)] - target).abs() < 0.05, "{i},{j}: {}", c[(i, j)]);
            }
        }
    }

    #[test]
    fn toeplitz_design_covariance() {
        let x = gen_design(Ensemble::Toeplitz { rho: 0.1 }, 10_000, 4, SeededStream::new(8, 2)).unwrap();
        let c = sample_cov(&x);
        assert!((c[(0, 1)] - 0.1).abs() < 0.02);
        assert!((c[(0, 2)] - 0.01).abs() < 0.03);
        assert!(gen_design(Ensemble::Toeplitz { rho: 1.0 }, 10, 4, SeededStream::new(8, 2)).is_err());
    }

    #[test]
    fn zero_rho_matches_identity() {
        let a = gen_design(Ensemble::Identity, 20, 3, SeededStream::new(8, 3)).unwrap();
        let b = gen_design(Ensemble::Toeplitz { rho: 0.0 }, 20, 3, SeededStream::new(8, 3)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }
}
