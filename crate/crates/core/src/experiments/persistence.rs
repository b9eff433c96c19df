use rayon::prelude::*;

use crate::compress::{compress_response, make_projection, CompressionOp};
use crate::lasso::{solve_constrained, LassoProblem};
use crate::linalg::mat_mul;
use crate::rng::SeededStream;
use crate::{Error, Matrix, RealMatrix, RealVector, Result, Scalar};

use super::design::{gen_design, Ensemble};

/// `L_n = n^{1/4}/√(log₂ n)` and `L_{n,m} = m^{1/4}/√(log₂(np))`.
pub fn l1_radii(n: usize, p: usize, m: usize) -> Result<(f64, f64)> {
    if n < 2 || m < 2 || p < 1 {
        return Err(Error::invalid("n, m, p", "need n, m ≥ 2 and p ≥ 1"));
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok((
        nf.powf(0.25) / nf.log2().sqrt(),
        mf.powf(0.25) / (nf * p as f64).log2().sqrt(),
    ))
}

/// `‖A(β − β*)‖² + σ²`, the predictive risk under `Σ = AᵀA`.
pub fn predictive_risk<T: Scalar>(beta: &[T], beta_star: &[T], sigma_chol: &Matrix<T>, sigma2: T) -> Result<T> {
    if beta.len() != beta_star.len() {
        return Err(Error::dims("predictive_risk", beta_star.len(), beta.len()));
    }
    let diff: Vec<T> = beta.iter().zip(beta_star).map(|(a, b)| *a - *b).collect();
    Ok(sigma_chol.mul_vec(&diff)?.norm2_sq() + sigma2)
}

/// `(1/m)‖ΦQγ‖²` with `Q = [Y, X]` and `γ = (−1, β)`.
pub fn empirical_risk<T: Scalar>(beta: &[T], q: &Matrix<T>, phi: &Matrix<T>) -> Result<T> {
    if q.cols() != beta.len() + 1 {
        return Err(Error::dims("empirical_risk", format!("q.cols = {}", beta.len() + 1), format!("q.cols = {}", q.cols())));
    }
    let mut gamma = Vec::with_capacity(q.cols());
    gamma.push(-T::one());
    gamma.extend_from_slice(beta);
    let qg = q.mul_vec(&gamma)?;
    Ok(phi.mul_vec(&qg)?.norm2_sq() / T::of_usize(phi.rows()))
}

/// [`empirical_risk`] for a sampled masking operator.
pub fn empirical_risk_op(beta: &[f64], q: &RealMatrix, op: &CompressionOp) -> Result<f64> {
    empirical_risk(beta, q, op.phi())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceConfig {
    pub n: usize,
    pub p: usize,
    pub beta_star: RealVector,
    pub sigma2: f64,
    pub ensemble: Ensemble,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
}

impl PersistenceConfig {
    /// Smallest admissible `m`, `⌈ln²(np)⌉`.
    pub fn min_m(n: usize, p: usize) -> usize {
        let l = (n as f64 * p as f64).ln();
        (l * l).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta_star.len() != self.p {
            return Err(Error::invalid("beta_star", format!("needs length p = {}, got {}", self.p, self.beta_star.len())));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid("sigma2", "must be positive"));
        }
        if self.m_grid.is_empty() {
            return Err(Error::invalid("m_grid", "empty"));
        }
        let lo = Self::min_m(self.n, self.p);
        if let Some(m) = self.m_grid.iter().find(|m| **m < lo || **m > self.n) {
            return Err(Error::invalid("m_grid", format!("{m} lies outside [{lo}, {}]", self.n)));
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("m_grid", "must be strictly increasing"));
        }
        self.ensemble.covariance_factor(2)?;
        Ok(())
    }

    fn root(&self) -> SeededStream {
        SeededStream::new(self.base_seed, 0x9E25)
    }
}

/// Predictive risks of the population-optimal vectors in the `L_n` ball
/// and in each `L_{n,m}` ball.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRisks {
    pub uncompressed: f64,
    pub compressed: Vec<f64>,
}

/// Risk of the best `β` with `‖β‖₁ ≤ radius` when `Σ = AᵀA`.
pub fn oracle_risk(a: &RealMatrix, beta_star: &RealVector, sigma2: f64, radius: f64) -> Result<f64> {
    let prob = LassoProblem::new(a.clone(), a.mul_vec(beta_star)?)?;
    let beta = solve_constrained(&prob, radius)?;
    predictive_risk(&beta, beta_star, a, sigma2)
}

pub fn oracle_risks(cfg: &PersistenceConfig) -> Result<OracleRisks> {
    let a = cfg.ensemble.covariance_factor(cfg.p)?;
    let (l_n, _) = l1_radii(cfg.n, cfg.p, cfg.n)?;
    let uncompressed = oracle_risk(&a, &cfg.beta_star, cfg.sigma2, l_n)?;
    let compressed = cfg
        .m_grid
        .iter()
        .map(|&m| oracle_risk(&a, &cfg.beta_star, cfg.sigma2, l1_radii(cfg.n, cfg.p, m)?.1))
        .collect::<Result<_>>()?;
    Ok(OracleRisks { uncompressed, compressed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub m: usize,
    pub l_nm: f64,
    pub mean_emp_risk: f64,
    pub std_emp_risk: f64,
    pub oracle_compressed: f64,
    /// trials that produced a risk
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub rows: Vec<RiskRow>,
    pub l_n: f64,
    pub oracle_uncompressed: f64,
    pub diagnostics: Vec<(usize, String)>,
}

/// Empirical risk of the `L_{n,m}`-constrained fit on one draw of
/// `(X, ε, Φ)`.
pub fn run_persistence_trial(cfg: &PersistenceConfig, m: usize, trial: usize) -> Result<f64> {
    let stream = cfg.root().derive(&[m as u64, trial as u64]);
    let x = gen_design(cfg.ensemble, cfg.n, cfg.p, stream.derive(&[0]))?;
    let mut g = stream.derive(&[1]).gaussian();
    let sd = cfg.sigma2.sqrt();
    let mut y = x.mul_vec(&cfg.beta_star)?.into_inner();
    for v in y.iter_mut() {
        *v += g.normal(sd);
    }
    let op = make_projection(m, cfg.n, stream.derive(&[2]))?;
    let z = mat_mul(op.phi(), &x)?;
    let w = compress_response(&op, &y)?;
    let prob = LassoProblem::new(z, w)?;
    let (_, l_nm) = l1_radii(cfg.n, cfg.p, m)?;
    let beta = solve_constrained(&prob, l_nm)?;
    // (1/m)‖ΦQγ‖² = (1/m)‖ΦY − ΦXβ‖², read off the compressed problem
    Ok(prob.residual(&beta)?.norm2_sq() / m as f64)
}

/// Mean and sample standard deviation of the empirical risk per `m`, with
/// the oracle risks attached.
pub fn run_persistence_curve(cfg: &PersistenceConfig) -> Result<RiskCurve> {
    cfg.validate()?;
    let oracles = oracle_risks(cfg)?;
    let tasks: Vec<(usize, usize)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let risks: Vec<Result<f64>> = tasks
        .into_par_iter()
        .map(|(m, t)| run_persistence_trial(cfg, m, t))
        .collect();
    let (l_n, _) = l1_radii(cfg.n, cfg.p, cfg.n)?;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, (&m, chunk)) in cfg.m_grid.iter().zip(risks.chunks(cfg.trials)).enumerate() {
        let mut vals = Vec::with_capacity(chunk.len());
        for r in chunk {
            match r {
                Ok(v) => vals.push(*v),
                Err(e) => diagnostics.push((i, e.to_string())),
            }
        }
        let k = vals.len() as f64;
        let mean = if vals.is_empty() { f64::NAN } else { vals.iter().sum::<f64>() / k };
        let std = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        rows.push(RiskRow {
            m,
            l_nm: l1_radii(cfg.n, cfg.p, m)?.1,
            mean_emp_risk: mean,
            std_emp_risk: std,
            oracle_compressed: oracles.compressed[i],
            completed: vals.len(),
        });
    }
    Ok(RiskCurve {
        rows,
        l_n,
        oracle_uncompressed: oracles.uncompressed,
        diagnostics,
    })
}
