use rayon::prelude::*;

use crate::compress::{compress_response, make_projection};
use crate::incoherence::{column_normalize, lambda_schedule, LogBase};
use crate::lasso::{lars_path, path_lambda, sign_pattern, LassoPath, LassoProblem};
use crate::linalg::mat_mul;
use crate::rng::SeededStream;
use crate::{Error, RealVector, Result};

use super::design::{gen_beta, gen_design, sample_count, sparsity_level, Ensemble, SparsityRegime};

/// Magnitudes at or below this count as zero when comparing signs.
pub const SIGN_TOL: f64 = 1e-8;

const TAG_TRIAL: u64 = 1;
const TAG_PILOT: u64 = 2;

/// One curve of a sparsistency figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compression {
    /// The plain lasso on `m` raw samples.
    Uncompressed,
    /// `n = f·m` raw samples compressed to `m`.
    Factor(usize),
}

impl Compression {
    fn key(self) -> u64 {
        match self {
            Compression::Uncompressed => 0,
            Compression::Factor(f) => f as u64,
        }
    }

    pub fn raw_samples(self, m: usize) -> usize {
        match self {
            Compression::Uncompressed => m,
            Compression::Factor(f) => f * m,
        }
    }
}

impl std::fmt::Display for Compression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Compression::Uncompressed => f.write_str("uncompressed"),
            Compression::Factor(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsistencyConfig {
    pub ensemble: Ensemble,
    pub regime: SparsityRegime,
    pub p: usize,
    pub compression: Vec<Compression>,
    pub theta_grid: Vec<f64>,
    pub trials: usize,
    pub sigma2: f64,
    /// One constant per curve, or a single constant shared by all curves.
    pub lambda_c: Vec<f64>,
    /// Rescale design columns to squared norm `n` before compressing.
    pub normalize: bool,
    pub base_seed: u64,
}

impl SparsistencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 4 {
            return Err(Error::invalid("p", format!("need p ≥ 4, got {}", self.p)));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if self.compression.is_empty() {
            return Err(Error::invalid("compression_factors", "empty"));
        }
        if self.compression.contains(&Compression::Factor(0)) {
            return Err(Error::invalid("compression_factors", "factors must be positive"));
        }
        if self.theta_grid.is_empty() || self.theta_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("theta_grid", "needs positive finite values"));
        }
        if self.theta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("theta_grid", "must be strictly increasing"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid("sigma2", "must be positive"));
        }
        if self.lambda_c.len() != 1 && self.lambda_c.len() != self.compression.len() {
            return Err(Error::invalid(
                "lambda_c",
                format!("needs 1 or {} values, got {}", self.compression.len(), self.lambda_c.len()),
            ));
        }
        if self.lambda_c.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("lambda_c", "values must be positive"));
        }
        self.ensemble.covariance_factor(2)?;
        let s = self.sparsity()?;
        gen_beta(s, self.p)?;
        Ok(())
    }

    pub fn sparsity(&self) -> Result<usize> {
        sparsity_level(self.regime, self.p)
    }

    pub fn lambda_c_for(&self, curve: usize) -> f64 {
        if self.lambda_c.len() == 1 {
            self.lambda_c[0]
        } else {
            self.lambda_c[curve]
        }
    }

    fn root(&self) -> SeededStream {
        SeededStream::new(self.base_seed, 0x5A75)
    }
}

/// Result of one trial; solver failures count as unsuccessful and keep
/// their message.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub compression: Compression,
    pub theta: f64,
    pub m: usize,
    pub n: usize,
    pub successes: usize,
    pub trials: usize,
}

impl CurveRow {
    pub fn prob(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsistencyCurve {
    pub rows: Vec<CurveRow>,
    /// `(row index, message)` for every trial that errored.
    pub diagnostics: Vec<(usize, String)>,
}

struct Draw {
    prob: LassoProblem<f64>,
    beta_star: RealVector,
    s: usize,
    m: usize,
}

fn draw(cfg: &SparsistencyConfig, comp: Compression, theta: f64, stream: SeededStream) -> Result<Draw> {
    let s = cfg.sparsity()?;
    let beta_star = gen_beta(s, cfg.p)?;
    let m = sample_count(theta, s, cfg.p, cfg.sigma2)?;
    let n = comp.raw_samples(m);
    let mut x = gen_design(cfg.ensemble, n, cfg.p, stream.derive(&[0]))?;
    if cfg.normalize {
        x = column_normalize(&x)?;
    }
    let mut g = stream.derive(&[1]).gaussian();
    let sd = cfg.sigma2.sqrt();
    let mut y = x.mul_vec(&beta_star)?.into_inner();
    for v in y.iter_mut() {
        *v += g.normal(sd);
    }
    let prob = match comp {
        Compression::Uncompressed => LassoProblem::new(x, RealVector::new(y)?)?,
        Compression::Factor(_) => {
            let op = make_projection(m, n, stream.derive(&[2]))?;
            LassoProblem::new(mat_mul(op.phi(), &x)?, compress_response(&op, &y)?)?
        }
    };
    Ok(Draw { prob, beta_star, s, m })
}

/// `(λ(β), knot index)` for every knot with `‖β‖₁ > 0`.
fn knot_lambdas(path: &LassoPath<f64>, prob: &LassoProblem<f64>) -> Result<Vec<(f64, usize)>> {
    let mut out = Vec::new();
    for (k, knot) in path.knots().iter().enumerate() {
        if knot.beta.norm1() > 0.0 {
            out.push((path_lambda(&knot.beta, prob)?, k));
        }
    }
    Ok(out)
}

/// Index of the knot whose `λ(β)` is closest to `target`; ties go to the
/// later knot (smaller `λ`).
pub fn select_knot(path: &LassoPath<f64>, prob: &LassoProblem<f64>, target: f64) -> Result<Option<usize>> {
    let mut best: Option<(f64, usize)> = None;
    for (lam, k) in knot_lambdas(path, prob)? {
        let d = (lam - target).abs();
        if best.map_or(true, |(bd, _)| d <= bd) {
            best = Some((d, k));
        }
    }
    Ok(best.map(|(_, k)| k))
}

fn signs_match(beta: &[f64], beta_star: &[f64]) -> bool {
    sign_pattern(beta, SIGN_TOL) == sign_pattern(beta_star, 0.0)
}

fn trial_inner(cfg: &SparsistencyConfig, curve: usize, theta: f64, stream: SeededStream) -> Result<bool> {
    let comp = cfg.compression[curve];
    let d = draw(cfg, comp, theta, stream)?;
    let path = lars_path(&d.prob)?;
    let target = lambda_schedule(cfg.p, d.s, d.m, cfg.lambda_c_for(curve), LogBase::Base2)?;
    Ok(match select_knot(&path, &d.prob, target)? {
        Some(k) => signs_match(&path.knots()[k].beta, &d.beta_star),
        None => false,
    })
}

fn trial_stream(cfg: &SparsistencyConfig, comp: Compression, theta: f64, trial: usize) -> SeededStream {
    cfg.root().derive(&[TAG_TRIAL, comp.key(), theta.to_bits(), trial as u64])
}

/// One draw of `(X, ε, Φ)` for curve `curve` at `θ`, scored for exact sign
/// recovery.
pub fn run_sparsistency_trial(cfg: &SparsistencyConfig, curve: usize, theta: f64, trial: usize) -> TrialOutcome {
    let comp = cfg.compression[curve];
    match trial_inner(cfg, curve, theta, trial_stream(cfg, comp, theta, trial)) {
        Ok(success) => TrialOutcome { success, diagnostic: None },
        Err(e) => TrialOutcome {
            success: false,
            diagnostic: Some(e.to_string()),
        },
    }
}

/// Success counts for every `(curve, θ)`; deterministic in `base_seed`
/// whatever the thread count.
pub fn run_sparsistency_curve(cfg: &SparsistencyConfig) -> Result<SparsistencyCurve> {
    cfg.validate()?;
    let s = cfg.sparsity()?;
    let mut cells = Vec::new();
    for curve in 0..cfg.compression.len() {
        for &theta in &cfg.theta_grid {
            cells.push((curve, theta));
        }
    }
    let outcomes: Vec<TrialOutcome> = cells
        .iter()
        .flat_map(|&(curve, theta)| (0..cfg.trials).map(move |t| (curve, theta, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(curve, theta, t)| run_sparsistency_trial(cfg, curve, theta, t))
        .collect();
    let mut rows = Vec::with_capacity(cells.len());
    let mut diagnostics = Vec::new();
    for (i, (&(curve, theta), chunk)) in cells.iter().zip(outcomes.chunks(cfg.trials)).enumerate() {
        let comp = cfg.compression[curve];
        let m = sample_count(theta, s, cfg.p, cfg.sigma2)?;
        for o in chunk {
            if let Some(msg) = &o.diagnostic {
                diagnostics.push((i, msg.clone()));
            }
        }
        rows.push(CurveRow {
            compression: comp,
            theta,
            m,
            n: comp.raw_samples(m),
            successes: chunk.iter().filter(|o| o.success).count(),
            trials: cfg.trials,
        });
    }
    Ok(SparsistencyCurve { rows, diagnostics })
}

/// Pilot estimate of the schedule constant for one curve: over `pilot`
/// trials at `θ = 1`, the sign-consistent knot whose `λ(β)` lies closest to
/// the `c = 1` schedule contributes the ratio `λ(β)/λ_m`; the mean ratio is
/// returned (1 if no trial recovers the signs).
pub fn calibrate_lambda_c(cfg: &SparsistencyConfig, curve: usize, pilot: usize) -> Result<f64> {
    SparsistencyConfig {
        lambda_c: vec![1.0],
        ..cfg.clone()
    }
    .validate()?;
    let comp = cfg.compression[curve];
    let ratios: Vec<Option<f64>> = (0..pilot)
        .into_par_iter()
        .map(|t| -> Result<Option<f64>> {
            let stream = cfg.root().derive(&[TAG_PILOT, comp.key(), t as u64]);
            let d = match draw(cfg, comp, 1.0, stream) {
                Ok(d) => d,
                Err(_) => return Ok(None),
            };
            let Ok(path) = lars_path(&d.prob) else { return Ok(None) };
            let unit = lambda_schedule(cfg.p, d.s, d.m, 1.0, LogBase::Base2)?;
            let mut best: Option<f64> = None;
            for (lam, k) in knot_lambdas(&path, &d.prob)? {
                if signs_match(&path.knots()[k].beta, &d.beta_star) {
                    let r = lam / unit;
                    if best.map_or(true, |b| (r - 1.0).abs() < (b - 1.0).abs()) {
                        best = Some(r);
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let hits: Vec<f64> = ratios.into_iter().flatten().collect();
    if hits.is_empty() {
        return Ok(1.0);
    }
    Ok(hits.iter().sum::<f64>() / hits.len() as f64)
}
