//! Concentration statements for Gaussian projections, each paired with a
//! Monte-Carlo verifier.
//!
//! Probabilistic guarantees become deterministic accept rules through a
//! fixed slack: an empirical frequency passes against an analytic bound `b`
//! over `t` trials when it is at most `b + 3√(b/t) + 10/t`.

use rayon::prelude::*;

use crate::compress::CompressionOp;
use crate::incoherence::{incoherence_report, SupportSpec, C1, C2};
use crate::linalg::{dot, mat_mul};
use crate::rng::SeededStream;
use crate::{Error, RealMatrix, Result};

/// Monte-Carlo slack added to an analytic probability bound.
pub fn mc_slack(bound: f64, trials: usize) -> f64 {
    let t = trials as f64;
    3.0 * (bound / t).sqrt() + 10.0 / t
}

/// Outcome of comparing an empirical tail frequency with its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCheckResult {
    pub tau: f64,
    pub analytic_bound: f64,
    pub empirical_freq: f64,
    pub trials: usize,
    pub pass: bool,
}

impl TailCheckResult {
    fn new(tau: f64, analytic_bound: f64, exceedances: usize, trials: usize) -> Self {
        let empirical_freq = exceedances as f64 / trials as f64;
        TailCheckResult {
            tau,
            analytic_bound,
            empirical_freq,
            trials,
            pass: empirical_freq <= analytic_bound + mc_slack(analytic_bound, trials),
        }
    }
}

/// `min(1, 2·exp(−mτ²/(C₁ + C₂τ)))`, the tail bound for the rescaled
/// projected inner product. Saturates at 1 for `τ ≤ 0`.
pub fn ip_tail_bound(tau: f64, m: usize) -> f64 {
    if !(tau > 0.0) {
        return 1.0;
    }
    let m = m as f64;
    (2.0 * (-m * tau * tau / (C1 + C2 * tau)).exp()).min(1.0)
}

/// Frequency of `|(n/m)⟨Φx, Φy⟩ − ⟨x, y⟩| ≥ τ` over fresh `m × n`
/// projections, `n = x.len()`.
pub fn ip_tail_empirical(
    x: &[f64],
    y: &[f64],
    m: usize,
    tau: f64,
    trials: usize,
    stream: SeededStream,
) -> Result<TailCheckResult> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::dims("ip_tail_empirical", x.len(), y.len()));
    }
    let norm = |v: &[f64]| dot(v, v).sqrt();
    if norm(x) > 1.0 + 1e-12 || norm(y) > 1.0 + 1e-12 {
        return Err(Error::invalid("x, y", "both vectors need ℓ2 norm at most 1"));
    }
    if trials < 100 {
        return Err(Error::invalid("trials", "need at least 100 trials"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be positive"));
    }
    let n = x.len();
    let truth = dot(x, y);
    // Only the columns of Φ touching supp(x) ∪ supp(y) enter the statistic.
    let cols: Vec<usize> = (0..n).filter(|&j| x[j] != 0.0 || y[j] != 0.0).collect();
    let sd = (1.0 / n as f64).sqrt();
    let scale = n as f64 / m as f64;
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = stream.derive(&[t as u64]).gaussian();
            let mut ip = 0.0;
            for _ in 0..m {
                let (mut px, mut py) = (0.0, 0.0);
                for &j in &cols {
                    let v = g.normal(sd);
                    px += v * x[j];
                    py += v * y[j];
                }
                ip += px * py;
            }
            usize::from((scale * ip - truth).abs() >= tau)
        })
        .sum();
    Ok(TailCheckResult::new(tau, ip_tail_bound(tau, m), hits, trials))
}

/// Entrywise size of `R = ΦΦᵀ − I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramDeviation {
    pub max_diag: f64,
    pub max_offdiag: f64,
    pub m: usize,
    pub n: usize,
}

impl GramDeviation {
    /// `(√(16 ln n / n), √(2 ln n / n))`.
    pub fn thresholds(n: usize) -> (f64, f64) {
        let n = n as f64;
        ((16.0 * n.ln() / n).sqrt(), (2.0 * n.ln() / n).sqrt())
    }

    /// Either deviation reaches its threshold.
    pub fn exceeds(&self) -> bool {
        let (d, o) = Self::thresholds(self.n);
        self.max_diag >= d || self.max_offdiag >= o
    }

    /// Probability bound `m²/n³` on [`GramDeviation::exceeds`].
    pub fn exceed_probability_bound(m: usize, n: usize) -> f64 {
        ((m * m) as f64 / (n as f64).powi(3)).min(1.0)
    }

    /// The sizes for which the `m²/n³` bound is derived: `m² ≤ n/(2 ln n)`.
    pub fn in_regime(m: usize, n: usize) -> bool {
        let nf = n as f64;
        n >= 2 && ((m * m) as f64) <= nf / (2.0 * nf.ln())
    }
}

pub fn gram_deviation(op: &CompressionOp) -> GramDeviation {
    let phi = op.phi();
    let m = phi.rows();
    let mut max_diag: f64 = 0.0;
    let mut max_offdiag: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            let v = dot(phi.row(i), phi.row(j));
            if i == j {
                max_diag = max_diag.max((v - 1.0).abs());
            } else {
                max_offdiag = max_offdiag.max(v.abs());
            }
        }
    }
    GramDeviation {
        max_diag,
        max_offdiag,
        m,
        n: op.n(),
    }
}

/// Which conclusions about `Z = ΦX` held for one projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionCheck {
    /// `|gram_dev(Z, m) − gram_dev(X, n)| ≤ η/4`
    pub gram_shift: bool,
    /// `cross_term(Z) + gram_dev(Z) ≤ 1 − η/2`
    pub incoherence: bool,
    /// `Λ_min((1/m) Z_SᵀZ_S) ≥ 3η/4`
    pub min_eigen: bool,
    /// `|‖ΦX_j‖² − m| ≤ mη/(4s)` for every column
    pub column_norms: bool,
}

impl ProjectionCheck {
    pub fn all(&self) -> bool {
        self.gram_shift && self.incoherence && self.min_eigen && self.column_norms
    }
}

/// Checks whether projecting an S-incoherent design (squared column norms
/// `n`) keeps it incoherent with the degraded constants.
pub fn projection_preserves_incoherence(
    x: &RealMatrix,
    s: &SupportSpec,
    op: &CompressionOp,
    eta: f64,
) -> Result<ProjectionCheck> {
    let n = x.rows();
    if op.n() != n {
        return Err(Error::dims("projection_preserves_incoherence", n, op.n()));
    }
    let before = incoherence_report(x, s, n as f64)?;
    if before.eta < eta - 1e-12 {
        return Err(Error::invalid(
            "x",
            format!("design is not S-incoherent at η={eta} (measured η={})", before.eta),
        ));
    }
    for j in 0..x.cols() {
        let sq: f64 = x.column(j).iter().map(|v| v * v).sum();
        if (sq - n as f64).abs() > 1e-8 * n as f64 {
            return Err(Error::invalid("x", format!("column {j} has squared norm {sq}, expected {n}")));
        }
    }
    let z = mat_mul(op.phi(), x)?;
    let m = z.rows() as f64;
    let after = incoherence_report(&z, s, m)?;
    let s_len = s.len() as f64;
    let column_norms = (0..z.cols()).all(|j| {
        let sq: f64 = z.column(j).iter().map(|v| v * v).sum();
        (sq - m).abs() <= m * eta / (4.0 * s_len)
    });
    Ok(ProjectionCheck {
        gram_shift: (after.gram_dev - before.gram_dev).abs() <= eta / 4.0,
        incoherence: after.cross_term + after.gram_dev <= 1.0 - eta / 2.0,
        min_eigen: after.min_eig >= 3.0 * eta / 4.0,
        column_norms,
    })
}

/// Monte-Carlo estimate of `E max_i |X_i|` for independent centered
/// Gaussians against the bound `3√(ln n) · max_i σ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMaxResult {
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub trials: usize,
    pub pass: bool,
}

pub fn gaussian_max_check(variances: &[f64], trials: usize, stream: SeededStream) -> Result<GaussianMaxResult> {
    let n = variances.len();
    if n < 2 {
        return Err(Error::invalid("variances", "need at least two coordinates"));
    }
    if variances.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("variances", "must be nonnegative"));
    }
    let sds: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let bound = 3.0 * (n as f64).ln().sqrt() * sds.iter().cloned().fold(0.0, f64::max);
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = stream.derive(&[t as u64]).gaussian();
            sds.iter().map(|sd| g.normal(*sd).abs()).fold(0.0, f64::max)
        })
        .collect();
    let t = trials.max(1) as f64;
    let estimate = samples.iter().sum::<f64>() / t;
    let var = if trials > 1 {
        samples.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let std_error = (var / t).sqrt();
    Ok(GaussianMaxResult {
        estimate,
        std_error,
        bound,
        trials,
        pass: estimate <= bound + 5.0 * std_error,
    })
}

/// One line of a verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteLine {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// The fixed concentration grid: inner-product tails at
/// `m ∈ {5, 20, 50} × τ ∈ {0.3, 0.5, 1.0}` plus an orthogonal pair,
/// Gram deviation over 200 projections at `m = 20, n = 5000`, and Gaussian
/// maxima at `n ∈ {10, 100, 1000}`.
pub fn concentration_suite(seed: u64) -> Result<Vec<SuiteLine>> {
    const DIM: usize = 64;
    const TRIALS: usize = 10_000;
    let root = SeededStream::new(seed, 0xC0C0);
    let mut lines = Vec::new();

    let mut x = vec![0.0; DIM];
    x[0] = 0.6;
    x[1] = 0.8;
    let mut y = vec![0.0; DIM];
    y[0] = 0.8;
    y[2] = 0.6;
    let mut cfgs: Vec<(usize, f64, &[f64], &[f64])> = Vec::new();
    for m in [5, 20, 50] {
        for tau in [0.3, 0.5, 1.0] {
            cfgs.push((m, tau, &x, &y));
        }
    }
    let mut a = vec![0.0; DIM];
    let mut b = vec![0.0; DIM];
    a[3] = 1.0;
    b[7] = 1.0;
    cfgs.push((50, 0.3, &a, &b));
    for (k, (m, tau, u, v)) in cfgs.into_iter().enumerate() {
        let r = ip_tail_empirical(u, v, m, tau, TRIALS, root.derive(&[1, k as u64]))?;
        let pair = if k == 9 { "orthogonal" } else { "overlapping" };
        lines.push(SuiteLine {
            name: format!("ip_tail {pair} m={m} tau={tau}"),
            detail: format!("freq={} bound={}", r.empirical_freq, r.analytic_bound),
            pass: r.pass,
        });
    }

    let (m, n, seeds) = (20, 5000, 200);
    let hits: usize = (0..seeds)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let op = crate::compress::make_projection(m, n, root.derive(&[2, t as u64]))?;
            Ok(usize::from(gram_deviation(&op).exceeds()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let bound = GramDeviation::exceed_probability_bound(m, n);
    let freq = hits as f64 / seeds as f64;
    lines.push(SuiteLine {
        name: format!("gram_deviation m={m} n={n}"),
        detail: format!(
            "freq={freq} bound={bound} in_regime={}",
            GramDeviation::in_regime(m, n)
        ),
        pass: freq <= bound + mc_slack(bound, seeds),
    });

    for (k, dim) in [10usize, 100, 1000].into_iter().enumerate() {
        let r = gaussian_max_check(&vec![1.0; dim], TRIALS, root.derive(&[3, k as u64]))?;
        lines.push(SuiteLine {
            name: format!("gaussian_max n={dim}"),
            detail: format!("estimate={} bound={}", r.estimate, r.bound),
            pass: r.pass,
        });
    }
    Ok(lines)
}

/// Projection of an orthogonal ±1 design (`n = 2048, p = 4, s = {0}, η = 1`)
/// at `m` rows, repeated over `seeds` projections. `m = None` uses the
/// smallest row count the sample bound allows.
pub fn incoherence_suite(seed: u64, m: Option<usize>, seeds: usize) -> Result<Vec<SuiteLine>> {
    let (n, p) = (2048usize, 4usize);
    let x = RealMatrix::from_fn(n, p, |i, j| if (i & (j + 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 })?;
    let s = SupportSpec::new(vec![0], 1.0)?;
    let report = incoherence_report(&x, &s, n as f64)?;
    let m = match m {
        Some(m) => m,
        None => crate::incoherence::sample_size_bound(s.len(), p, n, 1.0, 2.0)?.ceil() as usize,
    };
    let mut lines = vec![SuiteLine {
        name: "orthogonal fixture".into(),
        detail: format!("eta={} irrep={}", report.eta, report.irrep),
        pass: (report.eta - 1.0).abs() < 1e-12 && report.irrep.abs() < 1e-12,
    }];
    let root = SeededStream::new(seed, 0x1C0);
    let failures: usize = (0..seeds)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let op = crate::compress::make_projection(m, n, root.derive(&[t as u64]))?;
            Ok(usize::from(!projection_preserves_incoherence(&x, &s, &op, 1.0)?.all()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let bound = 1.0 / (n as f64).powi(2);
    let freq = failures as f64 / seeds.max(1) as f64;
    lines.push(SuiteLine {
        name: format!("projected incoherence m={m} n={n}"),
        detail: format!("failures={failures}/{seeds}"),
        pass: freq <= bound + mc_slack(bound, seeds.max(1)),
    });
    Ok(lines)
}
