//! Upper bounds on the information rate `r_{n,m}` leaked per data entry by
//! a masked release. Rates are in nats.

use std::f64::consts::{E, PI};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBound {
    pub m: usize,
    pub n: usize,
    /// per-entry second-moment bound `P`
    pub power: f64,
    /// additive noise variance `γ²`; zero for the multiplicative bound
    pub gamma2: f64,
    pub rate_nats: f64,
}

fn check_sizes(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("m, n", "must be positive"));
    }
    Ok(())
}

/// `(m/n)·ln(1 + P/γ²)` for `Z = ΦX + γΔ`.
pub fn rate_bound_additive(m: usize, n: usize, power: f64, gamma2: f64) -> Result<PrivacyBound> {
    check_sizes(m, n)?;
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::invalid("power", "must be finite and nonnegative"));
    }
    if gamma2 == 0.0 {
        return Err(Error::invalid(
            "gamma2",
            "is zero, so the additive bound diverges; use rate_bound_multiplicative",
        ));
    }
    if !(gamma2 > 0.0) {
        return Err(Error::invalid("gamma2", "must be positive"));
    }
    Ok(PrivacyBound {
        m,
        n,
        power,
        gamma2,
        rate_nats: m as f64 / n as f64 * (power / gamma2).ln_1p(),
    })
}

/// `max(0, (m/2n)·ln(2πeP))` for `Z = ΦX`.
pub fn rate_bound_multiplicative(m: usize, n: usize, power: f64) -> Result<PrivacyBound> {
    check_sizes(m, n)?;
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::invalid("power", "must be finite and positive"));
    }
    let raw = m as f64 / (2.0 * n as f64) * (2.0 * PI * E * power).ln();
    Ok(PrivacyBound {
        m,
        n,
        power,
        gamma2: 0.0,
        rate_nats: raw.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `m = ⌈ln(np)⌉`
    Sparsistency,
    /// `m = ⌈ln²(np)⌉`
    Persistence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    Additive { gamma2: f64 },
    Multiplicative,
}

impl Regime {
    pub fn sample_count(self, n: usize, p: usize) -> usize {
        let l = (n as f64 * p as f64).ln();
        match self {
            Regime::Sparsistency => l.ceil() as usize,
            Regime::Persistence => (l * l).ceil() as usize,
        }
    }
}

/// Evaluates a bound at the smallest `m` of the given regime.
pub fn rate_at_regime(n: usize, p: usize, regime: Regime, kind: BoundKind, power: f64) -> Result<PrivacyBound> {
    if n < 2 || p < 2 {
        return Err(Error::invalid("n, p", "need n, p ≥ 2"));
    }
    let m = regime.sample_count(n, p);
    match kind {
        BoundKind::Additive { gamma2 } => rate_bound_additive(m, n, power, gamma2),
        BoundKind::Multiplicative => rate_bound_multiplicative(m, n, power),
    }
}
