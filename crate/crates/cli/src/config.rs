use std::path::Path;

use anyhow::{anyhow, bail, Context};
use maskreg::experiments::{
    Compression, Ensemble, PersistenceConfig, SparsistencyConfig, SparsityRegime,
};
use maskreg::RealVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsistency: Option<SparsistencySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub persistence: Option<PersistenceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub privacy: Option<PrivacySection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleName {
    Identity,
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeName {
    Sublinear,
    Fractional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorEntry {
    Factor(u64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaC {
    One(f64),
    PerCurve(Vec<f64>),
    Mode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsistencySection {
    pub ensemble: EnsembleName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub regime: RegimeName,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub p: usize,
    pub compression_factors: Vec<FactorEntry>,
    pub theta_grid: Vec<f64>,
    pub trials: usize,
    #[serde(default = "one")]
    pub sigma2: f64,
    #[serde(default = "default_lambda_c")]
    pub lambda_c: LambdaC,
    #[serde(default = "default_pilot")]
    pub calibration_trials: usize,
    #[serde(default)]
    pub normalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceSection {
    pub n: usize,
    pub p: usize,
    /// Leading coefficients; the rest of the `p` entries are zero.
    pub beta_star: Vec<f64>,
    #[serde(default = "one")]
    pub sigma2: f64,
    #[serde(default)]
    pub rho: f64,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacySection {
    pub kind: crate::Kind,
    pub m: usize,
    pub n: usize,
    pub power: f64,
    #[serde(default)]
    pub gamma2: f64,
}

fn one() -> f64 {
    1.0
}

fn default_lambda_c() -> LambdaC {
    LambdaC::One(1.0)
}

fn default_pilot() -> usize {
    1000
}

/// Failure to obtain a usable configuration; maps to exit code 2, or 3
/// when the file could not be read.
#[derive(Debug)]
pub enum ConfigError {
    Io(anyhow::Error),
    Invalid(anyhow::Error),
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(ConfigError::Io)?;
        Self::parse(&text).map_err(ConfigError::Invalid)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| anyhow!("invalid config: {}", e.message().trim_end()).context(e.to_string()))
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`ConfigFile::canonical`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

/// How the λ constant of each curve is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaPlan {
    Fixed(Vec<f64>),
    Calibrate { pilot: usize },
}

impl SparsistencySection {
    pub fn build(&self, seed: u64) -> anyhow::Result<(SparsistencyConfig, LambdaPlan)> {
        let ensemble = match (self.ensemble, self.rho) {
            (EnsembleName::Identity, None) => Ensemble::Identity,
            (EnsembleName::Identity, Some(_)) => bail!("sparsistency.rho: only valid with ensemble = \"toeplitz\""),
            (EnsembleName::Toeplitz, Some(rho)) => Ensemble::Toeplitz { rho },
            (EnsembleName::Toeplitz, None) => bail!("sparsistency.rho: required for ensemble = \"toeplitz\""),
        };
        let regime = match (self.regime, self.gamma) {
            (RegimeName::Sublinear, None) => SparsityRegime::Sublinear { alpha: self.alpha },
            (RegimeName::Sublinear, Some(_)) => bail!("sparsistency.gamma: only valid with regime = \"fractional\""),
            (RegimeName::Fractional, Some(gamma)) => SparsityRegime::Fractional { alpha: self.alpha, gamma },
            (RegimeName::Fractional, None) => bail!("sparsistency.gamma: required for regime = \"fractional\""),
        };
        let compression = self
            .compression_factors
            .iter()
            .map(|e| match e {
                FactorEntry::Factor(f) if *f > 0 => Ok(Compression::Factor(*f as usize)),
                FactorEntry::Named(s) if s == "uncompressed" => Ok(Compression::Uncompressed),
                other => Err(anyhow!(
                    "sparsistency.compression_factors: {other:?} is neither a positive integer nor \"uncompressed\""
                )),
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let plan = match &self.lambda_c {
            LambdaC::One(c) => LambdaPlan::Fixed(vec![*c]),
            LambdaC::PerCurve(cs) => LambdaPlan::Fixed(cs.clone()),
            LambdaC::Mode(m) if m == "calibrate" => LambdaPlan::Calibrate {
                pilot: self.calibration_trials,
            },
            LambdaC::Mode(m) => bail!("sparsistency.lambda_c: unknown mode {m:?} (expected a number, a list or \"calibrate\")"),
        };
        if self.calibration_trials == 0 {
            bail!("sparsistency.calibration_trials: must be positive");
        }
        let lambda_c = match &plan {
            LambdaPlan::Fixed(cs) => cs.clone(),
            LambdaPlan::Calibrate { .. } => vec![1.0],
        };
        let cfg = SparsistencyConfig {
            ensemble,
            regime,
            p: self.p,
            compression,
            theta_grid: self.theta_grid.clone(),
            trials: self.trials,
            sigma2: self.sigma2,
            lambda_c,
            normalize: self.normalize,
            base_seed: seed,
        };
        cfg.validate().map_err(|e| anyhow!("sparsistency: {e}"))?;
        Ok((cfg, plan))
    }
}

impl PersistenceSection {
    /// n=3000, p=64, β*_a, 25 trials over 8 values of m.
    pub fn desk() -> Self {
        PersistenceSection {
            n: 3000,
            p: 64,
            beta_star: vec![-0.9, 1.1, 0.687],
            sigma2: 1.0,
            rho: 0.1,
            m_grid: vec![150, 250, 400, 650, 1000, 1500, 2200, 3000],
            trials: 25,
            base_seed: None,
        }
    }

    /// n=9000, p=128, β*_a, 100 trials.
    pub fn full() -> Self {
        PersistenceSection {
            n: 9000,
            p: 128,
            beta_star: vec![-0.9, 1.1, 0.687],
            sigma2: 1.0,
            rho: 0.1,
            m_grid: vec![200, 400, 800, 1500, 2500, 4000, 6000, 9000],
            trials: 100,
            base_seed: None,
        }
    }

    pub fn build(&self, seed: u64) -> anyhow::Result<PersistenceConfig> {
        if self.beta_star.len() > self.p {
            bail!("persistence.beta_star: {} entries exceed p = {}", self.beta_star.len(), self.p);
        }
        let mut beta = self.beta_star.clone();
        beta.resize(self.p, 0.0);
        let ensemble = if self.rho == 0.0 {
            Ensemble::Identity
        } else {
            Ensemble::Toeplitz { rho: self.rho }
        };
        let cfg = PersistenceConfig {
            n: self.n,
            p: self.p,
            beta_star: RealVector::new(beta).map_err(|e| anyhow!("persistence.beta_star: {e}"))?,
            sigma2: self.sigma2,
            ensemble,
            m_grid: self.m_grid.clone(),
            trials: self.trials,
            base_seed: seed,
        };
        cfg.validate().map_err(|e| anyhow!("persistence: {e}"))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[sparsistency]
ensemble = "toeplitz"
rho = 0.1
regime = "fractional"
alpha = 0.2
gamma = 0.5
p = 128
compression_factors = ["uncompressed", 5, 120]
theta_grid = [0.5, 1.0, 2.0]
trials = 10
lambda_c = "calibrate"

[persistence]
n = 3000
p = 64
beta_star = [-0.9, 1.1, 0.687]
rho = 0.1
m_grid = [150, 3000]
trials = 2
"#;

    #[test]
    fn canonical_round_trip() {
        let cfg = ConfigFile::parse(SAMPLE).unwrap();
        let again = ConfigFile::parse(&cfg.canonical()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.canonical(), again.canonical());
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn hash_tracks_meaningful_changes() {
        let a = ConfigFile::parse(SAMPLE).unwrap();
        let b = ConfigFile::parse(&SAMPLE.replace("trials = 10", "trials = 11")).unwrap();
        assert_ne!(a.hash(), b.hash());
        let c = ConfigFile::parse(&SAMPLE.replace("p = 128\n", "p   =   128 # same\n")).unwrap();
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ConfigFile::parse(&SAMPLE.replace("trials = 10", "trials = 10\ntrails = 3")).unwrap_err();
        assert!(format!("{err:#}").contains("trails"), "{err:#}");
    }

    #[test]
    fn builds_experiment_configs() {
        let cfg = ConfigFile::parse(SAMPLE).unwrap();
        let (s, plan) = cfg.sparsistency.unwrap().build(9).unwrap();
        assert_eq!(s.compression, vec![Compression::Uncompressed, Compression::Factor(5), Compression::Factor(120)]);
        assert_eq!(plan, LambdaPlan::Calibrate { pilot: 1000 });
        let p = cfg.persistence.unwrap().build(9).unwrap();
        assert_eq!(p.beta_star.len(), 64);
        assert_eq!(p.ensemble, Ensemble::Toeplitz { rho: 0.1 });
        PersistenceSection::desk().build(1).unwrap();
        PersistenceSection::full().build(1).unwrap();
    }

    #[test]
    fn field_level_errors() {
        let bad = SAMPLE.replace("compression_factors = [\"uncompressed\", 5, 120]", "compression_factors = [\"raw\"]");
        let err = ConfigFile::parse(&bad).unwrap().sparsistency.unwrap().build(0).unwrap_err();
        assert!(err.to_string().contains("compression_factors"));
        let bad = SAMPLE.replace("m_grid = [150, 3000]", "m_grid = [10]");
        let err = ConfigFile::parse(&bad).unwrap().persistence.unwrap().build(0).unwrap_err();
        assert!(err.to_string().contains("m_grid"));
    }
}
