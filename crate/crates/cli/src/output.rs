use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{DateTime, Utc};
use maskreg::experiments::{RiskCurve, SparsistencyCurve};
use serde::Serialize;

pub const SPARSISTENCY_HEADER: &str = "f,theta,m,n,successes,trials,prob";
pub const PERSISTENCE_HEADER: &str =
    "m,L_nm,mean_emp_risk,std_emp_risk,oracle_compressed,oracle_uncompressed,L_n";

/// Rust's `Display` for `f64` is the shortest string that parses back to
/// the same value.
pub fn sparsistency_csv(curve: &SparsistencyCurve) -> String {
    let mut out = String::from(SPARSISTENCY_HEADER);
    out.push('\n');
    for r in &curve.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.compression,
            r.theta,
            r.m,
            r.n,
            r.successes,
            r.trials,
            r.prob()
        );
    }
    out
}

pub fn persistence_csv(curve: &RiskCurve) -> String {
    let mut out = String::from(PERSISTENCE_HEADER);
    out.push('\n');
    for r in &curve.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m, r.l_nm, r.mean_emp_risk, r.std_emp_risk, r.oracle_compressed, curve.oracle_uncompressed, curve.l_n
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub base_seed: u64,
    pub tool_version: String,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub outputs: Vec<String>,
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_manifest(dir: &Path, stem: &str, manifest: &RunManifest) -> anyhow::Result<PathBuf> {
    let json = serde_json::to_string_pretty(manifest)? + "\n";
    write_file(dir, &format!("{stem}.manifest.json"), &json)
}
