//! `maskreg`: run compressed-regression experiments and verification
//! suites from the command line.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use chrono::Utc;
use clap::{Parser, Subcommand, ValueEnum};
use maskreg::concentration::{concentration_suite, incoherence_suite, SuiteLine};
use maskreg::experiments::{calibrate_lambda_c, run_persistence_curve, run_sparsistency_curve};
use maskreg::privacy::{rate_bound_additive, rate_bound_multiplicative};

use config::{ConfigError, ConfigFile, LambdaPlan, PersistenceSection};
use output::RunManifest;

const DEFAULT_SEED: u64 = 1;
const INCOHERENCE_SEEDS: usize = 20;

#[derive(Parser)]
#[command(name = "maskreg", version, about = "Compressed sparse regression experiments")]
struct Cli {
    /// Base seed; overrides the config file and MASKREG_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sign-recovery success curves.
    Sparsistency {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Predictive-risk curves of the ℓ1-constrained compressed fit.
    Persistence {
        /// Config with a [persistence] table; the desk-scale default otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Use n=9000, p=128, 100 trials when no config is given.
        #[arg(long)]
        full_scale: bool,
    },
    /// Information-rate upper bound, printed as `rate_nats=<value>`.
    /// Flags override the [privacy] table of `--config`.
    Privacy {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Per-entry second-moment bound.
        #[arg(long = "P")]
        power: Option<f64>,
        /// Additive noise variance (additive kind only).
        #[arg(long)]
        gamma2: Option<f64>,
    },
    /// Monte-Carlo verification suites.
    Check {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Force the projected row count of the incoherence suite.
        #[arg(long, hide = true)]
        undersized_m: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Additive,
    Multiplicative,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Suite {
    Incoherence,
    Concentration,
    All,
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn invalid(err: anyhow::Error) -> Failure {
    Failure { code: 2, err }
}

fn io(err: anyhow::Error) -> Failure {
    Failure { code: 3, err }
}

fn load(path: &Path) -> Result<ConfigFile, Failure> {
    ConfigFile::load(path).map_err(|e| match e {
        ConfigError::Io(e) => io(e),
        ConfigError::Invalid(e) => invalid(e),
    })
}

fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag.or(from_config) {
        return Ok(s);
    }
    match std::env::var("MASKREG_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| invalid(anyhow!("MASKREG_SEED: {v:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn finish(
    command: &str,
    out: &Path,
    stem: &str,
    csv: &str,
    hash: String,
    seed: u64,
    started: chrono::DateTime<Utc>,
) -> Result<(), Failure> {
    let csv_path = output::write_file(out, &format!("{stem}.csv"), csv).map_err(io)?;
    let manifest = RunManifest {
        command: command.into(),
        config_hash: hash,
        base_seed: seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started,
        finished: Utc::now(),
        outputs: vec![csv_path.display().to_string()],
    };
    output::write_manifest(out, stem, &manifest).map_err(io)?;
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}

fn sparsistency(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let started = Utc::now();
    let file = load(config)?;
    let section = file
        .sparsistency
        .as_ref()
        .ok_or_else(|| invalid(anyhow!("{}: missing [sparsistency] table", config.display())))?;
    let seed = resolve_seed(seed, section.base_seed)?;
    let (mut cfg, plan) = section.build(seed).map_err(invalid)?;
    if let LambdaPlan::Calibrate { pilot } = plan {
        cfg.lambda_c = (0..cfg.compression.len())
            .map(|k| calibrate_lambda_c(&cfg, k, pilot))
            .collect::<maskreg::Result<_>>()
            .map_err(|e| invalid(e.into()))?;
        for (comp, c) in cfg.compression.iter().zip(&cfg.lambda_c) {
            eprintln!("calibrated lambda_c f={comp}: {c}");
        }
    }
    eprintln!(
        "sparsistency: {} curves x {} theta x {} trials",
        cfg.compression.len(),
        cfg.theta_grid.len(),
        cfg.trials
    );
    let curve = run_sparsistency_curve(&cfg).map_err(|e| invalid(e.into()))?;
    for (row, msg) in &curve.diagnostics {
        eprintln!("trial failure in row {row}: {msg}");
    }
    finish("sparsistency", out, "sparsistency", &output::sparsistency_csv(&curve), file.hash(), seed, started)
}

fn persistence(config: Option<&Path>, out: &Path, full_scale: bool, seed: Option<u64>) -> Result<(), Failure> {
    let started = Utc::now();
    let file = match config {
        Some(path) => load(path)?,
        None => ConfigFile {
            persistence: Some(if full_scale { PersistenceSection::full() } else { PersistenceSection::desk() }),
            ..ConfigFile::default()
        },
    };
    let section = file
        .persistence
        .as_ref()
        .ok_or_else(|| invalid(anyhow!("missing [persistence] table")))?;
    let seed = resolve_seed(seed, section.base_seed)?;
    let cfg = section.build(seed).map_err(invalid)?;
    eprintln!("persistence: n={} p={} {} values of m x {} trials", cfg.n, cfg.p, cfg.m_grid.len(), cfg.trials);
    let curve = run_persistence_curve(&cfg).map_err(|e| invalid(e.into()))?;
    for (row, msg) in &curve.diagnostics {
        eprintln!("trial failure in row {row}: {msg}");
    }
    finish("persistence", out, "persistence", &output::persistence_csv(&curve), file.hash(), seed, started)
}

struct PrivacyArgs {
    kind: Option<Kind>,
    m: Option<usize>,
    n: Option<usize>,
    power: Option<f64>,
    gamma2: Option<f64>,
}

fn privacy(config: Option<&Path>, args: PrivacyArgs) -> Result<(), Failure> {
    let section = match config {
        Some(path) => load(path)?.privacy,
        None => None,
    };
    let missing = |flag: &str| invalid(anyhow!("missing --{flag} (no value in a [privacy] table either)"));
    let kind = args.kind.or(section.as_ref().map(|s| s.kind)).ok_or_else(|| missing("kind"))?;
    let m = args.m.or(section.as_ref().map(|s| s.m)).ok_or_else(|| missing("m"))?;
    let n = args.n.or(section.as_ref().map(|s| s.n)).ok_or_else(|| missing("n"))?;
    let power = args.power.or(section.as_ref().map(|s| s.power)).ok_or_else(|| missing("P"))?;
    let gamma2 = args.gamma2.or(section.as_ref().map(|s| s.gamma2)).unwrap_or(0.0);
    let bound = match kind {
        Kind::Additive => rate_bound_additive(m, n, power, gamma2),
        Kind::Multiplicative => rate_bound_multiplicative(m, n, power),
    }
    .map_err(|e| invalid(e.into()))?;
    println!("rate_nats={}", bound.rate_nats);
    Ok(())
}

fn check(suite: Suite, seed: Option<u64>, undersized_m: Option<usize>) -> Result<(), Failure> {
    let seed = resolve_seed(seed, None)?;
    let mut lines: Vec<SuiteLine> = Vec::new();
    let run = |r: maskreg::Result<Vec<SuiteLine>>| r.map_err(|e| invalid(e.into()));
    if suite != Suite::Concentration {
        lines.extend(run(incoherence_suite(seed, undersized_m, INCOHERENCE_SEEDS))?);
    }
    if suite != Suite::Incoherence {
        lines.extend(run(concentration_suite(seed))?);
    }
    let width = lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
    for l in &lines {
        println!("{}  {:width$}  {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    let failed: Vec<&SuiteLine> = lines.iter().filter(|l| !l.pass).collect();
    if failed.is_empty() {
        return Ok(());
    }
    let detail = failed
        .iter()
        .map(|l| format!("{}: {}", l.name, l.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Err(Failure {
        code: 1,
        err: anyhow!("{} check(s) failed: {detail}", failed.len()),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(invalid(anyhow!("--workers must be positive")));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| invalid(e.into()))?;
    pool.install(|| match cli.command {
        Command::Sparsistency { config, out } => sparsistency(&config, &out, cli.seed),
        Command::Persistence { config, out, full_scale } => persistence(config.as_deref(), &out, full_scale, cli.seed),
        Command::Privacy { config, kind, m, n, power, gamma2 } => {
            privacy(config.as_deref(), PrivacyArgs { kind, m, n, power, gamma2 })
        }
        Command::Check { suite, undersized_m } => check(suite, cli.seed, undersized_m),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
