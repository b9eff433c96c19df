use std::path::Path;
use std::process::{Command, Output};

fn maskreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskreg"))
        .args(args)
        .env_remove("MASKREG_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const TINY: &str = r#"
[sparsistency]
ensemble = "identity"
regime = "sublinear"
alpha = 0.1
p = 64
compression_factors = [3]
theta_grid = [1.5]
trials = 1
base_seed = 5
"#;

const PERSIST: &str = r#"
[persistence]
n = 300
p = 8
beta_star = [1.0, -0.5]
m_grid = [70, 120, 300]
trials = 2
"#;

#[test]
fn minimal_sparsistency_run_writes_one_row_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", TINY);
    let out = maskreg(&["sparsistency", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sparsistency.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "f,theta,m,n,successes,trials,prob");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("3,1.5,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sparsistency.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["base_seed"], 5);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical_and_seed_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &TINY.replace("trials = 1", "trials = 6"));
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let status = maskreg(&["--seed", seed, "sparsistency", "--config", &cfg, "--out", out.to_str().unwrap()]).status;
        assert!(status.success());
        std::fs::read(out.join("sparsistency.csv")).unwrap()
    };
    assert_eq!(run("a", "9"), run("b", "9"));
    let manifest = std::fs::read_to_string(dir.path().join("a/sparsistency.manifest.json")).unwrap();
    assert!(manifest.contains("\"base_seed\": 9"));
}

#[test]
fn unknown_key_is_rejected_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{TINY}thetas = [1.0]\n"));
    let out = maskreg(&["sparsistency", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("thetas"));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = maskreg(&["sparsistency", "--config", "/nonexistent/maskreg.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn persistence_writes_one_row_per_m() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", PERSIST);
    let out = maskreg(&["persistence", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("persistence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,L_nm,mean_emp_risk,std_emp_risk,oracle_compressed,oracle_uncompressed,L_n");
    assert_eq!(lines.len(), 4);
}

#[test]
fn privacy_prints_rate() {
    let e = std::f64::consts::E;
    let power = format!("{}", e - 1.0);
    let out = maskreg(&["privacy", "--kind", "additive", "--m", "10", "--n", "1000", "--P", &power, "--gamma2", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rate: f64 = text.trim().strip_prefix("rate_nats=").unwrap().parse().unwrap();
    assert!((rate - 0.01).abs() < 1e-9);

    let out = maskreg(&["privacy", "--kind", "multiplicative", "--m", "10", "--n", "1000", "--P", "0.01"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "rate_nats=0");
}

#[test]
fn privacy_rejects_bad_input() {
    assert_eq!(maskreg(&["privacy", "--kind", "additive", "--m", "10", "--P", "1"]).status.code(), Some(2));
    let zero = maskreg(&["privacy", "--kind", "additive", "--m", "10", "--n", "100", "--P", "1"]);
    assert_eq!(zero.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&zero.stderr).contains("gamma2"));
}

#[test]
fn check_suites_pass_and_undersized_projection_fails() {
    let all = maskreg(&["check", "--suite", "all"]);
    assert_eq!(all.status.code(), Some(0), "{}", String::from_utf8_lossy(&all.stdout));
    assert!(String::from_utf8(all.stdout).unwrap().lines().all(|l| l.starts_with("PASS")));

    let bad = maskreg(&["check", "--suite", "incoherence", "--undersized-m", "2"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stdout).unwrap().contains("FAIL"));
}

#[test]
fn zero_workers_rejected() {
    let out = maskreg(&["--workers", "0", "privacy", "--kind", "multiplicative", "--m", "1", "--n", "2", "--P", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn privacy_reads_config_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        "[privacy]\nkind = \"additive\"\nm = 10\nn = 1000\npower = 1.718281828459045\ngamma2 = 1.0\n",
    );
    let out = maskreg(&["privacy", "--config", &cfg]);
    let rate: f64 = String::from_utf8(out.stdout).unwrap().trim()["rate_nats=".len()..].parse().unwrap();
    assert!((rate - 0.01).abs() < 1e-9);
    let out = maskreg(&["privacy", "--config", &cfg, "--m", "20"]);
    let rate: f64 = String::from_utf8(out.stdout).unwrap().trim()["rate_nats=".len()..].parse().unwrap();
    assert!((rate - 0.02).abs() < 1e-9);
}
