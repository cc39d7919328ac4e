//! End-to-end runs of the command-line tool on small configs.

use bosegas::config::Config;
use std::path::{Path, PathBuf};
use std::process::Command;

const SIM: &str = r#"
[grid]
dim = 1
points = 64
box_length = 32.0

[potential]
n = 1.0
rho0 = 0.05

[initial]
p0 = [0.4]
beta0 = { amplitude = 0.05, width = 2.0, phase = 0.0 }

[time]
dt = 0.01
t_final = 1.0
sample_interval = 0.05
"#;

const LAMBDA: &str = r#"
[potential]
n = 1.0
rho0 = 0.05

[quadrature]
dim = 5

[lambda_fit]
excess_min = 0.05
excess_max = 0.2
samples = 6
"#;

const SOLITON: &str = r#"
[grid]
dim = 2
points = 32
box_length = 30.0

[potential]
n = 1.0
rho0 = 0.05

[soliton]
momenta = [[0.0, 0.0], [0.5, 0.0]]
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bosegas"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = bin().args(args).output().unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into(), String::from_utf8_lossy(&o.stderr).into())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_csv_with_contract_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.toml", SIM);
    let out = dir.path().join("out");
    let (code, _, err) = run(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    let hash = Config::parse(SIM).unwrap().hash();
    assert_eq!(lines.next().unwrap(), format!("# bosegas {} config_hash={hash}", env!("CARGO_PKG_VERSION")));
    assert_eq!(lines.next().unwrap(), "t,X_1,P_1,Pdot_1,H,reBetaL2,gradImBetaL2,solitonGap");
    assert_eq!(lines.count(), 21);
    let json = std::fs::read_to_string(out.join("simulate.json")).unwrap();
    assert!(json.contains(&hash));
}

#[test]
fn effective_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.toml", SIM);
    let out = dir.path().join("out");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]).0, 0);
    let eff = Config::load(&out.join("effective_config.toml")).unwrap();
    assert_eq!(eff, Config::parse(SIM).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.toml", SIM);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&a), "--threads", "1"]).0, 0);
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&b), "--threads", "3"]).0, 0);
    for f in ["trajectory.csv", "simulate.json", "effective_config.toml"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn lambda_fit_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "l.toml", LAMBDA);
    let out = dir.path().join("out");
    assert_eq!(run(&["lambda-fit", "--config", s(&cfg), "--out", s(&out)]).0, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("lambda_fit.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "lambda-fit");
    for key in ["slope", "slope_ci", "lambda_min", "samples"] {
        assert!(!v["result"][key].is_null(), "{key}");
    }
    assert_eq!(v["result"]["samples"].as_array().unwrap().len(), 6);
}

#[test]
fn negative_dt_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &SIM.replace("dt = 0.01", "dt = -0.01"));
    let (code, _, err) = run(&["simulate", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code, 2);
    assert!(err.contains("dt"));
}

#[test]
fn missing_table_and_missing_config_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.toml", SIM);
    assert_eq!(run(&["friction", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]).0, 2);
    assert_eq!(run(&["simulate"]).0, 2);
}

#[test]
fn sonic_friction_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[potential]\nn = 1.0\nrho0 = 0.05\n[friction]\nspeeds = [1.0]\n";
    let cfg = write(dir.path(), "f.toml", text);
    assert_eq!(run(&["friction", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]).0, 2);
}

#[test]
fn report_passes_fails_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SOLITON);
    let out = dir.path().join("sol");
    assert_eq!(run(&["soliton", "--config", s(&cfg), "--out", s(&out)]).0, 0);
    let good = out.join("soliton.json");
    let rep = dir.path().join("rep");
    let (code, stdout, _) = run(&["report", s(&good), "--out", s(&rep)]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS AC9")), "{stdout}");
    let table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(rep.join("report.json")).unwrap()).unwrap();
    assert_eq!(table["result"]["all_pass"], true);

    // a lambda fit with the wrong exponent fails its row
    let lcfg = write(dir.path(), "l.toml", LAMBDA);
    let lout = dir.path().join("lam");
    assert_eq!(run(&["lambda-fit", "--config", s(&lcfg), "--out", s(&lout)]).0, 0);
    let (code, stdout, _) = run(&["report", s(&good), s(&lout.join("lambda_fit.json")), "--out", s(&rep)]);
    assert_ne!(code, 0);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL AC1")), "{stdout}");

    // no inputs
    let (code, _, err) = run(&["report", "--out", s(&rep)]);
    assert_eq!(code, 2);
    assert!(err.contains("missing inputs"));

    // another version
    let text = std::fs::read_to_string(&good).unwrap().replace(env!("CARGO_PKG_VERSION"), "0.0.0-other");
    let old = write(dir.path(), "old.json", &text);
    let (code, _, err) = run(&["report", s(&old), "--out", s(&rep)]);
    assert_eq!(code, 2);
    assert!(err.contains("version mismatch"));
}
