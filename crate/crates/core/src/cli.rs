//! Command-line front end: one subcommand per analysis, each reading the
//! tables it needs from a TOML config and writing JSON or CSV results.

use crate::config::{Config, QuadratureSpec};
use crate::dispersion::dispersion_report;
use crate::dynamics::{ballistic_diagnostics, energy_convergence, scattering_summary, simulate, DriftConvergence, RunSummary, ScatteringSummary, SimConfig};
use crate::error::{Error, Result};
use crate::friction::{extrapolated_force, friction_limit_scalar, lambda_fit, remainder_series, Extrapolation, RadialQuadrature};
use crate::invariants::{structural_checks, InvariantReport};
use crate::output::{trajectory_csv, write_json, TOOL_VERSION};
use crate::soliton::{regularized_growth, solve_profile, ProfileSummary};
use crate::stats::LineFit;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "bosegas", version, about = "Particle in a Bose gas: simulation and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for the randomized structural checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-domain run: trajectory CSV plus conservation and bound diagnostics.
    Simulate,
    /// Traveling profiles for the momenta in [soliton].
    Soliton,
    /// Friction from both routes at the speeds in [friction].
    Friction,
    /// Friction-law exponent and Lambda over [lambda_fit].
    LambdaFit,
    /// Remainder series along a ballistic trajectory.
    Remainder,
    /// Sphere kernel and free-evolution decay fits.
    Dispersion,
    /// Consolidated acceptance table from result files.
    Report {
        /// Result JSON files written by this tool.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub dim: usize,
    pub samples: usize,
    pub initial_speed: f64,
    pub summary: RunSummary,
    pub convergence: Option<DriftConvergence>,
    pub scattering: Option<ScatteringSummary>,
    pub pdot_exponent: Option<LineFit>,
    pub invariants: InvariantReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub speed: f64,
    pub eps: Vec<f64>,
    pub norms: Vec<f64>,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonResult {
    pub profiles: Vec<ProfileSummary>,
    pub growth: Vec<GrowthRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrictionRow {
    pub speed: f64,
    pub limit: f64,
    pub extrapolation: Extrapolation,
    /// |extrapolated - limit| / |limit|; NaN below the speed of sound.
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrictionResult {
    pub dim: usize,
    pub n: f64,
    pub rho0: f64,
    pub rows: Vec<FrictionRow>,
}

/// One row of the acceptance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub label: String,
    pub measured: f64,
    pub threshold: String,
    pub pass: bool,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResult {
    pub criteria: Vec<Criterion>,
    pub all_pass: bool,
}

fn load(cli: &Cli) -> Result<Config> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config is required for this subcommand".into()))?;
    Config::load(path)
}

fn quadrature(c: &Config) -> QuadratureSpec {
    c.quadrature.clone().unwrap_or_default()
}

/// Execute a parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    if let Command::Report { inputs } = &cli.command {
        std::fs::create_dir_all(&cli.out)?;
        let rep = report(inputs)?;
        let hash = input_hash(inputs)?;
        write_json(&cli.out.join("report.json"), "report", &hash, &rep)?;
        for c in &rep.criteria {
            println!("{} {:<4} {:<60} measured {:>12.4e}  threshold {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.label, c.measured, c.threshold);
        }
        return Ok(if rep.all_pass { 0 } else { 1 });
    }
    let cfg = load(cli)?;
    let hash = cfg.hash();
    std::fs::create_dir_all(&cli.out)?;
    let out = |name: &str| cli.out.join(name);
    match &cli.command {
        Command::Simulate => {
            let sc = SimConfig::from_config(&cfg)?;
            let rec = simulate(&sc)?;
            std::fs::write(out("trajectory.csv"), trajectory_csv(&rec, &hash))?;
            let res = SimulateResult {
                dim: sc.grid.dim,
                samples: rec.rows.len(),
                initial_speed: sc.initial.p0.iter().map(|v| v * v).sum::<f64>().sqrt(),
                summary: rec.summary.clone(),
                convergence: if sc.monitor.convergence_check { Some(energy_convergence(&sc)?) } else { None },
                scattering: scattering_summary(&rec).unwrap_or(None),
                pdot_exponent: ballistic_diagnostics(&rec).ok().and_then(|b| b.exponent),
                invariants: structural_checks(sc.grid.dim, sc.grid.points, sc.grid.box_length, cli.seed)?,
            };
            write_json(&out("simulate.json"), "simulate", &hash, &res)?;
        }
        Command::Soliton => {
            let spec = Config::require(&cfg.soliton, "soliton")?;
            let grid = Config::require(&cfg.grid, "grid")?.build()?;
            let pot = Config::require(&cfg.potential, "potential")?.build(grid)?;
            let mut res = SolitonResult { profiles: vec![], growth: vec![] };
            for p in &spec.momenta {
                let speed = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                if speed >= 1.0 && spec.eps == 0.0 {
                    if spec.eps_ladder.is_empty() {
                        return Err(Error::SingularMode(format!("|P| = {speed} needs soliton.eps > 0 or an eps_ladder")));
                    }
                    let (norms, factor) = regularized_growth(p, &pot, &spec.eps_ladder, spec.coupling)?;
                    res.growth.push(GrowthRow { speed, eps: spec.eps_ladder.clone(), norms, factor });
                } else {
                    res.profiles.push(solve_profile(p, &pot, spec.eps, spec.coupling)?.summary(&pot));
                }
            }
            write_json(&out("soliton.json"), "soliton", &hash, &res)?;
        }
        Command::Friction => {
            let spec = Config::require(&cfg.friction, "friction")?;
            let pspec = Config::require(&cfg.potential, "potential")?;
            let pot = pspec.radial()?;
            let quad = RadialQuadrature::new(&quadrature(&cfg), &pot)?;
            let rows = spec
                .speeds
                .iter()
                .map(|&s| {
                    let limit = friction_limit_scalar(s, &pot, quad.dim)?;
                    let ex = extrapolated_force(s, &pot, spec.eps, &quad)?;
                    let rel_diff = if limit != 0.0 { ((ex.limit - limit) / limit).abs() } else { f64::NAN };
                    Ok(FrictionRow { speed: s, limit, extrapolation: ex, rel_diff })
                })
                .collect::<Result<Vec<_>>>()?;
            let res = FrictionResult { dim: quad.dim, n: pspec.n, rho0: pspec.rho0, rows };
            write_json(&out("friction.json"), "friction", &hash, &res)?;
        }
        Command::LambdaFit => {
            let spec = Config::require(&cfg.lambda_fit, "lambda_fit")?;
            let pot = Config::require(&cfg.potential, "potential")?.radial()?;
            let quad = RadialQuadrature::new(&quadrature(&cfg), &pot)?;
            write_json(&out("lambda_fit.json"), "lambda-fit", &hash, &lambda_fit(&pot, spec, &quad)?)?;
        }
        Command::Remainder => {
            let spec = Config::require(&cfg.remainder, "remainder")?;
            let pot = Config::require(&cfg.potential, "potential")?.radial()?;
            let quad = RadialQuadrature::new(&quadrature(&cfg), &pot)?;
            write_json(&out("remainder.json"), "remainder", &hash, &remainder_series(spec, &pot, &quad)?)?;
        }
        Command::Dispersion => {
            let spec = Config::require(&cfg.dispersion, "dispersion")?;
            write_json(&out("dispersion.json"), "dispersion", &hash, &dispersion_report(spec)?)?;
        }
        Command::Report { .. } => unreachable!("handled above"),
    }
    std::fs::write(out("effective_config.toml"), format!("# config_hash = \"{hash}\"\n{}", cfg.to_toml()))?;
    Ok(0)
}

/// sha256 over the config hashes of the inputs, in the given order.
fn input_hash(inputs: &[PathBuf]) -> Result<String> {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in inputs {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::Config(e.to_string()))?;
        h.update(v.get("config_hash").and_then(Value::as_str).unwrap_or("").as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

fn num(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for key in path {
        match cur.get(key) {
            Some(x) => cur = x,
            None => return f64::NAN,
        }
    }
    cur.as_f64().unwrap_or(f64::NAN)
}

fn push(out: &mut Vec<Criterion>, id: &str, label: String, measured: f64, threshold: &str, pass: bool, source: &Path) {
    out.push(Criterion {
        id: id.into(),
        label,
        measured,
        threshold: threshold.into(),
        pass: pass && measured.is_finite(),
        source: source.display().to_string(),
    });
}

/// Evaluate every criterion that the given result files bear on.
pub fn report(inputs: &[PathBuf]) -> Result<ReportResult> {
    if inputs.is_empty() {
        return Err(Error::MissingInputs("report needs at least one result file".into()));
    }
    let mut rows = vec![];
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| Error::MissingInputs(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let version = v.get("tool_version").and_then(Value::as_str).unwrap_or("");
        if version != TOOL_VERSION {
            return Err(Error::VersionMismatch(format!("{} was written by version '{version}', this is {TOOL_VERSION}", path.display())));
        }
        let r = &v["result"];
        match v.get("kind").and_then(Value::as_str).unwrap_or("") {
            "lambda-fit" => {
                let n = num(r, &["n"]);
                let want = 3.0 + 2.0 * n;
                let slope = num(r, &["slope"]);
                push(&mut rows, "AC1", format!("friction exponent, n = {n}"), slope, &format!("{want} +- 0.15"), (slope - want).abs() <= 0.15, path);
            }
            "friction" => {
                let rho0 = num(r, &["rho0"]);
                for row in r["rows"].as_array().into_iter().flatten() {
                    let s = num(row, &["speed"]);
                    if s < 1.0 {
                        let m = num(row, &["extrapolation", "limit"]).abs() / rho0;
                        push(&mut rows, "AC2", format!("subsonic friction at |P| = {s}"), m, "<= 1e-8", m <= 1e-8, path);
                    } else {
                        let m = num(row, &["rel_diff"]);
                        push(&mut rows, "AC3", format!("two-route friction at |P| = {s}"), m, "<= 1e-2", m <= 1e-2, path);
                    }
                }
            }
            "dispersion" => {
                for d in r["dims"].as_array().into_iter().flatten() {
                    let dim = num(d, &["dim"]);
                    let slope = num(d, &["decay_fit", "slope"]);
                    if dim == 5.0 || dim == 3.0 {
                        let want = -0.5 * dim;
                        push(
                            &mut rows,
                            "AC4",
                            format!("sup-norm decay exponent, d = {dim}"),
                            slope,
                            &format!("{want} +- 0.1"),
                            (slope - want).abs() <= 0.1,
                            path,
                        );
                    }
                    if dim == 5.0 {
                        let k = num(d, &["kernel_envelope_fit", "slope"]);
                        push(&mut rows, "AC5", "sphere-kernel envelope exponent, d = 5".into(), k, "-2 +- 0.05", (k + 2.0).abs() <= 0.05, path);
                    }
                    if dim == 3.0 {
                        let e = num(d, &["closed_form_error"]);
                        push(&mut rows, "AC5", "K_3 against 4 pi sin(r)/r".into(), e, "<= 1e-10", e <= 1e-10, path);
                    }
                }
            }
            "remainder" => {
                if r["kind"].as_str() == Some("R4") {
                    let s = num(r, &["envelope_fit", "slope"]);
                    push(&mut rows, "AC6", "R4 decay exponent".into(), s, "<= -1.25", s <= -1.25, path);
                }
            }
            "simulate" => {
                let dim = num(r, &["dim"]);
                let drift = num(r, &["summary", "max_rel_drift"]);
                push(&mut rows, "AC7", format!("relative energy drift, d = {dim}"), drift, "<= 1e-6", drift <= 1e-6, path);
                if r["convergence"].is_object() {
                    let ratio = num(r, &["convergence", "ratio"]);
                    push(&mut rows, "AC7", format!("drift ratio under dt halving, d = {dim}"), ratio, "4 +- 1", (ratio - 4.0).abs() <= 1.0, path);
                }
                let margin = num(r, &["summary", "monitor_margin"]);
                push(&mut rows, "AC8", format!("smallest energy-bound margin, d = {dim}"), margin, ">= -1e-8", margin >= -1e-8, path);
                if dim == 2.0 && r["scattering"].is_object() && num(r, &["initial_speed"]) < 1.0 {
                    let slope = num(r, &["scattering", "gap_slope"]);
                    let (mid, fin) = (num(r, &["scattering", "gap_mid"]), num(r, &["scattering", "gap_final"]));
                    push(
                        &mut rows,
                        "AC10",
                        "scattering-gap slope over the final half".into(),
                        slope,
                        "< 0 and final < midpoint",
                        slope < 0.0 && fin < mid,
                        path,
                    );
                    let q = num(r, &["scattering", "defect_final"]) / num(r, &["scattering", "defect_initial"]);
                    push(&mut rows, "AC10", "|X/t - P| final over initial".into(), q, "<= 10", q <= 10.0, path);
                }
                let inv = &r["invariants"];
                for (key, lim, label) in [
                    ("diagonal_round_trip", 1e-12, "diagonalization round trip"),
                    ("amplitude_drift_per_step", 1e-13, "free amplitude drift per step"),
                    ("parity_defect", 1e-12, "force parity"),
                    ("gradient_defect", 1e-6, "force against -dH/dX"),
                ] {
                    let m = num(inv, &[key]);
                    push(&mut rows, "AC11", format!("{label}, d = {dim}"), m, &format!("<= {lim:e}"), m <= lim, path);
                }
                if dim >= 2.0 {
                    let m = num(inv, &["rotation_defect"]);
                    push(&mut rows, "AC11", format!("force rotation, d = {dim}"), m, "<= 1e-12", m <= 1e-12, path);
                }
            }
            "soliton" => {
                for p in r["profiles"].as_array().into_iter().flatten() {
                    let s = num(p, &["speed"]);
                    let res = num(p, &["residual"]);
                    push(&mut rows, "AC9", format!("profile residual at |P| = {s}"), res, "<= 1e-12", res <= 1e-12, path);
                    if p.get("rest_error").is_some() {
                        let e = num(p, &["rest_error"]);
                        push(&mut rows, "AC9", "rest profile against closed form".into(), e, "<= 1e-13", e <= 1e-13, path);
                    }
                }
            }
            other => {
                return Err(Error::Config(format!("{}: unknown result kind '{other}'", path.display())));
            }
        }
    }
    rows.sort_by(|a, b| a.id.len().cmp(&b.id.len()).then(a.id.cmp(&b.id)));
    let all_pass = rows.iter().all(|c| c.pass);
    Ok(ReportResult { criteria: rows, all_pass })
}
