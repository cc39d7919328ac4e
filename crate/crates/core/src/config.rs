//! Run configuration: a single TOML document with one table per concern.
//! Every subcommand reads the tables it needs and ignores the rest.

use crate::error::{Error, Result};
use crate::field::GaussianPulse;
use crate::grid::SpectralGrid;
use crate::potential::{build_potential, Potential, RadialPotential, VProfile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub box_length: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<SpectralGrid>> {
        Ok(Arc::new(SpectralGrid::new(self.dim, self.points, self.box_length)?))
    }
}

/// Gaussian V of width `width`, Fermi exponent `n`, friction constant `rho0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub n: f64,
    #[serde(default = "one")]
    pub width: f64,
    pub rho0: f64,
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn build(&self, grid: Arc<SpectralGrid>) -> Result<Potential> {
        build_potential(self.n, &VProfile::Gaussian { width: self.width }, self.rho0, grid)
    }

    pub fn radial(&self) -> Result<RadialPotential> {
        RadialPotential::new(self.n, self.width, self.rho0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub p0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Absent means beta0 = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<GaussianPulse>,
    /// Start from the traveling profile at p0, with beta0 added on top.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dressed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    #[default]
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    #[serde(default)]
    pub splitting: Splitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Compute the distance to the traveling profile at each sample.
    #[serde(default = "yes")]
    pub soliton_gap: bool,
    /// Also run at dt/2 and report the energy-drift ratio.
    #[serde(default)]
    pub convergence_check: bool,
}

fn yes() -> bool {
    true
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for MonitorSpec {
    fn default() -> Self {
        MonitorSpec { enabled: true, tolerance: 1e-8, soliton_gap: true, convergence_check: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSpec {
    /// Momenta to solve for, each of length grid.dim.
    pub momenta: Vec<Vec<f64>>,
    #[serde(default)]
    pub eps: f64,
    /// Forcing constant c; sqrt(rho0) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Optional eps ladder for supersonic momenta.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps_ladder: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "five")]
    pub dim: usize,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default = "order")]
    pub order: usize,
    #[serde(default = "angular")]
    pub angular_order: usize,
    #[serde(default = "panels")]
    pub max_panels: usize,
    #[serde(default = "min_panel")]
    pub min_panel: f64,
}

fn five() -> usize {
    5
}
fn order() -> usize {
    12
}
fn angular() -> usize {
    24
}
fn panels() -> usize {
    200_000
}
fn min_panel() -> f64 {
    1e-9
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { dim: 5, r_max: None, order: 12, angular_order: 24, max_panels: 200_000, min_panel: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionSpec {
    /// Speeds |P| at which both routes are evaluated.
    pub speeds: Vec<f64>,
    /// Largest eps of the three-level ladder eps, eps/2, eps/4.
    #[serde(default = "eps0")]
    pub eps: f64,
}

fn eps0() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaFitSpec {
    /// Range of |P| - 1, sampled log-uniformly.
    pub excess_min: f64,
    pub excess_max: f64,
    #[serde(default = "samples")]
    pub samples: usize,
    /// Range of |P| over which inf Lambda is reported.
    #[serde(default = "lam_lo")]
    pub lambda_speed_min: f64,
    #[serde(default = "lam_hi")]
    pub lambda_speed_max: f64,
    /// Speed for the cross-check against the eps-extrapolated route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check_speed: Option<f64>,
    #[serde(default = "eps0")]
    pub cross_check_eps: f64,
}

fn samples() -> usize {
    16
}
fn lam_lo() -> f64 {
    1.05
}
fn lam_hi() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RemainderKind {
    R1,
    R2,
    R4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemainderSpec {
    pub kind: RemainderKind,
    /// Ballistic trajectory X(t) = X(0) + t P.
    pub speed: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "samples")]
    pub samples: usize,
    #[serde(default = "rem_eps")]
    pub eps: f64,
    /// Initial field for R1 and R2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<GaussianPulse>,
    /// Momentum at time 0 for R2 (defaults to `speed`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_speed: Option<f64>,
}

fn rem_eps() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSpec {
    pub dims: Vec<usize>,
    /// Gaussian initial datum exp(-r^2 / (2 width^2)).
    #[serde(default = "one")]
    pub width: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "samples")]
    pub samples: usize,
    /// Envelope-fit range for the sphere kernel.
    #[serde(default = "kr_lo")]
    pub kernel_r_min: f64,
    #[serde(default = "kr_hi")]
    pub kernel_r_max: f64,
}

fn kr_lo() -> f64 {
    10.0
}
fn kr_hi() -> f64 {
    1000.0
}

/// The whole configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friction: Option<FrictionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_fit: Option<LambdaFitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remainder: Option<RemainderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSpec>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML text of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// sha256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section.as_ref().ok_or_else(|| Error::Config(format!("missing [{name}] table")))
    }
}
