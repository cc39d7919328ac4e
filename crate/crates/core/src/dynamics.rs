//! Time integration of the coupled particle-field system in the moving frame.
//!
//! The field obeys h_hat' = M(xi, P) h_hat - sqrt(rho0) (0, W_hat) and the
//! particle X' = P, P' = 2 sqrt(rho0) <grad W, h1>. The factor 2 makes the
//! force the exact negative gradient of
//! H = |P|^2/2 + |grad h|^2 + |h1|^2 + 2 sqrt(rho0) <W, h1>,
//! so H is conserved by the continuous flow.

use crate::config::{Config, GridSpec, InitialSpec, MonitorSpec, PotentialSpec, TimeSpec};
use crate::error::{Error, Result};
use crate::field::{FieldState, ParticleState};
use crate::grid::SpectralGrid;
use crate::potential::Potential;
use crate::soliton::{scattering_gap, solve_profile};
use crate::spectral::{phi1, propagate_mode, propagate_zero_mode, C64};
use crate::stats::{line_fit, LineFit};
use crate::sum::det_sum_k;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Everything needed for one time-domain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub monitor: MonitorSpec,
}

fn is_multiple(a: f64, b: f64) -> bool {
    let q = a / b;
    (q - q.round()).abs() <= 1e-9 * q.max(1.0)
}

impl SimConfig {
    pub fn from_config(c: &Config) -> Result<SimConfig> {
        let s = SimConfig {
            grid: Config::require(&c.grid, "grid")?.clone(),
            potential: Config::require(&c.potential, "potential")?.clone(),
            initial: Config::require(&c.initial, "initial")?.clone(),
            time: Config::require(&c.time, "time")?.clone(),
            monitor: c.monitor.clone().unwrap_or_default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.time;
        let bad = |m: String| Err(Error::Config(m));
        if !(1..=3).contains(&self.grid.dim) {
            return Err(Error::InvalidDimension(format!("time evolution runs in d = 1, 2, 3; got {}", self.grid.dim)));
        }
        if !(t.dt > 0.0) || !t.dt.is_finite() {
            return bad(format!("time.dt must be positive, got {}", t.dt));
        }
        if !(t.t_final >= 0.0) || !t.t_final.is_finite() {
            return bad(format!("time.t_final must be non-negative, got {}", t.t_final));
        }
        if !(t.sample_interval > 0.0) || !is_multiple(t.sample_interval, t.dt) {
            return bad("time.sample_interval must be a positive multiple of dt".into());
        }
        if !is_multiple(t.t_final, t.dt) {
            return bad("time.t_final must be a multiple of dt".into());
        }
        if self.initial.p0.len() != self.grid.dim {
            return bad(format!("initial.p0 needs {} components", self.grid.dim));
        }
        if let Some(x0) = &self.initial.x0 {
            if x0.len() != self.grid.dim {
                return bad(format!("initial.x0 needs {} components", self.grid.dim));
            }
        }
        let rho = self.potential.rho0;
        if !(rho > 0.0 && rho < 1.0) {
            return bad(format!("potential.rho0 must lie in (0, 1), got {rho}"));
        }
        if !(self.monitor.tolerance >= 0.0) {
            return bad("monitor.tolerance must be non-negative".into());
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.time.t_final / self.time.dt).round() as usize
    }

    pub fn sample_every(&self) -> usize {
        ((self.time.sample_interval / self.time.dt).round() as usize).max(1)
    }
}

/// F_j = 2 sqrt(rho0) L^{-d} sum_xi xi_j Im(conj(W_hat) h1_hat).
pub fn particle_force(h: &FieldState, pot: &Potential) -> Vec<f64> {
    let g = h.grid();
    let d = g.dim();
    let c = 2.0 * pot.rho0.sqrt() * g.lattice_weight();
    let s = det_sum_k::<3, _>(g.modes(), |m| {
        let w = (pot.w_hat[m].conj() * h.h1[m]).im;
        let xi = g.xi(m);
        let mut out = [0.0; 3];
        for a in 0..d.min(3) {
            out[a] = xi[a] * w;
        }
        out
    });
    (0..d).map(|a| c * s[a]).collect()
}

/// Field part of the energy: |grad h|^2 + |h1|^2 + 2 sqrt(rho0) <W, h1>.
fn field_energy(h: &FieldState, pot: &Potential) -> f64 {
    let g = h.grid();
    let sr = pot.rho0.sqrt();
    let s = det_sum_k::<2, _>(g.modes(), |m| {
        let r2 = g.radius(m).powi(2);
        let a = h.h1[m].norm_sqr();
        [r2 * (a + h.h2[m].norm_sqr()) + a, (pot.w_hat[m].conj() * h.h1[m]).re]
    });
    g.lattice_weight() * (s[0] + 2.0 * sr * s[1])
}

pub fn hamiltonian(particle: &ParticleState, h: &FieldState, pot: &Potential) -> f64 {
    0.5 * particle.p.iter().map(|v| v * v).sum::<f64>() + field_energy(h, pot)
}

/// One Strang step: half kick, drift, exact field flow at the mid-step P,
/// half kick. Reference implementation on top of `propagate_mode`.
pub fn strang_step(particle: &ParticleState, h: &FieldState, pot: &Potential, dt: f64) -> (ParticleState, FieldState) {
    let g = h.grid().clone();
    let mut part = particle.clone();
    let f0 = particle_force(h, pot);
    for a in 0..part.p.len() {
        part.p[a] += 0.5 * dt * f0[a];
        part.x[a] += dt * part.p[a];
    }
    let sr = pot.rho0.sqrt();
    let mut out = h.clone();
    for m in 0..g.modes() {
        if g.is_nyquist(m) {
            continue;
        }
        let forcing = [C64::new(0.0, 0.0), -pot.w_hat[m] * sr];
        let v = propagate_mode([h.h1[m], h.h2[m]], forcing, g.xi(m), &part.p, 0.0, dt);
        out.h1[m] = v[0];
        out.h2[m] = v[1];
    }
    g.symmetrize(&mut out.h1);
    g.symmetrize(&mut out.h2);
    let f1 = particle_force(&out, pot);
    for a in 0..part.p.len() {
        part.p[a] += 0.5 * dt * f1[a];
    }
    part.t += dt;
    part.force = f1;
    (part, out)
}

/// Coefficient dt * (e^{i dt w} - 1) / (i dt w), with the series near 0.
#[inline]
fn forcing_coeff(e: C64, w: f64, dt: f64) -> C64 {
    let z = dt * w;
    if z.abs() < 1e-4 {
        let iz = C64::new(0.0, z);
        let mut term = C64::new(1.0, 0.0);
        let mut s = term;
        for k in 1..8 {
            term *= iz / (k as f64 + 1.0);
            s += term;
        }
        s * dt
    } else {
        (e - 1.0) / C64::new(0.0, w)
    }
}

/// Fast stepper with per-mode data cached for a fixed step size.
pub struct Simulation {
    pot: Potential,
    grid: Arc<SpectralGrid>,
    pub field: FieldState,
    pub particle: ParticleState,
    dt: f64,
    canon: Vec<usize>,
    radius: Vec<f64>,
    s: Vec<f64>,
    phi: Vec<f64>,
    gw: Vec<C64>,
    rot: Vec<C64>,
    buf: Vec<(C64, C64)>,
    force: Option<Vec<f64>>,
}

impl Simulation {
    pub fn new(pot: Potential, field: FieldState, particle: ParticleState, dt: f64) -> Result<Self> {
        let grid = pot.grid().clone();
        if field.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        if particle.p.len() != grid.dim() || particle.x.len() != grid.dim() {
            return Err(Error::InvalidParameter("particle dimension differs from grid".into()));
        }
        let sr = pot.rho0.sqrt();
        let canon: Vec<usize> = (0..grid.modes()).filter(|&m| !grid.is_nyquist(m) && grid.radius(m) > 0.0 && grid.partner(m) > m).collect();
        let radius: Vec<f64> = canon.iter().map(|&m| grid.radius(m)).collect();
        let s = radius.iter().map(|r| (1.0 + r * r).sqrt()).collect();
        let phi = radius.iter().map(|&r| phi1(r)).collect();
        let gw = canon.iter().map(|&m| -pot.w_hat[m] * sr).collect();
        let n = canon.len();
        let mut sim = Simulation {
            pot,
            grid,
            field,
            particle,
            dt,
            canon,
            radius,
            s,
            phi,
            gw,
            rot: vec![],
            buf: vec![(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); n],
            force: None,
        };
        sim.set_dt(dt);
        Ok(sim)
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid.build()?;
        let pot = cfg.potential.build(grid.clone())?;
        let mut field = match &cfg.initial.beta0 {
            Some(p) => FieldState::gaussian(grid.clone(), p)?,
            None => FieldState::zeros(grid.clone()),
        };
        if cfg.initial.dressed {
            let s = solve_profile(&cfg.initial.p0, &pot, 0.0, None)?.field;
            field.h1.iter_mut().zip(&s.h1).for_each(|(a, b)| *a += b);
            field.h2.iter_mut().zip(&s.h2).for_each(|(a, b)| *a += b);
        }
        let x0 = cfg.initial.x0.clone().unwrap_or_else(|| vec![0.0; cfg.grid.dim]);
        let particle = ParticleState::new(x0, cfg.initial.p0.clone());
        Simulation::new(pot, field, particle, cfg.time.dt)
    }

    /// Change the step size; negative values integrate backwards.
    pub fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
        self.rot = self.phi.iter().map(|f| C64::from_polar(1.0, dt * f)).collect();
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    pub fn force(&mut self) -> Vec<f64> {
        if self.force.is_none() {
            self.force = Some(particle_force(&self.field, &self.pot));
        }
        self.force.clone().expect("cached")
    }

    pub fn hamiltonian(&self) -> f64 {
        hamiltonian(&self.particle, &self.field, &self.pot)
    }

    fn field_step(&mut self, p: &[f64]) {
        let dt = self.dt;
        let g = &self.grid;
        let h1 = &self.field.h1;
        let h2 = &self.field.h2;
        let (canon, radius, s, phi, gw, rot) = (&self.canon, &self.radius, &self.s, &self.phi, &self.gw, &self.rot);
        self.buf.par_iter_mut().enumerate().for_each(|(c, out)| {
            let m = canon[c];
            let pxi: f64 = g.xi(m).iter().zip(p).map(|(k, q)| k * q).sum();
            let e = C64::from_polar(1.0, dt * pxi);
            let ep = e * rot[c];
            let em = e * rot[c].conj();
            let u = 0.5 / radius[c];
            let v = C64::new(0.0, -0.5 / s[c]);
            let ap = h1[m] * u + h2[m] * v;
            let am = h1[m] * u - h2[m] * v;
            let gp = v * gw[c];
            let ap = ep * ap + forcing_coeff(ep, pxi + phi[c], dt) * gp;
            let am = em * am - forcing_coeff(em, pxi - phi[c], dt) * gp;
            *out = ((ap + am) * radius[c], C64::new(0.0, s[c]) * (ap - am));
        });
        for (c, &m) in self.canon.iter().enumerate() {
            let (a, b) = self.buf[c];
            self.field.h1[m] = a;
            self.field.h2[m] = b;
            let pm = g.partner(m);
            self.field.h1[pm] = a.conj();
            self.field.h2[pm] = b.conj();
        }
        let z = g.zero_mode();
        let forcing = [C64::new(0.0, 0.0), -self.pot.w_hat[z] * self.pot.rho0.sqrt()];
        let v = propagate_zero_mode([self.field.h1[z], self.field.h2[z]], forcing, 0.0, dt);
        self.field.h1[z] = C64::new(v[0].re, 0.0);
        self.field.h2[z] = C64::new(v[1].re, 0.0);
    }

    /// Advance by one Strang step.
    pub fn step(&mut self) {
        let dt = self.dt;
        let f0 = self.force();
        let d = self.particle.p.len();
        for a in 0..d {
            self.particle.p[a] += 0.5 * dt * f0[a];
            self.particle.x[a] += dt * self.particle.p[a];
        }
        let p = self.particle.p.clone();
        self.field_step(&p);
        let f1 = particle_force(&self.field, &self.pot);
        for a in 0..d {
            self.particle.p[a] += 0.5 * dt * f1[a];
        }
        self.particle.t += dt;
        self.particle.force = f1.clone();
        self.force = Some(f1);
    }
}

/// One sampled row of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub pdot: Vec<f64>,
    pub hamiltonian: f64,
    pub re_beta_l2: f64,
    pub grad_im_beta_l2: f64,
    /// NaN when the profile is not defined (supersonic) or disabled.
    pub soliton_gap: f64,
}

/// Conservation and bound diagnostics of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub h0: f64,
    pub max_rel_drift: f64,
    pub w_l2_sq: f64,
    pub speed_bound: f64,
    pub max_speed: f64,
    pub re_bound: f64,
    pub max_re_l2: f64,
    pub grad_bound: f64,
    pub max_grad_im: f64,
    /// Smallest bound minus value over the three monitors and all samples.
    pub monitor_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub dim: usize,
    pub rows: Vec<TrajectoryRow>,
    pub config: SimConfig,
    pub summary: RunSummary,
}

fn norms_for_row(h: &FieldState) -> (f64, f64) {
    let g = h.grid();
    let re = g.norm_sq(&h.h1).sqrt();
    let w = g.lattice_weight();
    let grad = (w * crate::sum::det_sum(g.modes(), |m| g.radius(m).powi(2) * h.h2[m].norm_sqr())).sqrt();
    (re, grad)
}

/// Run a configuration and return the sampled trajectory.
pub fn simulate(cfg: &SimConfig) -> Result<TrajectoryRecord> {
    let mut sim = Simulation::from_config(cfg)?;
    let sr = cfg.potential.rho0.sqrt();
    let h0 = sim.hamiltonian();
    let w2 = sim.pot.w_norm_sq();
    let speed_bound = (2.0 * h0 + sr * w2).max(0.0).sqrt();
    let re_bound = ((h0 + sr * w2) / (1.0 - sr)).max(0.0).sqrt();
    let grad_bound = (h0 + sr * w2).max(0.0).sqrt();
    let tol = cfg.monitor.tolerance;
    let steps = cfg.steps();
    let every = cfg.sample_every();
    let mut rows = Vec::with_capacity(steps / every + 1);
    let mut summary = RunSummary {
        h0,
        max_rel_drift: 0.0,
        w_l2_sq: w2,
        speed_bound,
        max_speed: 0.0,
        re_bound,
        max_re_l2: 0.0,
        grad_bound,
        max_grad_im: 0.0,
        monitor_margin: f64::INFINITY,
    };
    for step in 0..=steps {
        if step % every == 0 {
            let t = step as f64 * cfg.time.dt;
            if !sim.field.is_finite() || sim.particle.p.iter().chain(&sim.particle.x).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("state became non-finite by t = {t}")));
            }
            let h = sim.hamiltonian();
            let pdot = sim.force();
            let (re, grad) = norms_for_row(&sim.field);
            let speed = sim.particle.speed();
            let gap = if cfg.monitor.soliton_gap && speed < 1.0 {
                let s = solve_profile(&sim.particle.p, &sim.pot, 0.0, None)?;
                scattering_gap(&sim.field, &s.field)?
            } else {
                f64::NAN
            };
            summary.max_rel_drift = summary.max_rel_drift.max((h - h0).abs() / h0.abs().max(1.0));
            summary.max_speed = summary.max_speed.max(speed);
            summary.max_re_l2 = summary.max_re_l2.max(re);
            summary.max_grad_im = summary.max_grad_im.max(grad);
            let margin = (speed_bound - speed).min(re_bound - re).min(grad_bound - grad);
            summary.monitor_margin = summary.monitor_margin.min(margin);
            if cfg.monitor.enabled {
                for (name, val, bound) in [("|P|", speed, speed_bound), ("|Re beta|_2", re, re_bound), ("|grad Im beta|_2", grad, grad_bound)] {
                    if val > bound + tol {
                        return Err(Error::MonitorViolation(format!("{name} = {val:.12e} exceeds energy bound {bound:.12e} at t = {t}")));
                    }
                }
            }
            rows.push(TrajectoryRow {
                t,
                x: sim.particle.x.clone(),
                p: sim.particle.p.clone(),
                pdot,
                hamiltonian: h,
                re_beta_l2: re,
                grad_im_beta_l2: grad,
                soliton_gap: gap,
            });
        }
        if step < steps {
            sim.step();
            if sim.particle.p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("momentum became non-finite at step {}", step + 1)));
            }
        }
    }
    Ok(TrajectoryRecord { dim: cfg.grid.dim, rows, config: cfg.clone(), summary })
}

/// Energy drift at dt and dt/2 and their ratio (about 4 for a second-order scheme).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConvergence {
    pub drift: f64,
    pub drift_half: f64,
    pub ratio: f64,
}

pub fn energy_convergence(cfg: &SimConfig) -> Result<DriftConvergence> {
    let mut quiet = cfg.clone();
    quiet.monitor.soliton_gap = false;
    let a = simulate(&quiet)?.summary.max_rel_drift;
    quiet.time.dt *= 0.5;
    let b = simulate(&quiet)?.summary.max_rel_drift;
    Ok(DriftConvergence { drift: a, drift_half: b, ratio: a / b })
}

/// Asymptotic-motion diagnostics of a recorded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallisticDiagnostics {
    /// (t, |X(t)/t - P(t)|) for t > 0.
    pub velocity_defect: Vec<(f64, f64)>,
    /// (t, |dP/dt|) by finite differences.
    pub pdot: Vec<(f64, f64)>,
    /// Fit of log|dP/dt| against log(1 + t) over the second half.
    pub exponent: Option<LineFit>,
    /// Set when |dP/dt| vanishes somewhere in the fit window.
    pub degenerate: bool,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn ballistic_diagnostics(rec: &TrajectoryRecord) -> Result<BallisticDiagnostics> {
    let rows = &rec.rows;
    let n = rows.len();
    if n < 20 {
        return Err(Error::TooFewSamples { needed: 20, have: n });
    }
    let velocity_defect = rows
        .iter()
        .filter(|r| r.t > 0.0)
        .map(|r| {
            let v: Vec<f64> = r.x.iter().map(|x| x / r.t).collect();
            (r.t, dist(&v, &r.p))
        })
        .collect();
    let pdot: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (rows[i].t, dist(&rows[b].p, &rows[a].p) / (rows[b].t - rows[a].t))
        })
        .collect();
    let window = &pdot[n / 2..];
    let scale = rows.iter().map(|r| r.p.iter().map(|v| v.abs()).fold(0.0, f64::max)).fold(1.0, f64::max);
    let degenerate = window.iter().any(|(_, v)| !(*v > 1e-14 * scale));
    let exponent = if degenerate {
        None
    } else {
        let x: Vec<f64> = window.iter().map(|(t, _)| (1.0 + t).ln()).collect();
        let y: Vec<f64> = window.iter().map(|(_, v)| v.ln()).collect();
        Some(line_fit(&x, &y)?)
    };
    Ok(BallisticDiagnostics { velocity_defect, pdot, exponent, degenerate })
}

/// Late-time behavior of a subsonic run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSummary {
    pub gap_mid: f64,
    pub gap_final: f64,
    /// Slope of a line fit of the gap against t over the final half.
    pub gap_slope: f64,
    /// |X(t)/t - P(t)| at the first sample with t > 0 and at the end.
    pub defect_initial: f64,
    pub defect_final: f64,
}

/// None when the gap is undefined somewhere in the final half.
pub fn scattering_summary(rec: &TrajectoryRecord) -> Result<Option<ScatteringSummary>> {
    let rows = &rec.rows;
    let n = rows.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, have: n });
    }
    let half = &rows[(n - 1) / 2..];
    if half.iter().any(|r| r.soliton_gap.is_nan()) {
        return Ok(None);
    }
    let t: Vec<f64> = half.iter().map(|r| r.t).collect();
    let g: Vec<f64> = half.iter().map(|r| r.soliton_gap).collect();
    let defect = |r: &TrajectoryRow| {
        let v: Vec<f64> = r.x.iter().map(|x| x / r.t).collect();
        dist(&v, &r.p)
    };
    let first = rows.iter().find(|r| r.t > 0.0).expect("n >= 5");
    Ok(Some(ScatteringSummary {
        gap_mid: g[0],
        gap_final: g[g.len() - 1],
        gap_slope: line_fit(&t, &g)?.slope,
        defect_initial: defect(first),
        defect_final: defect(&rows[n - 1]),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Splitting;
    use crate::field::GaussianPulse;
    use crate::grid::make_grid;
    use crate::potential::{build_potential, VProfile};

    fn cfg1d() -> SimConfig {
        SimConfig {
            grid: GridSpec { dim: 1, points: 256, box_length: 64.0 },
            potential: PotentialSpec { n: 1.0, width: 1.0, rho0: 0.05 },
            initial: InitialSpec { p0: vec![0.5], x0: None, beta0: Some(GaussianPulse { amplitude: 0.1, width: 2.0, phase: 0.3 }), dressed: false },
            time: TimeSpec { dt: 0.01, t_final: 2.0, sample_interval: 0.1, splitting: Splitting::Strang },
            monitor: MonitorSpec::default(),
        }
    }

    #[test]
    fn force_and_energy_of_trivial_states() {
        let g = Arc::new(make_grid(1, 64, 30.0).unwrap());
        let pot = build_potential(1.0, &VProfile::Gaussian { width: 1.0 }, 0.1, g.clone()).unwrap();
        let h = FieldState::zeros(g.clone());
        assert_eq!(particle_force(&h, &pot), vec![0.0]);
        assert_eq!(hamiltonian(&ParticleState::new(vec![0.0], vec![0.0]), &h, &pot), 0.0);
        assert_eq!(hamiltonian(&ParticleState::new(vec![0.0], vec![1.0]), &h, &pot), 0.5);
        // even real h1 against even W: odd integrand
        let even = FieldState::gaussian(g, &GaussianPulse { amplitude: 1.0, width: 1.0, phase: 0.0 }).unwrap();
        assert!(particle_force(&even, &pot)[0].abs() < 1e-16);
    }

    #[test]
    fn force_matches_physical_quadrature() {
        let g = Arc::new(make_grid(1, 256, 40.0).unwrap());
        let pot = build_potential(1.0, &VProfile::Gaussian { width: 1.0 }, 0.1, g.clone()).unwrap();
        let re = g.sample(|x| (-(x[0] - 0.7).powi(2) / 3.0).exp());
        let h = FieldState::from_physical(g.clone(), &re, &vec![0.0; 256]).unwrap();
        // W = -V'' for the unit-mass Gaussian, so W' = (x^3 - 3x) V
        let wp = |x: f64| (x.powi(3) - 3.0 * x) * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let direct: f64 = (0..256)
            .map(|j| {
                let x = g.point(j)[0];
                wp(x) * re[j]
            })
            .sum::<f64>()
            * g.dx();
        let want = 2.0 * 0.1f64.sqrt() * direct;
        let got = particle_force(&h, &pot)[0];
        assert!((got - want).abs() <= 1e-10 * want.abs(), "{got} {want}");
    }

    #[test]
    fn gradient_check() {
        let g = Arc::new(make_grid(2, 32, 24.0).unwrap());
        let pot = build_potential(1.0, &VProfile::Gaussian { width: 1.0 }, 0.1, g.clone()).unwrap();
        let re = g.sample(|x| (-(x[0] - 0.5).powi(2) - (x[1] + 0.3).powi(2) / 2.0).exp());
        let im = g.sample(|x| 0.3 * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp());
        let h = FieldState::from_physical(g.clone(), &re, &im).unwrap();
        let part = ParticleState::new(vec![0.0; 2], vec![0.2, 0.1]);
        let f = particle_force(&h, &pot);
        let d = 1e-5;
        for a in 0..2 {
            let mut e = [0.0; 2];
            e[a] = d;
            let hp = hamiltonian(&part, &h, &pot.shifted(&e));
            e[a] = -d;
            let hm = hamiltonian(&part, &h, &pot.shifted(&e));
            let grad = (hp - hm) / (2.0 * d);
            assert!((f[a] + grad).abs() <= 1e-6 * f[a].abs(), "{} {}", f[a], -grad);
        }
    }

    #[test]
    fn fast_step_matches_reference_step() {
        let cfg = cfg1d();
        let mut sim = Simulation::from_config(&cfg).unwrap();
        let (p0, h0) = (sim.particle.clone(), sim.field.clone());
        let (p1, h1) = strang_step(&p0, &h0, sim.potential(), cfg.time.dt);
        sim.step();
        assert!((sim.particle.p[0] - p1.p[0]).abs() < 1e-15);
        for m in 0..h1.h1.len() {
            assert!((sim.field.h1[m] - h1.h1[m]).norm() < 1e-14);
            assert!((sim.field.h2[m] - h1.h2[m]).norm() < 1e-14);
        }
    }

    #[test]
    fn free_particle_moves_ballistically() {
        let mut cfg = cfg1d();
        cfg.initial.beta0 = None;
        let mut sim = Simulation::from_config(&cfg).unwrap();
        sim.pot = sim.pot.scaled(0.0);
        sim.gw.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for _ in 0..200 {
            sim.step();
        }
        assert_eq!(sim.particle.p[0], 0.5);
        assert!((sim.particle.x[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn time_reversal_without_coupling() {
        let mut cfg = cfg1d();
        cfg.grid = GridSpec { dim: 2, points: 32, box_length: 30.0 };
        cfg.initial.p0 = vec![0.4, -0.2];
        let mut sim = Simulation::from_config(&cfg).unwrap();
        sim.pot = sim.pot.scaled(0.0);
        sim.gw.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let start = sim.field.clone();
        for _ in 0..100 {
            sim.step();
        }
        sim.set_dt(-cfg.time.dt);
        for _ in 0..100 {
            sim.step();
        }
        let err = start.h1.iter().zip(&sim.field.h1).chain(start.h2.iter().zip(&sim.field.h2)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert!(sim.particle.x.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn simulate_row_count_and_monotone_time() {
        let rec = simulate(&cfg1d()).unwrap();
        assert_eq!(rec.rows.len(), 21);
        assert!(rec.rows.windows(2).all(|w| w[1].t > w[0].t));
        assert!(rec.summary.monitor_margin > 0.0);
        assert!(rec.rows.iter().all(|r| r.soliton_gap.is_finite()));
    }

    #[test]
    fn validation_errors() {
        let mut c = cfg1d();
        c.time.dt = -1.0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = cfg1d();
        c.time.sample_interval = 0.015;
        assert!(c.validate().is_err());
        let mut c = cfg1d();
        c.initial.p0 = vec![0.1, 0.2];
        assert!(c.validate().is_err());
    }

    fn synthetic(pf: impl Fn(f64) -> f64) -> TrajectoryRecord {
        let cfg = cfg1d();
        let rows = (0..=200)
            .map(|i| {
                let t = i as f64 * 0.5;
                TrajectoryRow {
                    t,
                    x: vec![t * pf(t)],
                    p: vec![pf(t)],
                    pdot: vec![0.0],
                    hamiltonian: 0.0,
                    re_beta_l2: 0.0,
                    grad_im_beta_l2: 0.0,
                    soliton_gap: f64::NAN,
                }
            })
            .collect();
        let summary = simulate(&SimConfig { time: TimeSpec { t_final: 0.0, ..cfg.time.clone() }, ..cfg.clone() }).unwrap().summary;
        TrajectoryRecord { dim: 1, rows, config: cfg, summary }
    }

    #[test]
    fn ballistic_synthetic_records() {
        let rec = synthetic(|_| 0.7);
        let d = ballistic_diagnostics(&rec).unwrap();
        assert!(d.velocity_defect.iter().all(|(_, v)| *v < 1e-15));
        assert!(d.degenerate && d.exponent.is_none());

        let rec = synthetic(|t| 0.5 + 2.0 * (1.0 - (1.0 + t).powf(-0.5)));
        let fit = ballistic_diagnostics(&rec).unwrap().exponent.unwrap();
        assert!((fit.slope + 1.5).abs() <= 0.02, "{}", fit.slope);
    }

    #[test]
    fn too_few_samples() {
        let mut rec = synthetic(|_| 0.7);
        rec.rows.truncate(10);
        assert!(matches!(ballistic_diagnostics(&rec), Err(Error::TooFewSamples { .. })));
    }
}
