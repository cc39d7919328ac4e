//! Traveling profile S solving M(xi, P) S_hat = c (0, W_hat) mode by mode,
//! and the sup-norm distance of a field to it.

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::potential::Potential;
use crate::spectral::{mode_matrix, ModeMatrix, C64};
use serde::{Deserialize, Serialize};

/// Solved profile with diagnostics.
#[derive(Debug, Clone)]
pub struct SolitonProfile {
    pub field: FieldState,
    pub p: Vec<f64>,
    pub eps: f64,
    pub coupling: f64,
    /// Set for supersonic momenta, which need eps > 0.
    pub regularized: bool,
    /// Largest 2-norm condition number over the lattice.
    pub condition: f64,
}

/// Summary written by the command-line tool.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProfileSummary {
    pub speed: f64,
    pub eps: f64,
    pub coupling: f64,
    pub regularized: bool,
    pub condition: f64,
    pub residual: f64,
    pub l2: f64,
    /// Distance to the closed form at P = 0, eps = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest_error: Option<f64>,
}

fn condition_number(m: &ModeMatrix) -> f64 {
    // singular values of a 2x2 complex matrix from the invariants of M^H M
    let e = &m.entries;
    let fro2: f64 = e.iter().flatten().map(|v| v.norm_sqr()).sum();
    let det = (e[0][0] * e[1][1] - e[0][1] * e[1][0]).norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = (0.5 * (fro2 + disc)).sqrt();
    let smin = det / smax;
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Solve for the profile at momentum `p`. The coupling defaults to sqrt(rho0).
pub fn solve_profile(p: &[f64], pot: &Potential, eps: f64, coupling: Option<f64>) -> Result<SolitonProfile> {
    let g = pot.grid().clone();
    if p.len() != g.dim() {
        return Err(Error::InvalidParameter(format!("momentum has {} components, grid has dimension {}", p.len(), g.dim())));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be non-negative, got {eps}")));
    }
    let speed = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if speed >= 1.0 && eps == 0.0 {
        return Err(Error::SingularMode(format!("|P| = {speed} is not subsonic; supersonic profiles need eps > 0")));
    }
    let c = coupling.unwrap_or(pot.rho0.sqrt());
    let n = g.modes();
    let mut s1 = vec![C64::new(0.0, 0.0); n];
    let mut s2 = vec![C64::new(0.0, 0.0); n];
    let mut cond = 1.0f64;
    for m in 0..n {
        if g.radius(m) == 0.0 || g.is_nyquist(m) {
            continue;
        }
        let mm = mode_matrix(g.xi(m), p, eps);
        let sol = mm.solve([C64::new(0.0, 0.0), pot.w_hat[m] * c])?;
        s1[m] = sol[0];
        s2[m] = sol[1];
        if pot.w_hat[m].norm() > 0.0 {
            cond = cond.max(condition_number(&mm));
        }
    }
    Ok(SolitonProfile { field: FieldState::from_spectra(g, s1, s2)?, p: p.to_vec(), eps, coupling: c, regularized: speed >= 1.0, condition: cond })
}

impl SolitonProfile {
    /// Largest per-mode residual |M S - c (0, W)| relative to max(1, |c W|).
    pub fn residual(&self, pot: &Potential) -> f64 {
        let g = self.field.grid();
        let mut worst = 0.0f64;
        for m in 0..g.modes() {
            if g.radius(m) == 0.0 || g.is_nyquist(m) {
                continue;
            }
            let e = mode_matrix(g.xi(m), &self.p, self.eps).entries;
            let (a, b) = (self.field.h1[m], self.field.h2[m]);
            let r0 = e[0][0] * a + e[0][1] * b;
            let f = pot.w_hat[m] * self.coupling;
            let r1 = e[1][0] * a + e[1][1] * b - f;
            worst = worst.max(r0.norm().max(r1.norm()) / f.norm().max(1.0));
        }
        worst
    }

    /// At P = 0 and eps = 0 the profile is S = (-c W_hat / (1 + |xi|^2), 0).
    /// Returns the largest per-mode deviation from it, or None elsewhere.
    pub fn rest_error(&self, pot: &Potential) -> Option<f64> {
        if self.eps != 0.0 || self.p.iter().any(|v| *v != 0.0) {
            return None;
        }
        let g = self.field.grid();
        let mut worst = 0.0f64;
        for m in 0..g.modes() {
            let want = if g.is_nyquist(m) || g.radius(m) == 0.0 { C64::new(0.0, 0.0) } else { -pot.w_hat[m] * self.coupling / (1.0 + g.radius(m).powi(2)) };
            worst = worst.max((self.field.h1[m] - want).norm()).max(self.field.h2[m].norm());
        }
        Some(worst)
    }

    pub fn l2(&self) -> f64 {
        let g = self.field.grid();
        (g.norm_sq(&self.field.h1) + g.norm_sq(&self.field.h2)).sqrt()
    }

    pub fn summary(&self, pot: &Potential) -> ProfileSummary {
        ProfileSummary {
            speed: self.p.iter().map(|v| v * v).sum::<f64>().sqrt(),
            eps: self.eps,
            coupling: self.coupling,
            regularized: self.regularized,
            condition: self.condition,
            residual: self.residual(pot),
            l2: self.l2(),
            rest_error: self.rest_error(pot),
        }
    }
}

/// sup_x |h(x) - S(x)| over both components.
pub fn scattering_gap(h: &FieldState, s: &FieldState) -> Result<f64> {
    if h.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    let g = h.grid();
    let d1: Vec<C64> = h.h1.iter().zip(&s.h1).map(|(a, b)| a - b).collect();
    let d2: Vec<C64> = h.h2.iter().zip(&s.h2).map(|(a, b)| a - b).collect();
    let p1 = g.inverse_real(&d1);
    let p2 = g.inverse_real(&d2);
    Ok(p1.iter().chain(&p2).map(|v| v.abs()).fold(0.0, f64::max))
}

/// L2 norms of eps-regularized supersonic profiles for a decreasing eps list,
/// with the growth factor last/first.
pub fn regularized_growth(p: &[f64], pot: &Potential, eps_list: &[f64], coupling: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let norms = eps_list
        .iter()
        .map(|&e| {
            if !(e > 0.0) {
                return Err(Error::InvalidParameter("regularization eps must be positive".into()));
            }
            solve_profile(p, pot, e, coupling).map(|s| s.l2())
        })
        .collect::<Result<Vec<_>>>()?;
    let growth = match (norms.first(), norms.last()) {
        (Some(a), Some(b)) if *a > 0.0 => b / a,
        _ => 1.0,
    };
    Ok((norms, growth))
}
