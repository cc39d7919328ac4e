//! Structural checks of the discretization: eigenbasis round trips,
//! conservation of diagonal amplitudes under the free flow, symmetry of the
//! particle force, and the force as minus the X-gradient of the energy.

use crate::dynamics::{hamiltonian, particle_force};
use crate::error::{Error, Result};
use crate::field::{FieldState, ParticleState};
use crate::grid::SpectralGrid;
use crate::potential::{build_potential, VProfile};
use crate::spectral::{from_diagonal, propagate_mode, to_diagonal, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub dim: usize,
    /// max |h - from_diagonal(to_diagonal(h))| / max |h|.
    pub diagonal_round_trip: f64,
    /// Largest relative change of a diagonal amplitude over one free step.
    pub amplitude_drift_per_step: f64,
    /// |F(h(-x)) + F(h)| / |F(h)|.
    pub parity_defect: f64,
    /// |F(h(R^{-1}x)) - R F(h)| / |F(h)| for a quarter turn; NaN in d = 1.
    pub rotation_defect: f64,
    /// Largest |F_j + dH/dX_j| / |F| from central differences.
    pub gradient_defect: f64,
}

fn random_field(grid: &Arc<SpectralGrid>, rng: &mut ChaCha8Rng) -> Result<FieldState> {
    let n = grid.modes();
    let re: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let im: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FieldState::from_physical(grid.clone(), &re, &im)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Run every check on a grid of `points` per side and box `length`.
pub fn structural_checks(dim: usize, points: usize, length: f64, seed: u64) -> Result<InvariantReport> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidDimension(format!("structural checks run in d = 1, 2, 3; got {dim}")));
    }
    let grid = Arc::new(SpectralGrid::new(dim, points, length)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let h = random_field(&grid, &mut rng)?;
    let scale = h.h1.iter().chain(&h.h2).map(|z| z.norm()).fold(0.0, f64::max);
    let (b1, b2) = from_diagonal(&to_diagonal(&h.h1, &h.h2, &grid));
    let diagonal_round_trip = h.h1.iter().zip(&b1).chain(h.h2.iter().zip(&b2)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;

    let before = to_diagonal(&h.h1, &h.h2, &grid);
    let zero = [C64::new(0.0, 0.0); 2];
    let p = vec![0.0; dim];
    let mut s1 = h.h1.clone();
    let mut s2 = h.h2.clone();
    for m in 0..grid.modes() {
        if grid.radius(m) == 0.0 {
            continue;
        }
        let o = propagate_mode([h.h1[m], h.h2[m]], zero, grid.xi(m), &p, 0.0, 0.05);
        s1[m] = o[0];
        s2[m] = o[1];
    }
    let after = to_diagonal(&s1, &s2, &grid);
    let mut amplitude_drift_per_step = 0.0f64;
    for m in 0..grid.modes() {
        for (a, b) in [(before.a_plus[m], after.a_plus[m]), (before.a_minus[m], after.a_minus[m])] {
            if a.norm() > 0.0 {
                amplitude_drift_per_step = amplitude_drift_per_step.max((b.norm() - a.norm()).abs() / a.norm());
            }
        }
    }

    let pot = build_potential(1.0, &VProfile::Gaussian { width: 1.0 }, 0.1, grid.clone())?;
    let shape = |x: &[f64]| -> (f64, f64) {
        let a: f64 = x.iter().enumerate().map(|(j, v)| (v - 0.4 + 0.3 * j as f64).powi(2)).sum();
        let b: f64 = x.iter().enumerate().map(|(j, v)| (v + 0.2 * (j + 1) as f64).powi(2)).sum();
        ((-0.5 * a).exp() * (1.0 + 0.3 * x[0]), 0.4 * (-0.25 * b).exp())
    };
    let build = |map: &dyn Fn(&[f64]) -> Vec<f64>| -> Result<FieldState> {
        let re = grid.sample(|x| shape(&map(x)).0);
        let im = grid.sample(|x| shape(&map(x)).1);
        FieldState::from_physical(grid.clone(), &re, &im)
    };
    let base = build(&|x| x.to_vec())?;
    let f = particle_force(&base, &pot);
    let fn_ = norm(&f);
    let refl = particle_force(&build(&|x| x.iter().map(|v| -v).collect())?, &pot);
    let parity_defect = norm(&f.iter().zip(&refl).map(|(a, b)| a + b).collect::<Vec<_>>()) / fn_;
    let rotation_defect = if dim >= 2 {
        // R (x0, x1) = (-x1, x0); the rotated field is h(R^{-1} x)
        let rot = particle_force(
            &build(&|x| {
                let mut y = x.to_vec();
                y[0] = x[1];
                y[1] = -x[0];
                y
            })?,
            &pot,
        );
        let mut rf = f.clone();
        rf[0] = -f[1];
        rf[1] = f[0];
        norm(&rot.iter().zip(&rf).map(|(a, b)| a - b).collect::<Vec<_>>()) / fn_
    } else {
        f64::NAN
    };

    let part = ParticleState::new(vec![0.0; dim], vec![0.2; dim]);
    let d = 1e-5;
    let mut gradient_defect = 0.0f64;
    for a in 0..dim {
        let mut e = vec![0.0; dim];
        e[a] = d;
        let hp = hamiltonian(&part, &base, &pot.shifted(&e));
        e[a] = -d;
        let hm = hamiltonian(&part, &base, &pot.shifted(&e));
        gradient_defect = gradient_defect.max((f[a] + (hp - hm) / (2.0 * d)).abs() / fn_);
    }
    Ok(InvariantReport { dim, diagonal_round_trip, amplitude_drift_per_step, parity_defect, rotation_defect, gradient_defect })
}
