//! Field and particle state in the moving frame.

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::spectral::apply_u_power;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// h = (Re beta, Im beta) stored as two Hermitian spectra.
#[derive(Debug, Clone)]
pub struct FieldState {
    grid: Arc<SpectralGrid>,
    pub h1: Vec<Complex64>,
    pub h2: Vec<Complex64>,
}

/// Complex Gaussian A e^{i theta} exp(-|x - c|^2 / (2 w^2)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub phase: f64,
}

impl GaussianPulse {
    /// Transform of the real profile exp(-r^2/(2 w^2)) in dimension d.
    pub fn profile_hat(&self, r: f64, dim: usize) -> f64 {
        let w2 = self.width * self.width;
        (2.0 * std::f64::consts::PI * w2).powf(0.5 * dim as f64) * (-0.5 * w2 * r * r).exp()
    }
}

impl FieldState {
    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let n = grid.modes();
        FieldState { grid, h1: vec![Complex64::new(0.0, 0.0); n], h2: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// From spectra; Nyquist modes are zeroed and Hermitian symmetry enforced.
    pub fn from_spectra(grid: Arc<SpectralGrid>, mut h1: Vec<Complex64>, mut h2: Vec<Complex64>) -> Result<Self> {
        if h1.len() != grid.modes() || h2.len() != grid.modes() {
            return Err(Error::GridMismatch);
        }
        for h in [&mut h1, &mut h2] {
            grid.zero_nyquist(h);
            grid.symmetrize(h);
        }
        Ok(FieldState { grid, h1, h2 })
    }

    pub fn from_physical(grid: Arc<SpectralGrid>, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != grid.modes() || im.len() != grid.modes() {
            return Err(Error::GridMismatch);
        }
        let h1 = grid.forward(re);
        let h2 = grid.forward(im);
        Self::from_spectra(grid, h1, h2)
    }

    /// Gaussian pulse centered on the particle.
    pub fn gaussian(grid: Arc<SpectralGrid>, pulse: &GaussianPulse) -> Result<Self> {
        if !(pulse.width > 0.0) {
            return Err(Error::InvalidParameter(format!("pulse width must be positive, got {}", pulse.width)));
        }
        let w2 = pulse.width * pulse.width;
        let prof = grid.sample(|x| (-0.5 * x.iter().map(|c| c * c).sum::<f64>() / w2).exp());
        let (c, s) = (pulse.amplitude * pulse.phase.cos(), pulse.amplitude * pulse.phase.sin());
        let re: Vec<f64> = prof.iter().map(|v| c * v).collect();
        let im: Vec<f64> = prof.iter().map(|v| s * v).collect();
        Self::from_physical(grid, &re, &im)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Physical components (h1, h2).
    pub fn physical(&self) -> (Vec<f64>, Vec<f64>) {
        (self.grid.inverse_real(&self.h1), self.grid.inverse_real(&self.h2))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.h1.iter_mut().chain(s.h2.iter_mut()).for_each(|v| *v *= c);
        s
    }

    /// Largest violation of h(-xi) = conj h(xi), over both components.
    pub fn reality_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for h in [&self.h1, &self.h2] {
            for m in 0..self.grid.modes() {
                d = d.max((h[m] - h[self.grid.partner(m)].conj()).norm());
            }
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.h1.iter().chain(&self.h2).all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Particle state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub t: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub force: Vec<f64>,
}

impl ParticleState {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Self {
        let d = p.len();
        ParticleState { t: 0.0, x, p, force: vec![0.0; d] }
    }

    pub fn speed(&self) -> f64 {
        self.p.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Norms of a field. The weighted L1 entries are on-grid diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldNorms {
    pub re_l2: f64,
    pub grad_im_l2: f64,
    pub re_h1: f64,
    pub energy: f64,
    pub u32_re_l1: f64,
    pub u12_im_l1: f64,
    pub u52_im_l1: f64,
    pub triple: f64,
}

/// L2 and U-weighted L1 norms of a field.
pub fn field_norms(h: &FieldState) -> FieldNorms {
    let g = &h.grid;
    let re2 = g.norm_sq(&h.h1);
    let grad = |s: &[Complex64]| {
        let w = g.lattice_weight();
        w * crate::sum::det_sum(g.modes(), |m| g.radius(m).powi(2) * s[m].norm_sqr())
    };
    let grad_im = grad(&h.h2).sqrt();
    let re_h1 = (re2 + grad(&h.h1)).sqrt();
    let l1 = |s: &[Complex64], p: f64| {
        // positive powers never fail
        let w = apply_u_power(s, g, p).expect("positive power");
        g.l1_norm(&w)
    };
    let u32 = l1(&h.h1, 1.5);
    let u12 = l1(&h.h2, 0.5);
    let u52 = l1(&h.h2, 2.5);
    let energy = re_h1 + grad_im;
    FieldNorms { re_l2: re2.sqrt(), grad_im_l2: grad_im, re_h1, energy, u32_re_l1: u32, u12_im_l1: u12, u52_im_l1: u52, triple: energy + u32 + u12 + u52 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Arc::new(make_grid(2, 16, 10.0).unwrap());
        let n = field_norms(&FieldState::zeros(g));
        assert_eq!(n.triple, 0.0);
        assert_eq!(n.re_l2, 0.0);
    }

    #[test]
    fn single_mode_parseval() {
        let l = 12.0;
        let g = Arc::new(make_grid(2, 16, l).unwrap());
        let mut h = FieldState::zeros(g.clone());
        let m = 3 * 16 + 2;
        h.h1[m] = Complex64::new(1.0, 0.0);
        h.h1[g.partner(m)] = Complex64::new(1.0, 0.0);
        let n = field_norms(&h);
        assert!((n.re_l2 - (2.0 / (l * l)).sqrt()).abs() < 1e-15);
        // physical check: h1(x) = (2/L^d) cos(xi.x), whose L2 norm is sqrt(2/L^d)
        let (p1, _) = h.physical();
        let direct = g.integrate(&p1.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        assert!((direct - n.re_l2).abs() < 1e-14);
    }

    #[test]
    fn scaling_doubles_norms() {
        let g = Arc::new(make_grid(1, 128, 40.0).unwrap());
        let h = FieldState::gaussian(g, &GaussianPulse { amplitude: 0.3, width: 2.0, phase: 0.7 }).unwrap();
        let a = field_norms(&h);
        let b = field_norms(&h.scaled(2.0));
        for (x, y) in [
            (a.re_l2, b.re_l2),
            (a.grad_im_l2, b.grad_im_l2),
            (a.u32_re_l1, b.u32_re_l1),
            (a.u12_im_l1, b.u12_im_l1),
            (a.u52_im_l1, b.u52_im_l1),
            (a.triple, b.triple),
        ] {
            assert!((2.0 * x - y).abs() <= 1e-13 * y.max(1e-300));
        }
    }

    #[test]
    fn gaussian_pulse_is_real_and_matches_transform() {
        let g = Arc::new(make_grid(2, 64, 30.0).unwrap());
        let pulse = GaussianPulse { amplitude: 0.5, width: 1.5, phase: 0.0 };
        let h = FieldState::gaussian(g.clone(), &pulse).unwrap();
        assert_eq!(h.reality_defect(), 0.0);
        for m in [1usize, 5, 70] {
            let want = 0.5 * pulse.profile_hat(g.radius(m), 2);
            assert!((h.h1[m].re - want).abs() < 1e-12);
        }
    }
}
