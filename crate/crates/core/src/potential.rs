//! Interaction potentials W = (-Delta)^n V with the normalization |V_hat(0)| = 1.

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Radial description of the built-in Gaussian family, used wherever the
/// potential enters through |xi| only (friction and dispersion quadrature).
///
/// After normalization V_hat(r) = exp(-s^2 r^2 / 2) in every dimension and
/// W_hat(r) = r^{2n} V_hat(r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub n: f64,
    pub width: f64,
    pub rho0: f64,
}

impl RadialPotential {
    pub fn new(n: f64, width: f64, rho0: f64) -> Result<Self> {
        check_params(n, rho0)?;
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
        }
        Ok(RadialPotential { n, width, rho0 })
    }

    pub fn v_hat(&self, r: f64) -> f64 {
        (-0.5 * self.width * self.width * r * r).exp()
    }

    pub fn w_hat(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        r.powf(2.0 * self.n) * self.v_hat(r)
    }

    /// Radius beyond which |W_hat|^2 r^k is negligible for moderate k.
    pub fn cutoff(&self) -> f64 {
        // exp(-s^2 r^2) < 1e-17 * (polynomial growth) well before this radius
        (2.0 * 45.0f64).sqrt() / self.width + 2.0 * self.n.sqrt() / self.width
    }
}

fn check_params(n: f64, rho0: f64) -> Result<()> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!("Fermi exponent n must be positive, got {n}")));
    }
    if !(rho0 > 0.0) || !rho0.is_finite() {
        return Err(Error::InvalidParameter(format!("rho0 must be positive, got {rho0}")));
    }
    Ok(())
}

/// Physical profile used to build V.
#[derive(Debug, Clone, PartialEq)]
pub enum VProfile {
    /// c * exp(-|x|^2 / (2 s^2)); c is fixed by normalization.
    Gaussian { width: f64 },
    /// Arbitrary samples on the grid.
    Samples(Vec<f64>),
}

/// A potential on a grid.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: Arc<SpectralGrid>,
    pub n: f64,
    pub rho0: f64,
    pub v_hat: Vec<Complex64>,
    pub w_hat: Vec<Complex64>,
    /// Normalized physical samples of V (kept to avoid transform round-off
    /// in the weighted diagnostic).
    v_samples: Vec<f64>,
    radial: Option<RadialPotential>,
}

/// Divide a spectrum by |V_hat(0)| so the zero mode has unit modulus.
pub fn fermi_normalize(v_hat: &[Complex64]) -> Result<Vec<Complex64>> {
    let v0 = v_hat.first().map(|v| v.norm()).unwrap_or(0.0);
    let vmax = v_hat.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(v0 > 1e-14 * vmax) || v0 == 0.0 {
        return Err(Error::CannotNormalize);
    }
    Ok(v_hat.iter().map(|v| v / v0).collect())
}

/// Build V and W = (-Delta)^n V on `grid`.
pub fn build_potential(n: f64, profile: &VProfile, rho0: f64, grid: Arc<SpectralGrid>) -> Result<Potential> {
    check_params(n, rho0)?;
    let (phys, radial) = match profile {
        VProfile::Gaussian { width } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
            }
            let s2 = width * width;
            let v = grid.sample(|x| (-0.5 * x.iter().map(|c| c * c).sum::<f64>() / s2).exp());
            (v, Some(RadialPotential { n, width: *width, rho0 }))
        }
        VProfile::Samples(v) => {
            if v.len() != grid.modes() {
                return Err(Error::GridMismatch);
            }
            (v.clone(), None)
        }
    };
    let mut v_hat = grid.forward(&phys);
    grid.zero_nyquist(&mut v_hat);
    let v0 = v_hat[0].norm();
    let v_hat = fermi_normalize(&v_hat)?;
    let v_samples = phys.iter().map(|v| v / v0).collect();
    let w_hat = multiply_laplacian_power(&grid, &v_hat, n);
    Ok(Potential { grid, n, rho0, v_hat, w_hat, v_samples, radial })
}

fn multiply_laplacian_power(grid: &SpectralGrid, v_hat: &[Complex64], n: f64) -> Vec<Complex64> {
    (0..grid.modes())
        .map(|m| {
            let r = grid.radius(m);
            if r == 0.0 || grid.is_nyquist(m) {
                Complex64::new(0.0, 0.0)
            } else {
                v_hat[m] * r.powf(2.0 * n)
            }
        })
        .collect()
}

impl Potential {
    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Radial form, available for the built-in Gaussian family.
    pub fn radial(&self) -> Option<RadialPotential> {
        self.radial
    }

    /// A potential with W and V multiplied by `c` (drops the normalization).
    pub fn scaled(&self, c: f64) -> Potential {
        let mut p = self.clone();
        p.v_hat.iter_mut().for_each(|v| *v *= c);
        p.w_hat.iter_mut().for_each(|v| *v *= c);
        p.v_samples.iter_mut().for_each(|v| *v *= c);
        p.radial = None;
        p
    }

    /// Same potential with W translated by `shift` (physical displacement).
    pub fn shifted(&self, shift: &[f64]) -> Potential {
        let mut p = self.clone();
        let g = &self.grid;
        for m in 0..g.modes() {
            let ph: f64 = g.xi(m).iter().zip(shift).map(|(k, s)| k * s).sum();
            let e = Complex64::from_polar(1.0, -ph);
            p.v_hat[m] *= e;
            p.w_hat[m] *= e;
        }
        p.v_samples = p.grid.inverse_real(&p.v_hat);
        p.radial = None;
        p
    }

    pub fn w_phys(&self) -> Vec<f64> {
        self.grid.inverse_real(&self.w_hat)
    }

    pub fn v_phys(&self) -> Vec<f64> {
        self.grid.inverse_real(&self.v_hat)
    }

    /// Largest |Im W(x)| relative to max |W(x)|.
    pub fn imaginary_defect(&self) -> f64 {
        let w = self.grid.inverse(&self.w_hat);
        let re = w.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let im = w.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if re == 0.0 {
            im
        } else {
            im / re
        }
    }

    pub fn w_norm_sq(&self) -> f64 {
        self.grid.norm_sq(&self.w_hat)
    }

    /// Fails if V is not below 1e-10 of its peak on the box boundary.
    pub fn check_tail(&self) -> Result<()> {
        let v = self.v_phys();
        let peak = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let g = &self.grid;
        let n = g.n_per_dim();
        let mut edge = 0.0f64;
        for (j, val) in v.iter().enumerate() {
            let mut rem = j;
            let mut on_edge = false;
            for _ in 0..g.dim() {
                if rem % n == 0 {
                    on_edge = true;
                }
                rem /= n;
            }
            if on_edge {
                edge = edge.max(val.abs());
            }
        }
        if edge > 1e-10 * peak {
            return Err(Error::UnresolvedPotential(format!("boundary value {edge:.3e} exceeds 1e-10 of peak {peak:.3e}; enlarge the box")));
        }
        Ok(())
    }
}

/// Seminorms of the potential entering the smallness conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub w_w41: f64,
    pub w_h4: f64,
    pub weighted_v: f64,
    pub total: f64,
    /// Individual L1 norm of W (the |alpha| = 0 term of the W^{4,1} norm).
    pub w_l1: f64,
}

fn refinement_factor(grid: &SpectralGrid) -> usize {
    let mut f = 1;
    while f < 4 && (grid.n_per_dim() * f * 2).pow(grid.dim() as u32) <= 1 << 18 {
        f *= 2;
    }
    f
}

fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<u32>> {
    let mut out = vec![];
    let mut cur = vec![0u32; dim];
    fn rec(a: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if a == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[a] = k as u32;
            rec(a + 1, left - k, cur, out);
        }
        cur[a] = 0;
    }
    rec(0, max_order, &mut cur, &mut out);
    out
}

/// Sobolev-type seminorms of W and the weighted norm of V.
///
/// L1 norms use zero-padded spectral interpolation and a kink-aware
/// trapezoid rule; the weighted V norm is a diagnostic only, because the
/// fractional index makes it sensitive to the box truncation.
pub fn potential_seminorms(pot: &Potential) -> Result<SeminormReport> {
    pot.check_tail()?;
    let g = &pot.grid;
    let factor = refinement_factor(g);
    let i = Complex64::new(0.0, 1.0);
    let mut w_w41 = 0.0;
    let mut w_l1 = 0.0;
    for alpha in multi_indices(g.dim(), 4) {
        let d: Vec<Complex64> = (0..g.modes())
            .map(|m| {
                let mut v = pot.w_hat[m];
                for (a, &k) in alpha.iter().enumerate() {
                    v *= (i * g.xi(m)[a]).powu(k);
                }
                v
            })
            .collect();
        let (fine, spec) = g.refine(&d, factor)?;
        let l1 = fine.l1_norm(&spec);
        if alpha.iter().all(|&k| k == 0) {
            w_l1 = l1;
        }
        w_w41 += l1;
    }
    let h4: Vec<Complex64> = (0..g.modes()).map(|m| pot.w_hat[m] * (1.0 + g.radius(m).powi(2)).powi(2)).collect();
    let w_h4 = g.norm_sq(&h4).sqrt();

    let v = &pot.v_samples;
    let weighted: Vec<f64> = (0..g.modes())
        .map(|j| {
            let x2: f64 = g.point(j).iter().map(|c| c * c).sum();
            (1.0 + x2 * x2) * v[j]
        })
        .collect();
    let mut wv = g.forward(&weighted);
    g.zero_nyquist(&mut wv);
    // the high Sobolev weight would amplify FFT round-off, so modes at the
    // noise floor are dropped
    let floor = 1e-13 * wv.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let s = 4.0 * pot.n + 4.0;
    for (m, val) in wv.iter_mut().enumerate() {
        if val.norm() <= floor {
            *val = Complex64::new(0.0, 0.0);
        } else {
            *val *= (1.0 + g.radius(m).powi(2)).powf(0.5 * s);
        }
    }
    let weighted_v = g.norm_sq(&wv).sqrt();
    Ok(SeminormReport { w_w41, w_h4, weighted_v, total: w_w41 + w_h4 + weighted_v, w_l1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn gauss_1d(n: f64) -> Potential {
        let g = Arc::new(make_grid(1, 512, 40.0).unwrap());
        build_potential(n, &VProfile::Gaussian { width: 1.0 }, 0.1, g).unwrap()
    }

    #[test]
    fn normalized_and_fermi_rule() {
        let p = gauss_1d(1.0);
        assert!((p.v_hat[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(p.w_hat[0], Complex64::new(0.0, 0.0));
        for m in 0..p.grid.modes() {
            let r = p.grid.radius(m);
            assert!((p.w_hat[m] - p.v_hat[m] * r * r).norm() <= 1e-15 * (1.0 + p.w_hat[m].norm()));
        }
        assert!(p.imaginary_defect() <= 1e-12);
    }

    #[test]
    fn w_is_minus_second_derivative() {
        let p = gauss_1d(1.0);
        // normalized V has unit mass: V(x) = e^{-x^2/2}/sqrt(2 pi)
        let v = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let h = 1e-3;
        let w = p.w_phys();
        for (j, wj) in w.iter().enumerate() {
            let x = p.grid.point(j)[0];
            let fd = -(v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h);
            assert!((wj - fd).abs() <= 1e-6, "x={x} w={wj} fd={fd}");
        }
    }

    #[test]
    fn zero_profile_cannot_normalize() {
        let g = Arc::new(make_grid(1, 16, 10.0).unwrap());
        let r = build_potential(1.0, &VProfile::Samples(vec![0.0; 16]), 0.1, g);
        assert_eq!(r.unwrap_err(), Error::CannotNormalize);
    }

    #[test]
    fn normalize_halves() {
        let v = vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)];
        let out = fermi_normalize(&v).unwrap();
        assert_eq!(out, vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)]);
        assert!(fermi_normalize(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn rejects_nonpositive_exponent() {
        let g = Arc::new(make_grid(1, 16, 10.0).unwrap());
        assert!(build_potential(0.0, &VProfile::Gaussian { width: 1.0 }, 0.1, g).is_err());
    }

    #[test]
    fn tail_check_fires_on_small_box() {
        let g = Arc::new(make_grid(1, 64, 8.0).unwrap());
        let p = build_potential(1.0, &VProfile::Gaussian { width: 1.0 }, 0.1, g).unwrap();
        assert!(matches!(potential_seminorms(&p), Err(Error::UnresolvedPotential(_))));
    }

    #[test]
    fn seminorm_homogeneity_and_zero() {
        let p = gauss_1d(1.0);
        let a = potential_seminorms(&p).unwrap();
        let b = potential_seminorms(&p.scaled(-3.0)).unwrap();
        for (x, y) in [(a.w_w41, b.w_w41), (a.w_h4, b.w_h4), (a.weighted_v, b.weighted_v)] {
            assert!((3.0 * x - y).abs() <= 1e-12 * y, "{x} {y}");
        }
        let z = potential_seminorms(&p.scaled(0.0));
        // a zero potential has no tail to check and reports zeros
        let z = z.unwrap();
        assert_eq!((z.w_w41, z.w_h4, z.weighted_v, z.total), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn l1_of_w_matches_quadrature() {
        // independent oracle: composite Simpson on |V''| for the unit-mass
        // Gaussian, split at the kinks x = +-1
        let p = gauss_1d(1.0);
        let f = |x: f64| ((x * x - 1.0) * (-0.5 * x * x).exp() / (2.0 * PI).sqrt()).abs();
        let simpson = |a: f64, b: f64| {
            let n = 20_000;
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let want = simpson(-20.0, -1.0) + simpson(-1.0, 1.0) + simpson(1.0, 20.0);
        let got = potential_seminorms(&p).unwrap().w_l1;
        assert!((got - want).abs() <= 1e-6 * want, "{got} {want}");
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(1, 4).len(), 5);
        assert_eq!(multi_indices(2, 4).len(), 15);
        assert_eq!(multi_indices(3, 4).len(), 35);
    }
}
