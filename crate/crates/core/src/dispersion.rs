//! Radial Fourier analysis in dimension d and the decay of the free
//! evolution e^{itL} for radial data.
//!
//! The transform of the unit-sphere measure is
//! `K_d(r) = (2 pi)^{d/2} r^{1-d/2} J_{d/2-1}(r)`. It is evaluated from its
//! power series for small r and from the Hankel expansion
//! `K_d(r) = e^{ir} k1(r) + e^{-ir} k2(r)`, k2 = conj(k1), for large r. For
//! odd d the Hankel series terminates and is exact.

use crate::config::DispersionSpec;
use crate::error::{Error, Result};
use crate::friction::sphere_area;
use crate::quad::{adaptive, GaussRule};
use crate::spectral::{phi1, phi1_prime, phi1_second, C64};
use crate::stats::{loglog_fit, logspace, LineFit};
use crate::sum::pairwise_sum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Sphere kernel for one dimension with its precomputed switch point.
#[derive(Debug, Clone)]
pub struct SphereKernel {
    dim: usize,
    nu: f64,
    area: f64,
    /// Hankel coefficients a_k(nu); finite list when the series terminates.
    hankel: Vec<f64>,
    terminating: bool,
    switch: f64,
}

impl SphereKernel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("sphere kernel needs d >= 1".into()));
        }
        let nu = 0.5 * dim as f64 - 1.0;
        let mut hankel = vec![1.0];
        let terminating = dim % 2 == 1;
        let mut a = 1.0;
        for k in 1..60 {
            a *= (4.0 * nu * nu - ((2 * k - 1) as f64).powi(2)) / (8.0 * k as f64);
            if a == 0.0 {
                break;
            }
            hankel.push(a);
        }
        let mut sk = SphereKernel { dim, nu, area: sphere_area(dim - 1), hankel, terminating, switch: 0.0 };
        sk.switch = sk.find_switch();
        Ok(sk)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn switch_point(&self) -> f64 {
        self.switch
    }

    /// Power series `|S^{d-1}| sum (-r^2/4)^k / (k! (d/2)_k)`.
    pub fn series(&self, r: f64) -> f64 {
        let x = -0.25 * r * r;
        let mut term = 1.0;
        let mut terms = vec![1.0];
        for k in 1..400 {
            term *= x / (k as f64 * (self.nu + k as f64));
            terms.push(term);
            if term.abs() < 1e-18 && k as f64 > 0.5 * r {
                break;
            }
        }
        self.area * pairwise_sum(&terms)
    }

    /// Envelope k1(r); k2 is its conjugate.
    pub fn envelope(&self, r: f64) -> C64 {
        let pre = (2.0 * PI).powf(0.5 * self.dim as f64) * r.powf(1.0 - 0.5 * self.dim as f64) * 0.5 * (2.0 / (PI * r)).sqrt();
        let phase = C64::from_polar(1.0, -(0.5 * self.nu * PI + 0.25 * PI));
        let mut s = C64::new(0.0, 0.0);
        let mut ik = C64::new(1.0, 0.0);
        let mut last = f64::INFINITY;
        for (k, a) in self.hankel.iter().enumerate() {
            let term = ik * (a / r.powi(k as i32));
            // optimal truncation of the divergent series
            if !self.terminating && k > 0 && term.norm() > last {
                break;
            }
            last = term.norm();
            s += term;
            ik *= C64::new(0.0, 1.0);
        }
        phase * s * pre
    }

    pub fn asymptotic(&self, r: f64) -> f64 {
        2.0 * (C64::from_polar(1.0, r) * self.envelope(r)).re
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r < self.switch {
            self.series(r)
        } else {
            self.asymptotic(r)
        }
    }

    fn find_switch(&self) -> f64 {
        let mut best = (f64::INFINITY, 1.0);
        for k in 0..160 {
            let r = 1.0 + 0.25 * k as f64;
            let scale = 2.0 * self.envelope(r).norm();
            let diff = (self.series(r) - self.asymptotic(r)).abs() / scale;
            if diff <= 1e-10 {
                return r;
            }
            if diff < best.0 {
                best = (diff, r);
            }
        }
        log::warn!("sphere kernel d = {}: series and asymptotic agree only to {:.1e}", self.dim, best.0);
        best.1
    }
}

/// K_d(r), the Fourier transform of the unit-sphere measure.
pub fn sphere_kernel(d: usize, r: f64) -> Result<f64> {
    Ok(SphereKernel::new(d)?.eval(r))
}

/// `f_hat(rho) = int_0^inf f(r) K_d(r rho) r^{d-1} dr` on a list of rho.
/// `f` must have decayed below 1e-12 of its size by `r_max`.
pub fn radial_fourier<F: Fn(f64) -> f64 + Sync>(f: F, r_max: f64, d: usize, rho: &[f64]) -> Result<Vec<f64>> {
    let kernel = SphereKernel::new(d)?;
    let peak = (0..=200).map(|k| f(r_max * k as f64 / 200.0).abs()).fold(0.0, f64::max);
    if f(r_max).abs() > 1e-12 * peak {
        return Err(Error::InvalidParameter(format!("profile has not decayed by r_max = {r_max}")));
    }
    rho.par_iter()
        .map(|&q| {
            let width = if q > 0.0 { (0.25 * PI / q).min(r_max / 16.0) } else { r_max / 16.0 };
            let n = (r_max / width).ceil() as usize;
            if n > 200_000 {
                return Err(Error::UnresolvedOscillation(format!("rho = {q} needs {n} panels")));
            }
            let breaks: Vec<f64> = (0..=n).map(|k| r_max * k as f64 / n as f64).collect();
            let g = |r: f64| f(r) * kernel.eval(r * q) * r.powi(d as i32 - 1);
            let (v, _) = adaptive(g, &breaks, 1e-15 * peak, 1e-13, 4 * n + 1000)?;
            Ok(v)
        })
        .collect()
}

/// Gaussian datum exp(-r^2 / (2 w^2)) and its transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianProfile {
    pub width: f64,
}

impl GaussianProfile {
    pub fn value(&self, r: f64) -> f64 {
        (-0.5 * r * r / (self.width * self.width)).exp()
    }

    pub fn transform(&self, rho: f64, d: usize) -> f64 {
        let w2 = self.width * self.width;
        (2.0 * PI * w2).powf(0.5 * d as f64) * (-0.5 * w2 * rho * rho).exp()
    }

    /// Frequency beyond which the transform is below 1e-17 of its peak.
    pub fn rho_max(&self) -> f64 {
        (2.0 * 39.0f64).sqrt() / self.width
    }
}

/// Free evolution of a radial Gaussian evaluated at chosen radii.
pub struct FreeEvolution {
    profile: GaussianProfile,
    kernel: SphereKernel,
    rule: GaussRule,
    d: usize,
}

impl FreeEvolution {
    pub fn new(profile: GaussianProfile, d: usize) -> Result<Self> {
        if !(profile.width > 0.0) {
            return Err(Error::InvalidParameter("profile width must be positive".into()));
        }
        Ok(FreeEvolution { profile, kernel: SphereKernel::new(d)?, rule: GaussRule::legendre(16), d })
    }

    /// `u(t, x) = (2 pi)^{-d} int_0^inf e^{i t phi1(rho)} f_hat(rho) K_d(rho x) rho^{d-1} drho`.
    pub fn value(&self, t: f64, x: f64) -> Result<C64> {
        let rmax = self.profile.rho_max();
        // panels with at most pi/4 of phase each
        let mut edges = vec![0.0];
        let mut a = 0.0;
        while a < rmax {
            let rate = t.abs() * phi1_prime(a + 0.05) + x.abs() + 1.0;
            a = (a + (0.25 * PI / rate).min(0.25)).min(rmax);
            edges.push(a);
            if edges.len() > 2_000_000 {
                return Err(Error::UnresolvedOscillation(format!("free evolution at t = {t}, |x| = {x}")));
            }
        }
        let d = self.d;
        let mut re = Vec::with_capacity(edges.len());
        let mut im = Vec::with_capacity(edges.len());
        for w in edges.windows(2) {
            let h = 0.5 * (w[1] - w[0]);
            let c = 0.5 * (w[1] + w[0]);
            let mut s = C64::new(0.0, 0.0);
            for (z, wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let q = c + h * z;
                let amp = self.profile.transform(q, d) * self.kernel.eval(q * x) * q.powi(d as i32 - 1);
                s += C64::from_polar(amp * wt, t * phi1(q));
            }
            re.push(s.re * h);
            im.push(s.im * h);
        }
        Ok(C64::new(pairwise_sum(&re), pairwise_sum(&im)) * (2.0 * PI).powi(-(d as i32)))
    }

    /// Radius where stationary phase puts the largest amplitude:
    /// x = t phi1'(rho*) with rho* maximizing
    /// f_hat(rho) rho^{(d-1)/2} / (phi1'(rho)^{(d-1)/2} sqrt(phi1''(rho))).
    pub fn shell_radius(&self, t: f64) -> f64 {
        let d = self.d as f64;
        let amp = |q: f64| self.profile.transform(q, self.d) * (q / phi1_prime(q)).powf(0.5 * (d - 1.0)) / phi1_second(q).sqrt();
        let rmax = self.profile.rho_max();
        let best = (1..2000).map(|k| rmax * k as f64 / 2000.0).max_by(|a, b| amp(*a).total_cmp(&amp(*b))).unwrap_or(1.0);
        t * phi1_prime(best)
    }

    /// Largest group velocity over the frequencies carrying the datum.
    pub fn max_speed(&self) -> f64 {
        let d = self.d;
        let peak = (1..400).map(|k| self.profile.rho_max() * k as f64 / 400.0).map(|q| self.profile.transform(q, d) * q.powi(d as i32 - 1)).fold(0.0, f64::max);
        let mut q = self.profile.rho_max();
        while q > 0.0 && self.profile.transform(q, d) * q.powi(d as i32 - 1) < 1e-8 * peak {
            q -= 0.01;
        }
        phi1_prime(q.max(0.0))
    }
}

/// Location and value of sup_x |u(t, x)|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub t: f64,
    pub x: f64,
    pub value: f64,
}

/// sup_x |(e^{itL} f)(x)| for a radial Gaussian f, searched on a coarse
/// grid over [0, (1 + max phi1') t], a dense grid around the stationary-phase
/// shell, then refined by golden-section search.
pub fn free_evolution_supnorm(profile: GaussianProfile, t: f64, d: usize) -> Result<SupNorm> {
    let ev = FreeEvolution::new(profile, d)?;
    if t == 0.0 {
        return Ok(SupNorm { t, x: 0.0, value: 1.0 });
    }
    let x_max = ((1.0 + ev.max_speed()) * t.abs()).max(8.0 * profile.width);
    let shell = ev.shell_radius(t.abs());
    let mut xs: Vec<f64> = (0..=160).map(|k| x_max * k as f64 / 160.0).collect();
    let span = 0.25 * shell + 4.0 * profile.width;
    xs.extend((0..=96).map(|k| shell - span + 2.0 * span * k as f64 / 96.0).filter(|x| *x >= 0.0 && *x <= x_max));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let vals = xs.par_iter().map(|&x| ev.value(t, x).map(|z| z.norm())).collect::<Result<Vec<f64>>>()?;
    let (i, _) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    if i == xs.len() - 1 {
        return Err(Error::InsufficientRange(format!("maximum of |u| at the edge x = {} of the search range", xs[i])));
    }
    let (mut a, mut b) = (xs[i.saturating_sub(1)], xs[i + 1]);
    let g = |x: f64| ev.value(t, x).map(|z| z.norm());
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - gr * (b - a);
    let mut e = a + gr * (b - a);
    let (mut fc, mut fe) = (g(c)?, g(e)?);
    for _ in 0..60 {
        if (b - a) <= 1e-9 * (1.0 + b.abs()) {
            break;
        }
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - gr * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + gr * (b - a);
            fe = g(e)?;
        }
    }
    let (x, v) = if fc > fe { (c, fc) } else { (e, fe) };
    let (x, v) = if vals[i] > v { (xs[i], vals[i]) } else { (x, v) };
    Ok(SupNorm { t, x, value: v })
}

/// Per-dimension decay and kernel-envelope fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dim: usize,
    pub switch_point: f64,
    pub kernel_envelope_fit: LineFit,
    /// Largest relative error against 4 pi sin(r) / r at r = 0.5, 1, 10 (d = 3 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form_error: Option<f64>,
    pub sup_norms: Vec<SupNorm>,
    pub decay_fit: LineFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub width: f64,
    pub dims: Vec<DimensionReport>,
}

pub fn kernel_envelope_fit(d: usize, r_min: f64, r_max: f64, samples: usize) -> Result<LineFit> {
    let k = SphereKernel::new(d)?;
    let r = logspace(r_min, r_max, samples.max(3));
    let v: Vec<f64> = r.iter().map(|&x| k.envelope(x).norm()).collect();
    loglog_fit(&r, &v)
}

/// Largest relative error of K_3 against 4 pi sin(r) / r at r = 0.5, 1, 10.
pub fn three_dimensional_error() -> Result<f64> {
    let k = SphereKernel::new(3)?;
    Ok([0.5f64, 1.0, 10.0]
        .iter()
        .map(|&r| {
            let want = 4.0 * PI * r.sin() / r;
            ((k.eval(r) - want) / want).abs()
        })
        .fold(0.0, f64::max))
}

pub fn dispersion_report(spec: &DispersionSpec) -> Result<DispersionReport> {
    if !(spec.t_min > 0.0 && spec.t_max > spec.t_min) {
        return Err(Error::Config("dispersion needs 0 < t_min < t_max".into()));
    }
    if !(spec.kernel_r_min > 0.0 && spec.kernel_r_max > spec.kernel_r_min) {
        return Err(Error::Config("dispersion needs 0 < kernel_r_min < kernel_r_max".into()));
    }
    let profile = GaussianProfile { width: spec.width };
    let dims = spec
        .dims
        .iter()
        .map(|&d| {
            let sup_norms =
                logspace(spec.t_min, spec.t_max, spec.samples).into_iter().map(|t| free_evolution_supnorm(profile, t, d)).collect::<Result<Vec<_>>>()?;
            let t: Vec<f64> = sup_norms.iter().map(|s| s.t).collect();
            let v: Vec<f64> = sup_norms.iter().map(|s| s.value).collect();
            Ok(DimensionReport {
                dim: d,
                switch_point: SphereKernel::new(d)?.switch_point(),
                kernel_envelope_fit: kernel_envelope_fit(d, spec.kernel_r_min, spec.kernel_r_max, 64)?,
                closed_form_error: if d == 3 { Some(three_dimensional_error()?) } else { None },
                sup_norms,
                decay_fit: loglog_fit(&t, &v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DispersionReport { width: spec.width, dims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_dimensional_closed_form() {
        let k = SphereKernel::new(3).unwrap();
        for r in [0.5f64, 1.0, 10.0, 37.0] {
            let want = 4.0 * PI * r.sin() / r;
            assert!((k.eval(r) - want).abs() <= 1e-10 * want.abs(), "r={r}");
        }
        assert_relative_eq!(k.eval(0.0), 4.0 * PI);
    }

    #[test]
    fn values_at_origin_are_sphere_areas() {
        assert_relative_eq!(sphere_kernel(5, 0.0).unwrap(), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(sphere_kernel(2, 0.0).unwrap(), 2.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn one_dimensional_kernel_is_twice_cosine() {
        let k = SphereKernel::new(1).unwrap();
        for r in [0.0f64, 0.3, 2.0, 25.0, 400.0] {
            assert!((k.eval(r) - 2.0 * r.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn five_dimensional_closed_form() {
        // K_5 = 8 pi^2 * 3 (sin r - r cos r) / r^3
        let k = SphereKernel::new(5).unwrap();
        for r in [0.7f64, 3.0, 12.0, 150.0] {
            let want = 8.0 * PI * PI * (r.sin() - r * r.cos()) / r.powi(3);
            assert!((k.eval(r) - want).abs() <= 1e-12 * 8.0 * PI * PI / r.powi(2), "r={r}");
        }
    }

    #[test]
    fn even_dimension_switch_is_consistent() {
        // d = 2: K_2 = 2 pi J0; J0(10) tabulated
        let k = SphereKernel::new(2).unwrap();
        assert!(k.switch_point() > 1.0);
        let j0_10 = -0.245_935_764_451_348_3;
        assert!((k.eval(10.0) / (2.0 * PI) - j0_10).abs() < 1e-10);
        let s = k.switch_point();
        assert!((k.series(s) - k.asymptotic(s)).abs() <= 1e-10 * 2.0 * k.envelope(s).norm());
    }

    #[test]
    fn envelope_exponent_five_dimensions() {
        let fit = kernel_envelope_fit(5, 10.0, 1000.0, 64).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.05);
    }

    #[test]
    fn gaussian_self_transform() {
        let f = |r: f64| (-0.5 * r * r).exp();
        let rho = [0.0, 0.5, 1.0, 2.5, 4.0];
        let got = radial_fourier(f, 12.0, 5, &rho).unwrap();
        for (g, q) in got.iter().zip(rho) {
            let want = (2.0 * PI).powf(2.5) * (-0.5 * q * q).exp();
            assert!((g - want).abs() <= 1e-8 * want, "rho={q}: {g} {want}");
        }
    }

    #[test]
    fn cosine_transform_in_one_dimension() {
        let f = |r: f64| (-r * r).exp() * (1.0 + r);
        let rule = GaussRule::legendre(40);
        for q in [0.0, 1.3, 7.0] {
            let got = radial_fourier(f, 8.0, 1, &[q]).unwrap()[0];
            let want: f64 = (0..16).map(|k| rule.integrate(0.5 * k as f64, 0.5 * (k + 1) as f64, |r| 2.0 * (q * r).cos() * f(r))).sum();
            assert!((got - want).abs() < 1e-10, "{got} {want}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        // f = (1 + r^2) exp(-r^2) forward, then (2 pi)^{-3} int f_hat K_3 rho^2 back
        let f = |r: f64| (1.0 + r * r) * (-r * r).exp();
        let rule = GaussRule::legendre(16);
        let nodes: Vec<f64> = (0..28).flat_map(|k| rule.nodes.iter().map(move |z| 0.5 * k as f64 + 0.25 * (1.0 + z))).collect();
        let fh = radial_fourier(f, 9.0, 3, &nodes).unwrap();
        let kernel = SphereKernel::new(3).unwrap();
        for r in [0.0, 0.4, 1.1, 2.5] {
            let parts: Vec<f64> =
                nodes.iter().zip(&fh).enumerate().map(|(i, (q, v))| 0.25 * rule.weights[i % rule.weights.len()] * v * kernel.eval(r * q) * q * q).collect();
            let back = pairwise_sum(&parts) / (2.0 * PI).powi(3);
            assert!((back - f(r)).abs() < 1e-8, "r={r}: {back} {}", f(r));
        }
    }

    #[test]
    fn transform_at_zero_is_total_integral() {
        // int_{R^5} exp(-r^2/2) = (2 pi)^{5/2}
        let got = radial_fourier(|r: f64| (-0.5 * r * r).exp(), 12.0, 5, &[0.0]).unwrap()[0];
        assert_relative_eq!(got, (2.0 * PI).powf(2.5), max_relative = 1e-12);
    }

    #[test]
    fn undecayed_profile_is_rejected() {
        assert!(radial_fourier(|r: f64| (-r).exp(), 5.0, 3, &[1.0]).is_err());
    }

    #[test]
    fn free_evolution_at_time_zero_is_the_datum() {
        let ev = FreeEvolution::new(GaussianProfile { width: 1.0 }, 3).unwrap();
        for x in [0.0, 0.8, 2.0] {
            let u = ev.value(0.0, x).unwrap();
            assert!((u.re - (-0.5 * x * x).exp()).abs() < 1e-12 && u.im.abs() < 1e-14);
        }
        let s = free_evolution_supnorm(GaussianProfile { width: 1.0 }, 0.0, 5).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn free_evolution_conserves_l2() {
        // ||u(t)||^2 = |S^2| int |u|^2 x^2 dx equals ||f||^2 = pi^{3/2}; the cusp of
        // phi1 at the origin leaves a polynomial tail, hence the long range
        let ev = FreeEvolution::new(GaussianProfile { width: 1.0 }, 3).unwrap();
        let rule = GaussRule::legendre(16);
        let t = 1.5;
        let mut parts = vec![];
        for k in 0..960 {
            let (a, b) = (0.25 * k as f64, 0.25 * (k + 1) as f64);
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            let s: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(z, w)| {
                    let x = c + h * z;
                    w * ev.value(t, x).unwrap().norm_sqr() * x * x
                })
                .sum();
            parts.push(s * h);
        }
        let norm = 4.0 * PI * pairwise_sum(&parts);
        assert_relative_eq!(norm, PI.powf(1.5), max_relative = 1e-10);
    }
}
