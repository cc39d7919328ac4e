//! Cherenkov friction on the particle, and the oscillatory remainder terms
//! of its equation of motion.
//!
//! Every integrand depends on xi only through r = |xi| and mu = cos of the
//! angle between xi and the direction of motion, so xi integrals over R^d
//! reduce to (r, mu) integrals with the angular weight (1 - mu^2)^{(d-3)/2}
//! times the area of the unit (d-2)-sphere. Forces come out along P.
//!
//! Two independent routes give the friction:
//! * the regularized resolvent at eps > 0 ([`coupling_force`]), extrapolated
//!   to eps -> 0 ([`extrapolated_force`]);
//! * the eps -> 0 limit taken analytically ([`friction_limit`]). Writing
//!   Re(i / det) = -2 eps a / |det|^2 with a = P.xi, the Lorentzians
//!   concentrate on a = +-phi1, which gives
//!   `F = -rho0 (2 pi)^{-d} |S^{d-2}| (pi / p^2) int_0^{rc} r^d W_hat^2 (1 - (1 + r^2)/p^2)^{(d-3)/2} dr`
//!   with rc = sqrt(p^2 - 1). Nothing survives for p < 1.

use crate::angular::{odd_weight_poly, plane_wave_moments, pole_moment};
use crate::config::{LambdaFitSpec, QuadratureSpec, RemainderKind, RemainderSpec};
use crate::error::{Error, Result};
use crate::field::GaussianPulse;
use crate::potential::RadialPotential;
use crate::quad::{adaptive, graded_edges, Feature, GaussRule};
use crate::spectral::{phi1, phi1_prime, C64};
use crate::stats::{loglog_fit, logspace, LineFit};
use crate::sum::pairwise_sum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Area of the unit k-sphere in R^{k+1}.
pub fn sphere_area(k: usize) -> f64 {
    // |S^k| = 2 pi / (k - 1) |S^{k-2}|
    let (mut a, start) = if k.is_multiple_of(2) { (2.0, 0) } else { (2.0 * PI, 1) };
    for j in (start + 2..=k).step_by(2) {
        a *= 2.0 * PI / (j - 1) as f64;
    }
    a
}

/// Axisymmetric (r, mu) quadrature in dimension `dim`.
#[derive(Debug, Clone)]
pub struct RadialQuadrature {
    pub dim: usize,
    pub r_max: f64,
    /// Legendre rule used on each radial panel.
    pub radial: GaussRule,
    /// Gauss rule for the weight (1 - mu^2)^{(d-3)/2}, for smooth integrands.
    pub angular: GaussRule,
    /// Legendre rule used on graded angular panels.
    pub panel: GaussRule,
    pub max_panels: usize,
    pub min_panel: f64,
}

impl RadialQuadrature {
    pub fn new(spec: &QuadratureSpec, pot: &RadialPotential) -> Result<Self> {
        if spec.dim < 2 {
            return Err(Error::InvalidDimension(format!("radial reduction needs d >= 2, got {}", spec.dim)));
        }
        if spec.order < 2 || spec.angular_order < 2 || spec.max_panels == 0 || !(spec.min_panel > 0.0) {
            return Err(Error::Config("quadrature orders must be >= 2 and panel limits positive".into()));
        }
        let r_max = spec.r_max.unwrap_or_else(|| pot.cutoff());
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::Config(format!("quadrature.r_max must be positive, got {r_max}")));
        }
        Ok(RadialQuadrature {
            dim: spec.dim,
            r_max,
            radial: GaussRule::legendre(spec.order),
            angular: GaussRule::gegenbauer(spec.angular_order, 0.5 * (spec.dim as f64 - 3.0)),
            panel: GaussRule::legendre(spec.angular_order),
            max_panels: spec.max_panels,
            min_panel: spec.min_panel,
        })
    }

    pub fn angular_weight(&self, mu: f64) -> f64 {
        (1.0 - mu * mu).max(0.0).powf(0.5 * (self.dim as f64 - 3.0))
    }

    /// `int_0^{r_max} int_{-1}^{1} f(r, mu) (1 - mu^2)^{(d-3)/2} dmu dr` for smooth f.
    pub fn integrate_smooth<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let n = (self.r_max / 0.25).ceil().max(1.0) as usize;
        let edges: Vec<f64> = (0..=n).map(|k| self.r_max * k as f64 / n as f64).collect();
        panels_par(&self.radial, &edges, |r| Ok(self.angular.nodes.iter().zip(&self.angular.weights).map(|(m, w)| w * f(r, *m)).sum()))
            .expect("smooth integrand")
    }
}

/// Sum of a fallible integrand over panels, in parallel, with a
/// thread-count independent reduction.
fn panels_par<F: Fn(f64) -> Result<f64> + Sync>(rule: &GaussRule, edges: &[f64], f: F) -> Result<f64> {
    let parts = edges
        .par_windows(2)
        .map(|w| {
            let h = 0.5 * (w[1] - w[0]);
            let c = 0.5 * (w[1] + w[0]);
            let mut s = 0.0;
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                s += wt * f(c + h * x)?;
            }
            Ok(s * h)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&parts))
}

fn panels_par_complex<F: Fn(f64) -> Result<C64> + Sync>(rule: &GaussRule, edges: &[f64], f: F) -> Result<C64> {
    let parts = edges
        .par_windows(2)
        .map(|w| {
            let h = 0.5 * (w[1] - w[0]);
            let c = 0.5 * (w[1] + w[0]);
            let mut s = C64::new(0.0, 0.0);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                s += f(c + h * x)? * *wt;
            }
            Ok(s * h)
        })
        .collect::<Result<Vec<C64>>>()?;
    let re: Vec<f64> = parts.iter().map(|z| z.re).collect();
    let im: Vec<f64> = parts.iter().map(|z| z.im).collect();
    Ok(C64::new(pairwise_sum(&re), pairwise_sum(&im)))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn along(p: &[f64], scalar: f64) -> Vec<f64> {
    let s = norm(p);
    if s == 0.0 {
        return vec![0.0; p.len()];
    }
    p.iter().map(|v| scalar * v / s).collect()
}

fn check_momentum(p: &[f64], quad: &RadialQuadrature) -> Result<()> {
    if p.len() != quad.dim {
        return Err(Error::InvalidParameter(format!("momentum has {} components, quadrature is {}-dimensional", p.len(), quad.dim)));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("momentum must be finite".into()));
    }
    Ok(())
}

/// Friction from the regularized resolvent,
/// `rho0 Re <(grad W, 0), H_eps^{-1} (0, W)>`, returned as a vector along P.
pub fn coupling_force(p: &[f64], pot: &RadialPotential, eps: f64, quad: &RadialQuadrature) -> Result<Vec<f64>> {
    check_momentum(p, quad)?;
    Ok(along(p, coupling_force_scalar(norm(p), pot, eps, quad)?))
}

/// Signed component of [`coupling_force`] along P at speed `p`.
pub fn coupling_force_scalar(p: f64, pot: &RadialPotential, eps: f64, quad: &RadialQuadrature) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let d = quad.dim;
    let mut feats = vec![];
    if p > 1.0 {
        let rc = (p * p - 1.0).sqrt();
        let width = eps * p / (p * p - 1.0);
        if width < 3.0 * quad.min_panel {
            log::warn!("eps = {eps:.3e} is below the resolvable width near the resonant shell at |P| = {p}");
        }
        feats.push(Feature { at: rc, width });
    }
    let edges = graded_edges(0.0, quad.r_max, &feats, |_| 0.25, quad.max_panels)?;
    let sin_pow = d as f64 - 2.0;
    let inner = |r: f64| -> Result<f64> {
        let w = pot.w_hat(r);
        if w == 0.0 || r == 0.0 {
            return Ok(0.0);
        }
        let s = (1.0 + r * r).sqrt();
        let f2 = (r * s).powi(2);
        let pr = p * r;
        let mut af = vec![];
        if s < p {
            let mu = s / p;
            let th = mu.acos();
            let width = (eps / (pr * th.sin())).min((2.0 * eps / pr).sqrt());
            af.push(Feature { at: th, width });
            af.push(Feature { at: PI - th, width });
        }
        let te = graded_edges(0.0, PI, &af, |_| PI / 8.0, quad.max_panels)?;
        let g = panels_par(&quad.panel, &te, |th| {
            let mu = th.cos();
            let a = pr * mu;
            let dd = f2 - a * a + eps * eps;
            let den = dd * dd + 4.0 * eps * eps * a * a;
            Ok(th.sin().powf(sin_pow) * mu * mu * 2.0 * eps * pr / den)
        })?;
        Ok(r.powi(d as i32 + 2) * w * w * g)
    };
    let total = panels_par(&quad.radial, &edges, inner)?;
    Ok(-pot.rho0 * (2.0 * PI).powi(-(d as i32)) * sphere_area(d - 2) * total)
}

/// The eps -> 0 friction from the resonant-shell formula; exactly zero for
/// subsonic P and refused at |P| = 1.
pub fn friction_limit(p: &[f64], pot: &RadialPotential, quad: &RadialQuadrature) -> Result<Vec<f64>> {
    check_momentum(p, quad)?;
    Ok(along(p, friction_limit_scalar(norm(p), pot, quad.dim)?))
}

pub fn friction_limit_scalar(p: f64, pot: &RadialPotential, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("friction needs d >= 2, got {d}")));
    }
    if (p - 1.0).abs() <= 1e-12 {
        return Err(Error::Sonic);
    }
    if p < 1.0 {
        return Ok(0.0);
    }
    let rc = (p * p - 1.0).sqrt();
    // r = rc sin(t) removes the edge singularity of the angular weight
    let f = |t: f64| {
        let r = rc * t.sin();
        let w = pot.w_hat(r);
        r.powi(d as i32) * w * w * t.cos().powi(d as i32 - 2)
    };
    let (v, _) = adaptive(f, &[0.0, 0.25 * PI, 0.5 * PI], 0.0, 1e-14, 4000)?;
    let scale = rc.powi(d as i32 - 2) / p.powi(d as i32 - 3);
    Ok(-pot.rho0 * (2.0 * PI).powi(-(d as i32)) * sphere_area(d - 2) * PI / (p * p) * scale * v)
}

/// Extrapolate to eps -> 0 from f(eps), f(eps/2), f(eps/4), assuming
/// f(eps) = f0 + c_a eps^a + c_b eps^b + ... .
pub fn richardson(values: [f64; 3], powers: [f64; 2]) -> f64 {
    let ka = 2f64.powf(powers[0]);
    let kb = 2f64.powf(powers[1]);
    let g0 = (ka * values[1] - values[0]) / (ka - 1.0);
    let g1 = (ka * values[2] - values[1]) / (ka - 1.0);
    (kb * g1 - g0) / (kb - 1.0)
}

/// Regularized force at three eps levels and its eps -> 0 extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub speed: f64,
    pub eps: [f64; 3],
    pub values: [f64; 3],
    /// Powers of eps eliminated by the extrapolation.
    pub powers: [f64; 2],
    pub limit: f64,
}

pub fn extrapolated_force(speed: f64, pot: &RadialPotential, eps0: f64, quad: &RadialQuadrature) -> Result<Extrapolation> {
    let eps = [eps0, 0.5 * eps0, 0.25 * eps0];
    let mut values = [0.0; 3];
    for (v, e) in values.iter_mut().zip(eps) {
        *v = coupling_force_scalar(speed, pot, e, quad)?;
    }
    let powers = [1.0, 2.0];
    Ok(Extrapolation { speed, eps, values, powers, limit: richardson(values, powers) })
}

/// One speed of a friction-law fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSample {
    pub speed: f64,
    pub excess: f64,
    pub force: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub speed: f64,
    pub limit: f64,
    pub extrapolated: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub dim: usize,
    pub n: f64,
    /// Exponent 3 + 2n used to define Lambda.
    pub reference_exponent: f64,
    pub slope: f64,
    pub slope_ci: [f64; 2],
    pub slope_stderr: f64,
    pub samples: Vec<LambdaSample>,
    pub lambda_min: f64,
    pub lambda_min_speed: f64,
    pub lambda_grid: Vec<LambdaSample>,
    pub cross_check: Option<CrossCheck>,
}

fn lambda_sample(speed: f64, pot: &RadialPotential, d: usize, expo: f64) -> Result<LambdaSample> {
    let f = friction_limit_scalar(speed, pot, d)?.abs();
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-positive friction magnitude {f:e} at |P| = {speed}")));
    }
    let excess = speed - 1.0;
    Ok(LambdaSample { speed, excess, force: f, lambda: f / (pot.rho0 * excess.powf(expo)) })
}

/// Fit log|F| against log(|P| - 1) and tabulate Lambda = |F| / (rho0 (|P|-1)^{3+2n}).
pub fn lambda_fit(pot: &RadialPotential, spec: &LambdaFitSpec, quad: &RadialQuadrature) -> Result<LambdaReport> {
    if !(spec.excess_min > 0.0 && spec.excess_max > spec.excess_min) {
        return Err(Error::Config("lambda_fit needs 0 < excess_min < excess_max".into()));
    }
    if !(spec.lambda_speed_min > 1.0 && spec.lambda_speed_max >= spec.lambda_speed_min) {
        return Err(Error::Config("lambda_fit speed range must be supersonic and ordered".into()));
    }
    let d = quad.dim;
    let expo = 3.0 + 2.0 * pot.n;
    let samples =
        logspace(spec.excess_min, spec.excess_max, spec.samples).into_iter().map(|e| lambda_sample(1.0 + e, pot, d, expo)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = samples.iter().map(|s| s.excess).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.force).collect();
    let fit: LineFit = loglog_fit(&x, &y)?;
    let grid = (0..32)
        .map(|k| {
            let v = spec.lambda_speed_min + (spec.lambda_speed_max - spec.lambda_speed_min) * k as f64 / 31.0;
            lambda_sample(v, pot, d, expo)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = grid.iter().min_by(|a, b| a.lambda.total_cmp(&b.lambda)).expect("nonempty grid");
    let cross_check = match spec.cross_check_speed {
        Some(v) => {
            let limit = friction_limit_scalar(v, pot, d)?;
            let ex = extrapolated_force(v, pot, spec.cross_check_eps, quad)?;
            Some(CrossCheck { speed: v, limit, extrapolated: ex.limit, rel_diff: ((ex.limit - limit) / limit).abs() })
        }
        None => None,
    };
    Ok(LambdaReport {
        dim: d,
        n: pot.n,
        reference_exponent: expo,
        slope: fit.slope,
        slope_ci: fit.slope_ci,
        slope_stderr: fit.slope_stderr,
        lambda_min: best.lambda,
        lambda_min_speed: best.speed,
        samples,
        lambda_grid: grid,
        cross_check,
    })
}

/// Inputs of a remainder evaluation. Displacement and momenta must be
/// collinear so that the integrand stays axisymmetric.
#[derive(Debug, Clone)]
pub struct RemainderArgs<'a> {
    pub kind: RemainderKind,
    pub t: f64,
    pub x_t: &'a [f64],
    pub x_0: &'a [f64],
    pub p_t: &'a [f64],
    pub p_0: &'a [f64],
    /// Initial field (R1, R2); None means zero.
    pub beta0: Option<&'a GaussianPulse>,
}

fn collinear_frame(a: &RemainderArgs) -> Result<(Vec<f64>, f64, f64, f64)> {
    let d = a.p_t.len();
    if [a.x_t.len(), a.x_0.len(), a.p_0.len()].iter().any(|&l| l != d) {
        return Err(Error::InvalidParameter("trajectory vectors differ in length".into()));
    }
    let dx: Vec<f64> = a.x_t.iter().zip(a.x_0).map(|(x, y)| x - y).collect();
    let axis = [a.p_t, a.p_0, &dx[..]].into_iter().find(|v| norm(v) > 0.0).map(|v| v.iter().map(|c| c / norm(v)).collect::<Vec<f64>>()).unwrap_or_else(|| {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    });
    let proj = |v: &[f64]| -> Result<f64> {
        let s: f64 = v.iter().zip(&axis).map(|(x, e)| x * e).sum();
        let perp = v.iter().zip(&axis).map(|(x, e)| (x - s * e).powi(2)).sum::<f64>().sqrt();
        if perp > 1e-12 * norm(v).max(1e-300) {
            return Err(Error::InvalidParameter("remainder evaluation needs X(t) - X(0), P(t) and P(0) on one line".into()));
        }
        Ok(s)
    };
    let x = proj(&dx)?;
    let p = proj(a.p_t)?;
    let p0 = proj(a.p_0)?;
    Ok((axis, x, p, p0))
}

/// `int w(mu) q(mu) e^{i kappa mu} / (sigma i phi1 + i p r mu - eps) dmu`.
fn resolvent_moment(q: &[C64], sigma: f64, phi: f64, pr: f64, eps: f64, kappa: f64) -> C64 {
    if pr == 0.0 {
        let m = plane_wave_moments(kappa, q.len().saturating_sub(1));
        let s: C64 = q.iter().zip(&m).map(|(a, b)| a * b).sum();
        return s / C64::new(-eps, sigma * phi);
    }
    let mu0 = C64::new(-sigma * phi / pr, -eps / pr);
    pole_moment(q, mu0, kappa) / C64::new(0.0, pr)
}

/// Signed component of a remainder term along the axis of motion, with the axis.
pub fn remainder_scalar(args: &RemainderArgs, pot: &RadialPotential, eps: f64, quad: &RadialQuadrature) -> Result<(Vec<f64>, f64)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if args.p_t.len() != quad.dim {
        return Err(Error::InvalidParameter("momentum dimension differs from quadrature dimension".into()));
    }
    let d = quad.dim;
    let weight = odd_weight_poly(d)
        .ok_or_else(|| Error::InvalidDimension(format!("remainder terms use the closed-form angular integral, which needs odd d >= 3; got {d}")))?;
    let weight: Vec<C64> = weight.into_iter().map(|v| C64::new(v, 0.0)).collect();
    let (axis, x, p, p0) = collinear_frame(args)?;
    let t = args.t;
    let (amp, phase) = match (args.kind, args.beta0) {
        (RemainderKind::R4, _) => (0.0, 0.0),
        (_, Some(b)) => (b.amplitude, b.phase),
        (_, None) => return Ok((axis, 0.0)),
    };
    let (a, b) = (amp * phase.cos(), amp * phase.sin());
    let pulse = args.beta0.cloned();

    let mut feats = vec![];
    if p.abs() > 1.0 {
        feats.push(Feature { at: (p * p - 1.0).sqrt(), width: eps * p.abs() / (p * p - 1.0) });
    }
    let max_w = |r: f64| (0.5 * PI / (t.abs() * phi1_prime(r) + x.abs() + 1e-300)).min(0.25);
    let edges = graded_edges(0.0, quad.r_max, &feats, max_w, quad.max_panels)?;
    let kind = args.kind;
    let integrand = |r: f64| -> Result<C64> {
        if r == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let w = pot.w_hat(r);
        let s = (1.0 + r * r).sqrt();
        let phi = phi1(r);
        let pr = p * r;
        let kappa = x * r;
        let mut total = C64::new(0.0, 0.0);
        for sigma in [1.0, -1.0] {
            let (coef, q): (C64, Vec<C64>) = match kind {
                RemainderKind::R4 => (C64::new(-sigma * r * r / s * w * w, 0.0), vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
                RemainderKind::R1 => {
                    let g = pulse.as_ref().map_or(0.0, |pl| pl.profile_hat(r, d));
                    (C64::new(a, -sigma * b * r / s) * (w * g), vec![C64::new(0.0, 0.0), C64::new(sigma * r * phi, 0.0), C64::new(p0 * r * r, 0.0)])
                }
                RemainderKind::R2 => {
                    let g = pulse.as_ref().map_or(0.0, |pl| pl.profile_hat(r, d));
                    (C64::new(a, -sigma * b * r / s) * (w * g), vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new((p - p0) * r * r, 0.0)])
                }
            };
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            let q = crate::angular::poly_mul(&q, &weight);
            let k = resolvent_moment(&q, sigma, phi, pr, eps, kappa);
            total += coef * C64::from_polar(1.0, sigma * t * phi) * k;
        }
        Ok(total * r.powi(d as i32 - 1))
    };
    let v = panels_par_complex(&quad.radial, &edges, integrand)?;
    let c = match kind {
        RemainderKind::R4 => pot.rho0,
        _ => pot.rho0.sqrt(),
    };
    // the imaginary part cancels between xi and -xi
    Ok((axis, v.re * c * sphere_area(d - 2) / (2.0 * (2.0 * PI).powi(d as i32))))
}

/// Remainder term as a vector (along the common axis of motion).
pub fn remainder_term(args: &RemainderArgs, pot: &RadialPotential, eps: f64, quad: &RadialQuadrature) -> Result<Vec<f64>> {
    let (axis, v) = remainder_scalar(args, pot, eps, quad)?;
    Ok(axis.iter().map(|e| e * v).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub t: f64,
    /// Signed component along the direction of motion.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub kind: RemainderKind,
    pub dim: usize,
    pub speed: f64,
    pub eps: f64,
    pub samples: Vec<RemainderSample>,
    /// Samples where |value| has a local maximum in t.
    pub peaks: Vec<RemainderSample>,
    /// Log-log fit of |value| at the peaks against t. The remainders
    /// oscillate through zero, so the decay law is read off the envelope.
    pub envelope_fit: LineFit,
    /// Log-log fit over all samples, for reference.
    pub raw_fit: Option<LineFit>,
}

/// Interior local maxima of |value|.
pub fn envelope_peaks(samples: &[RemainderSample]) -> Vec<RemainderSample> {
    samples
        .windows(3)
        .filter(|w| {
            let m = w[1].value.abs();
            m > 0.0 && m >= w[0].value.abs() && m > w[2].value.abs()
        })
        .map(|w| w[1].clone())
        .collect()
}

/// Remainder along the ballistic trajectory X(t) = t P with P along the
/// first axis, sampled log-uniformly in t.
pub fn remainder_series(spec: &RemainderSpec, pot: &RadialPotential, quad: &RadialQuadrature) -> Result<RemainderReport> {
    if !(spec.t_min > 0.0 && spec.t_max > spec.t_min) {
        return Err(Error::Config("remainder needs 0 < t_min < t_max".into()));
    }
    let d = quad.dim;
    let mut e = vec![0.0; d];
    e[0] = 1.0;
    let p_t: Vec<f64> = e.iter().map(|v| v * spec.speed).collect();
    let p_0: Vec<f64> = e.iter().map(|v| v * spec.initial_speed.unwrap_or(spec.speed)).collect();
    let x_0 = vec![0.0; d];
    let samples = logspace(spec.t_min, spec.t_max, spec.samples)
        .into_iter()
        .map(|t| {
            let x_t: Vec<f64> = p_t.iter().map(|v| v * t).collect();
            let args = RemainderArgs { kind: spec.kind, t, x_t: &x_t, x_0: &x_0, p_t: &p_t, p_0: &p_0, beta0: spec.beta0.as_ref() };
            Ok(RemainderSample { t, value: remainder_scalar(&args, pot, spec.eps, quad)?.1 })
        })
        .collect::<Result<Vec<_>>>()?;
    let peaks = envelope_peaks(&samples);
    if peaks.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, have: peaks.len() });
    }
    let fit_abs = |s: &[RemainderSample]| {
        let t: Vec<f64> = s.iter().map(|x| x.t).collect();
        let v: Vec<f64> = s.iter().map(|x| x.value.abs()).collect();
        loglog_fit(&t, &v)
    };
    let envelope_fit = fit_abs(&peaks)?;
    let raw_fit = if samples.iter().all(|s| s.value != 0.0) { Some(fit_abs(&samples)?) } else { None };
    Ok(RemainderReport { kind: spec.kind, dim: d, speed: spec.speed, eps: spec.eps, samples, peaks, envelope_fit, raw_fit })
}
