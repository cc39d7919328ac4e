//! One-dimensional quadrature building blocks: Gauss rules, graded panel
//! layouts for nearly singular or oscillatory integrands, and an adaptive
//! Gauss-Kronrod integrator.

use crate::error::{Error, Result};
use crate::sum::pairwise_sum;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

/// Nodes and weights of a rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss-Legendre rule with `n` points (Newton iteration on P_n).
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    dp = legendre_pair(n, x).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Gauss rule for the weight (1 - x^2)^alpha on [-1, 1], alpha > -1.
    ///
    /// Built from the Jacobi matrix of the symmetric Jacobi polynomials.
    pub fn gegenbauer(n: usize, alpha: f64) -> Self {
        assert!(n >= 1 && alpha > -1.0);
        if alpha == 0.0 {
            return Self::legendre(n);
        }
        let mu0 = 2f64.powf(2.0 * alpha + 1.0) * gamma(alpha + 1.0).powi(2) / gamma(2.0 * alpha + 2.0);
        let mut j = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let kf = k as f64;
            let b = if k == 1 && (alpha + 0.5).abs() < 1e-15 {
                0.5
            } else {
                kf * (kf + 2.0 * alpha) / ((2.0 * kf + 2.0 * alpha + 1.0) * (2.0 * kf + 2.0 * alpha - 1.0))
            };
            let s = b.sqrt();
            j[(k, k - 1)] = s;
            j[(k - 1, k)] = s;
        }
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // symmetrize to remove eigen-solver noise
        for i in 0..n / 2 {
            let x = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
            let w = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[n - 1 - i] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A point near which an integrand varies on the length scale `width`.
#[derive(Debug, Clone, Copy)]
pub struct Feature {
    pub at: f64,
    pub width: f64,
}

/// Panel edges on [a, b], graded geometrically (ratio 2) toward each feature
/// and further split so that no panel is wider than `max_width(x)` at either end.
pub fn graded_edges<W: Fn(f64) -> f64>(a: f64, b: f64, features: &[Feature], max_width: W, max_panels: usize) -> Result<Vec<f64>> {
    let len = b - a;
    let mut pts = vec![a, b];
    for f in features {
        if !(f.width > 0.0) || !f.at.is_finite() {
            continue;
        }
        if f.at > a && f.at < b {
            pts.push(f.at);
        }
        let mut off = 0.5 * f.width;
        while off < 2.0 * len {
            for p in [f.at - off, f.at + off] {
                if p > a && p < b {
                    pts.push(p);
                }
            }
            off *= 2.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    let tiny = 1e-14 * len.abs().max(a.abs()).max(b.abs());
    pts.dedup_by(|x, y| (*x - *y).abs() <= tiny);

    let mut edges = Vec::with_capacity(pts.len());
    edges.push(pts[0]);
    for w in pts.windows(2) {
        let (e0, e1) = (w[0], w[1]);
        let mw = max_width(e0).min(max_width(e1)).min(max_width(0.5 * (e0 + e1)));
        let m = if mw.is_finite() && mw > 0.0 { ((e1 - e0) / mw).ceil().max(1.0) } else { 1.0 };
        if edges.len() as f64 + m > max_panels as f64 + 1.0 {
            return Err(Error::UnresolvedOscillation(format!("panel budget {max_panels} exceeded on [{a}, {b}]")));
        }
        let m = m as usize;
        for k in 1..m {
            edges.push(e0 + (e1 - e0) * k as f64 / m as f64);
        }
        edges.push(e1);
    }
    Ok(edges)
}

/// Integrate over consecutive panels with a fixed rule.
pub fn integrate_panels<F: FnMut(f64) -> f64>(rule: &GaussRule, edges: &[f64], mut f: F) -> f64 {
    let parts: Vec<f64> = edges.windows(2).map(|w| rule.integrate(w[0], w[1], &mut f)).collect();
    pairwise_sum(&parts)
}

/// Parallel version of [`integrate_panels`]; the result does not depend on
/// the thread count.
pub fn integrate_panels_par<F: Fn(f64) -> f64 + Sync>(rule: &GaussRule, edges: &[f64], f: F) -> f64 {
    let parts: Vec<f64> = edges.par_windows(2).map(|w| rule.integrate(w[0], w[1], &f)).collect();
    pairwise_sum(&parts)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive G7-K15 quadrature over [a, b] with breakpoints.
///
/// Returns (value, error estimate). Fails when the interval budget runs out
/// before the tolerance `max(abs_tol, rel_tol*|value|)` is reached.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Result<(f64, f64)> {
    let mut ivs: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = pairwise_sum(&ivs.iter().map(|x| x.2).collect::<Vec<_>>());
        let err: f64 = ivs.iter().map(|x| x.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if ivs.len() >= max_intervals {
            return Err(Error::QuadratureFailure(format!("adaptive quadrature did not converge: error {err:.3e} after {} intervals", ivs.len())));
        }
        let (imax, _) = ivs.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("nonempty");
        let (a, b, _, _) = ivs[imax];
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Err(Error::QuadratureFailure("interval underflow".into()));
        }
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        ivs[imax] = (a, m, v1, e1);
        ivs.push((m, b, v2, e2));
    }
}
