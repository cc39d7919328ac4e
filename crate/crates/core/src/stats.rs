//! Least-squares line fits used for decay exponents.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Straight-line fit y = slope*x + intercept with a 95% interval on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub slope_ci: [f64; 2],
    pub samples: usize,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidParameter("fit inputs differ in length".into()));
    }
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, have: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter("fit abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| Error::InvalidParameter(e.to_string()))?.inverse_cdf(0.975);
    Ok(LineFit { slope, intercept, slope_stderr: se, slope_ci: [slope - tq * se, slope + tq * se], samples: n })
}

/// Fit log(y) against log(x). Every sample must be strictly positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    line_fit(&lx, &ly)
}

/// `n` log-spaced points between `a` and `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = logspace(1.0, 100.0, 12);
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t.powf(-2.5)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope + 2.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.slope_ci[0] <= f.slope && f.slope <= f.slope_ci[1]);
    }

    #[test]
    fn ci_widens_with_noise() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 2.0 * v + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 0.02);
        assert!(f.slope_ci[1] - f.slope_ci[0] > 0.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(loglog_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err());
        assert!(line_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
