//! Closed-form angular integrals of the form
//! `int_{-1}^{1} q(mu) e^{i kappa mu} / (mu - mu0) dmu`
//! for a polynomial q and a complex pole mu0 off the segment.
//!
//! These appear once the resolvent denominators `+-i phi1 + i p r mu - eps`
//! are written as `i p r (mu - mu0)`. Splitting q(mu) = q(mu0) + (mu - mu0) Q(mu)
//! leaves one pole integral, expressed through the exponential integral E1,
//! plus plane-wave moments of Q.

use crate::spectral::C64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Principal-branch exponential integral E1(z) = int_z^inf e^{-t}/t dt,
/// with the cut on the negative real axis.
pub fn exp_integral_e1(z: C64) -> C64 {
    if z.norm() <= 2.0 {
        // -gamma - log z - sum (-z)^k / (k k!)
        let mut term = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.0, 0.0);
        for k in 1..80 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-18 * sum.norm().max(1e-300) {
                break;
            }
        }
        return -EULER_GAMMA - z.ln() - sum;
    }
    // continued fraction, modified Lentz
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = C64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..5000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// Moments `M_m = int_{-1}^{1} mu^m e^{i kappa mu} dmu` for m = 0..=m_max.
pub fn plane_wave_moments(kappa: f64, m_max: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); m_max + 1];
    if kappa.abs() <= (m_max as f64).max(1.0) + 1.0 {
        // power series; the upward recursion is unstable for small kappa
        for (m, o) in out.iter_mut().enumerate() {
            let mut coef = C64::new(1.0, 0.0);
            let mut s = C64::new(0.0, 0.0);
            for j in 0..200 {
                if (m + j) % 2 == 0 {
                    s += coef * (2.0 / (m + j + 1) as f64);
                }
                if j as f64 > kappa.abs() && coef.norm() < 1e-18 {
                    break;
                }
                coef *= C64::new(0.0, kappa) / (j + 1) as f64;
            }
            *o = s;
        }
        return out;
    }
    let ik = C64::new(0.0, kappa);
    let (ep, em) = (C64::from_polar(1.0, kappa), C64::from_polar(1.0, -kappa));
    out[0] = C64::new(2.0 * kappa.sin() / kappa, 0.0);
    for m in 1..=m_max {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        out[m] = (ep - em * sign) / ik - out[m - 1] * (m as f64) / ik;
    }
    out
}

/// `int_{-1}^{1} e^{i kappa mu} / (mu - mu0) dmu` for mu0 not on [-1, 1].
pub fn pole_integral(mu0: C64, kappa: f64) -> C64 {
    if kappa < 0.0 {
        return -pole_integral(-mu0, -kappa);
    }
    if kappa == 0.0 {
        // the path mu - mu0 stays in one half plane, so principal logs apply
        return (1.0 - mu0).ln() - (-1.0 - mu0).ln();
    }
    let mik = C64::new(0.0, -kappa);
    let wa = mik * (-1.0 - mu0);
    let wb = mik * (1.0 - mu0);
    let mut diff = exp_integral_e1(wa) - exp_integral_e1(wb);
    // the vertical path wa -> wb crosses the cut downward when Re w < 0
    if mu0.im > 0.0 && mu0.re > -1.0 && mu0.re < 1.0 {
        diff += C64::new(0.0, 2.0 * PI);
    }
    (C64::new(0.0, kappa) * mu0).exp() * diff
}

/// `int_{-1}^{1} q(mu) e^{i kappa mu} / (mu - mu0) dmu`, with q given by its
/// coefficients in ascending order.
pub fn pole_moment(q: &[C64], mu0: C64, kappa: f64) -> C64 {
    if q.is_empty() {
        return C64::new(0.0, 0.0);
    }
    // synthetic division q(mu) = q(mu0) + (mu - mu0) Q(mu)
    let n = q.len() - 1;
    let mut quot = vec![C64::new(0.0, 0.0); n];
    let mut acc = q[n];
    for k in (0..n).rev() {
        quot[k] = acc;
        acc = q[k] + mu0 * acc;
    }
    let mut s = acc * pole_integral(mu0, kappa);
    if n > 0 {
        let m = plane_wave_moments(kappa, n - 1);
        for (b, mk) in quot.iter().zip(&m) {
            s += b * mk;
        }
    }
    s
}

/// Coefficients of (1 - mu^2)^{(d-3)/2} for odd d >= 3.
pub fn odd_weight_poly(d: usize) -> Option<Vec<f64>> {
    if d < 3 || d.is_multiple_of(2) {
        return None;
    }
    let k = (d - 3) / 2;
    let mut c = vec![0.0; 2 * k + 1];
    let mut binom = 1.0;
    for j in 0..=k {
        c[2 * j] = if j % 2 == 0 { binom } else { -binom };
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    Some(c)
}

pub fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{graded_edges, integrate_panels, Feature, GaussRule};

    fn brute(q: &[C64], mu0: C64, kappa: f64) -> C64 {
        let rule = GaussRule::legendre(20);
        let w = (mu0.im.abs()).max(1e-12);
        let feats = [Feature { at: mu0.re, width: w }];
        let maxw = (1.0 / (kappa.abs() + 1.0)).min(0.1);
        let e = graded_edges(-1.0, 1.0, &feats, |_| maxw, 1_000_000).unwrap();
        let f = |mu: f64, part: usize| {
            let qv: C64 = q.iter().rev().fold(C64::new(0.0, 0.0), |a, c| a * mu + c);
            let v = qv * C64::from_polar(1.0, kappa * mu) / (mu - mu0);
            if part == 0 {
                v.re
            } else {
                v.im
            }
        };
        C64::new(integrate_panels(&rule, &e, |x| f(x, 0)), integrate_panels(&rule, &e, |x| f(x, 1)))
    }

    #[test]
    fn e1_reference_values() {
        // E1(1) and E1(i) = -Ci(1) + i (Si(1) - pi/2)
        let a = exp_integral_e1(C64::new(1.0, 0.0));
        assert!((a.re - 0.219_383_934_395_520_3).abs() < 1e-15 && a.im.abs() < 1e-16);
        let b = exp_integral_e1(C64::new(0.0, 1.0));
        assert!((b - C64::new(-0.337_403_922_900_968_1, 0.946_083_070_367_183 - PI / 2.0)).norm() < 1e-15);
        // E1(5) from the tabulated value
        let c = exp_integral_e1(C64::new(5.0, 0.0));
        assert!((c.re / 1.148_295_591_275_325_8e-3 - 1.0).abs() < 1e-14);
        // slowly damped oscillatory argument
        let d = exp_integral_e1(C64::new(1e-3, 7.0));
        assert!((d - C64::new(-0.076_601_477_854_163_1, -0.116_092_059_358_224)).norm() < 1e-14);
    }

    #[test]
    fn e1_matches_integral_on_both_sides_of_switch() {
        // E1(z) = int_1^inf e^{-z t}/t dt for Re z > 0; t = 1/u maps to (0, 1]
        for z in [C64::new(0.3, 1.9), C64::new(0.3, 2.1), C64::new(0.5, 6.0), C64::new(2.5, -0.5)] {
            let rule = GaussRule::legendre(20);
            let e = graded_edges(0.0, 1.0, &[Feature { at: 0.0, width: 1e-6 }], |_| 0.002, 100_000).unwrap();
            let g = |u: f64, im: bool| {
                if u == 0.0 {
                    return 0.0;
                }
                let v = (-z / u).exp() / u;
                if im {
                    v.im
                } else {
                    v.re
                }
            };
            let want = C64::new(integrate_panels(&rule, &e, |u| g(u, false)), integrate_panels(&rule, &e, |u| g(u, true)));
            let got = exp_integral_e1(z);
            assert!((got - want).norm() < 1e-11 * want.norm(), "{z} {got} {want}");
        }
    }

    #[test]
    fn moments_against_quadrature() {
        let rule = GaussRule::legendre(60);
        for kappa in [0.0, 0.4, 3.0, 7.5, 40.0] {
            let m = plane_wave_moments(kappa, 6);
            for (k, mk) in m.iter().enumerate() {
                let re = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32) * (kappa * x).cos());
                let im = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32) * (kappa * x).sin());
                assert!((mk - C64::new(re, im)).norm() < 1e-13, "kappa={kappa} k={k}");
            }
        }
    }

    #[test]
    fn pole_moment_against_brute_force() {
        let q = [C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-0.3, 0.0), C64::new(-1.0, 0.0), C64::new(0.2, 0.1)];
        for (mu0, kappa) in [
            (C64::new(0.4, -1e-3), 0.0),
            (C64::new(0.4, -1e-3), 25.0),
            (C64::new(-0.7, 2e-4), 12.0),
            (C64::new(0.9, 1e-2), -30.0),
            (C64::new(2.5, -1e-4), 60.0),
            (C64::new(-1.6, 0.0), 5.0),
            (C64::new(0.0, 3.0), 0.5),
        ] {
            let got = pole_moment(&q, mu0, kappa);
            let want = brute(&q, mu0, kappa);
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{mu0} {kappa}: {got} {want}");
        }
    }

    #[test]
    fn weight_polynomials() {
        assert_eq!(odd_weight_poly(3).unwrap(), vec![1.0]);
        assert_eq!(odd_weight_poly(5).unwrap(), vec![1.0, 0.0, -1.0]);
        assert_eq!(odd_weight_poly(7).unwrap(), vec![1.0, 0.0, -2.0, 0.0, 1.0]);
        assert!(odd_weight_poly(4).is_none());
    }
}
