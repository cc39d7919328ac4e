//! Per-mode linear algebra of the field operator in the moving frame.
//!
//! For a frequency xi with r = |xi| the mode matrix is
//! `[[i P.xi - eps, r^2], [-1 - r^2, i P.xi - eps]]`. It is diagonalized by
//! `A = [[r, r], [i s, -i s]]` with s = sqrt(1 + r^2), the first column
//! carrying the eigenvalue `i phi1 + i P.xi - eps` where phi1 = r s.

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use num_complex::Complex64;
use std::sync::Arc;

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);

/// Dispersion relation r sqrt(1 + r^2).
pub fn phi1(r: f64) -> f64 {
    r * (1.0 + r * r).sqrt()
}

/// d phi1 / dr = (1 + 2 r^2) / sqrt(1 + r^2).
pub fn phi1_prime(r: f64) -> f64 {
    (1.0 + 2.0 * r * r) / (1.0 + r * r).sqrt()
}

/// d^2 phi1 / dr^2 = r (3 + 2 r^2) / (1 + r^2)^{3/2}.
pub fn phi1_second(r: f64) -> f64 {
    let q = 1.0 + r * r;
    r * (3.0 + 2.0 * r * r) / (q * q.sqrt())
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn mat_vec(a: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Mode matrix at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrix {
    pub xi: Vec<f64>,
    pub eps: f64,
    pub entries: Mat2,
    pub p_dot_xi: f64,
}

pub fn mode_matrix(xi: &[f64], p: &[f64], eps: f64) -> ModeMatrix {
    let r2: f64 = xi.iter().map(|k| k * k).sum();
    let pxi: f64 = xi.iter().zip(p).map(|(k, q)| k * q).sum();
    let d = C64::new(-eps, pxi);
    ModeMatrix { xi: xi.to_vec(), eps, entries: [[d, C64::new(r2, 0.0)], [C64::new(-1.0 - r2, 0.0), d]], p_dot_xi: pxi }
}

impl ModeMatrix {
    pub fn radius(&self) -> f64 {
        self.xi.iter().map(|k| k * k).sum::<f64>().sqrt()
    }

    /// Closed form (i P.xi - eps)^2 + phi1^2.
    pub fn det(&self) -> C64 {
        let d = C64::new(-self.eps, self.p_dot_xi);
        let f = phi1(self.radius());
        d * d + f * f
    }

    /// Eigenvalues (+i phi1 + i P.xi - eps, -i phi1 + i P.xi - eps).
    pub fn eigenvalues(&self) -> [C64; 2] {
        let f = phi1(self.radius());
        [C64::new(-self.eps, self.p_dot_xi + f), C64::new(-self.eps, self.p_dot_xi - f)]
    }

    /// Solve M h = b.
    pub fn solve(&self, b: [C64; 2]) -> Result<[C64; 2]> {
        let m = &self.entries;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.norm() == 0.0 {
            return Err(Error::SingularMode(format!("singular mode matrix at xi = {:?}", self.xi)));
        }
        Ok([(m[1][1] * b[0] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - m[1][0] * b[0]) / det])
    }
}

/// Eigenvector matrix for r > 0.
pub fn a_matrix(r: f64) -> Mat2 {
    let s = (1.0 + r * r).sqrt();
    [[C64::new(r, 0.0), C64::new(r, 0.0)], [C64::new(0.0, s), C64::new(0.0, -s)]]
}

/// Inverse of [`a_matrix`].
pub fn a_inverse(r: f64) -> Mat2 {
    let s = (1.0 + r * r).sqrt();
    let u = 0.5 / r;
    let v = C64::new(0.0, -0.5 / s);
    [[C64::new(u, 0.0), v], [C64::new(u, 0.0), -v]]
}

/// Amplitudes in the eigenbasis. The zero mode is carried verbatim as
/// (h1, h2) because the basis degenerates there.
#[derive(Debug, Clone)]
pub struct DiagonalPair {
    grid: Arc<SpectralGrid>,
    pub a_plus: Vec<C64>,
    pub a_minus: Vec<C64>,
}

pub fn to_diagonal(h1: &[C64], h2: &[C64], grid: &Arc<SpectralGrid>) -> DiagonalPair {
    let n = grid.modes();
    let mut ap = vec![ZERO; n];
    let mut am = vec![ZERO; n];
    for m in 0..n {
        let r = grid.radius(m);
        if r == 0.0 {
            ap[m] = h1[m];
            am[m] = h2[m];
            continue;
        }
        let a = mat_vec(&a_inverse(r), [h1[m], h2[m]]);
        ap[m] = a[0];
        am[m] = a[1];
    }
    DiagonalPair { grid: grid.clone(), a_plus: ap, a_minus: am }
}

pub fn from_diagonal(d: &DiagonalPair) -> (Vec<C64>, Vec<C64>) {
    let n = d.grid.modes();
    let mut h1 = vec![ZERO; n];
    let mut h2 = vec![ZERO; n];
    for m in 0..n {
        let r = d.grid.radius(m);
        if r == 0.0 {
            h1[m] = d.a_plus[m];
            h2[m] = d.a_minus[m];
            continue;
        }
        let h = mat_vec(&a_matrix(r), [d.a_plus[m], d.a_minus[m]]);
        h1[m] = h[0];
        h2[m] = h[1];
    }
    (h1, h2)
}

/// (e^z - 1) / z, entire.
pub fn phi_tilde(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let mut term = C64::new(1.0, 0.0);
        let mut s = term;
        for k in 1..8 {
            term *= z / (k as f64 + 1.0);
            s += term;
        }
        s
    } else {
        (z.exp() - 1.0) / z
    }
}

/// (e^z - 1 - z) / z^2, entire.
pub fn phi2(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let mut term = C64::new(0.5, 0.0);
        let mut s = term;
        for k in 1..8 {
            term *= z / (k as f64 + 2.0);
            s += term;
        }
        s
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Advance one mode by `dt` under h' = M h + g with constant forcing g.
///
/// Negative `dt` runs the exact flow backwards.
pub fn propagate_mode(h: [C64; 2], g: [C64; 2], xi: &[f64], p: &[f64], eps: f64, dt: f64) -> [C64; 2] {
    let r = xi.iter().map(|k| k * k).sum::<f64>().sqrt();
    if r == 0.0 {
        return propagate_zero_mode(h, g, eps, dt);
    }
    let pxi: f64 = xi.iter().zip(p).map(|(k, q)| k * q).sum();
    let f = phi1(r);
    let lam = [C64::new(-eps, pxi + f), C64::new(-eps, pxi - f)];
    let ainv = a_inverse(r);
    let a = mat_vec(&ainv, h);
    let gg = mat_vec(&ainv, g);
    let mut out = [ZERO; 2];
    for k in 0..2 {
        let z = lam[k] * dt;
        out[k] = z.exp() * a[k] + phi_tilde(z) * gg[k] * dt;
    }
    mat_vec(&a_matrix(r), out)
}

/// Zero mode: M = -eps I + N with N = [[0, 0], [-1, 0]], N^2 = 0.
pub fn propagate_zero_mode(h: [C64; 2], g: [C64; 2], eps: f64, dt: f64) -> [C64; 2] {
    let z = C64::new(-eps * dt, 0.0);
    let e = z.exp();
    let c0 = phi_tilde(z) * dt;
    // integral of u e^{-eps u} over [0, dt] equals dt^2 e^z phi2(-z)
    let c1 = e * phi2(-z) * dt * dt;
    // e^{dt M} h = e (h + dt N h); integral of e^{u M} g = c0 g + c1 N g
    [e * h[0] + c0 * g[0], e * (h[1] - dt * h[0]) + c0 * g[1] - c1 * g[0]]
}

/// Multiply by (|xi| / sqrt(1 + |xi|^2))^s.
pub fn apply_u_power(spec: &[C64], grid: &SpectralGrid, s: f64) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(spec.len());
    for (m, v) in spec.iter().enumerate() {
        let r = grid.radius(m);
        let mult = if r == 0.0 {
            if s > 0.0 {
                0.0
            } else if s == 0.0 {
                1.0
            } else if v.norm() != 0.0 {
                return Err(Error::SingularMode("negative power of U applied to a field with nonzero mean".into()));
            } else {
                0.0
            }
        } else {
            (r / (1.0 + r * r).sqrt()).powf(s)
        };
        out.push(v * mult);
    }
    Ok(out)
}
