//! Invariants checked over randomized inputs.

use bosegas::dispersion::{free_evolution_supnorm, GaussianProfile, SphereKernel};
use bosegas::dynamics::particle_force;
use bosegas::field::FieldState;
use bosegas::friction::{envelope_peaks, friction_limit_scalar, richardson, sphere_area, RemainderSample};
use bosegas::grid::SpectralGrid;
use bosegas::output::fmt_f64;
use bosegas::potential::{build_potential, RadialPotential, VProfile};
use bosegas::spectral::{from_diagonal, phi1, propagate_mode, to_diagonal, C64};
use proptest::prelude::*;
use std::sync::Arc;

fn random_field(grid: &Arc<SpectralGrid>, seed: u64) -> FieldState {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = grid.modes();
    let re: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let im: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FieldState::from_physical(grid.clone(), &re, &im).unwrap()
}

fn grid_for(dim: usize) -> Arc<SpectralGrid> {
    let n = [64, 16, 8][dim - 1];
    Arc::new(SpectralGrid::new(dim, n, 20.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn richardson_removes_linear_and_quadratic_terms(f0 in -10.0..10.0f64, a in -5.0..5.0f64, b in -5.0..5.0f64, eps in 1e-3..0.5f64) {
        let f = |e: f64| f0 + a * e + b * e * e;
        let v = richardson([f(eps), f(eps / 2.0), f(eps / 4.0)], [1.0, 2.0]);
        prop_assert!((v - f0).abs() <= 1e-12 * (1.0 + f0.abs() + a.abs() + b.abs()));
    }

    #[test]
    fn number_format_round_trips(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let back: f64 = fmt_f64(v).parse().unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn diagonal_basis_round_trips(dim in 1usize..=3, seed in any::<u64>()) {
        let grid = grid_for(dim);
        let h = random_field(&grid, seed);
        let (b1, b2) = from_diagonal(&to_diagonal(&h.h1, &h.h2, &grid));
        let err = h.h1.iter().zip(&b1).chain(h.h2.iter().zip(&b2)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn free_flow_keeps_diagonal_amplitudes(dim in 1usize..=3, seed in any::<u64>(), dt in 1e-3..2.0f64) {
        let grid = grid_for(dim);
        let h = random_field(&grid, seed);
        let p = vec![0.0; dim];
        let zero = [C64::new(0.0, 0.0); 2];
        let mut s1 = h.h1.clone();
        let mut s2 = h.h2.clone();
        for m in 0..grid.modes() {
            if grid.radius(m) > 0.0 {
                let o = propagate_mode([h.h1[m], h.h2[m]], zero, grid.xi(m), &p, 0.0, dt);
                s1[m] = o[0];
                s2[m] = o[1];
            }
        }
        let a = to_diagonal(&h.h1, &h.h2, &grid);
        let b = to_diagonal(&s1, &s2, &grid);
        for m in 0..grid.modes() {
            for (x, y) in [(a.a_plus[m], b.a_plus[m]), (a.a_minus[m], b.a_minus[m])] {
                prop_assert!((x.norm() - y.norm()).abs() <= 1e-12 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn force_is_translation_covariant(dim in 1usize..=2, seed in any::<u64>(), shift in prop::collection::vec(-6i32..=6, 2)) {
        // moving the field and the particle by a lattice vector leaves the force unchanged
        let grid = grid_for(dim);
        let pot = build_potential(1.0, &VProfile::Gaussian { width: 1.0 }, 0.1, grid.clone()).unwrap();
        let h = random_field(&grid, seed);
        let a: Vec<f64> = shift[..dim].iter().map(|&k| k as f64 * grid.dx()).collect();
        let phase: Vec<C64> = (0..grid.modes())
            .map(|m| C64::from_polar(1.0, -grid.xi(m).iter().zip(&a).map(|(x, y)| x * y).sum::<f64>()))
            .collect();
        let h1: Vec<C64> = h.h1.iter().zip(&phase).map(|(z, e)| z * e).collect();
        let h2: Vec<C64> = h.h2.iter().zip(&phase).map(|(z, e)| z * e).collect();
        let moved = FieldState::from_spectra(grid.clone(), h1, h2).unwrap();
        let f0 = particle_force(&h, &pot);
        let f1 = particle_force(&moved, &pot.shifted(&a));
        let scale = f0.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        for (x, y) in f0.iter().zip(&f1) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{f0:?} {f1:?}");
        }
    }

    #[test]
    fn friction_limit_vanishes_below_sound_and_drags_above(n in 0.5..2.0f64, width in 0.5..2.0f64, d in prop::sample::select(vec![3usize, 5]), p in 0.0..3.0f64) {
        prop_assume!((p - 1.0).abs() > 1e-3);
        let pot = RadialPotential::new(n, width, 0.1).unwrap();
        let f = friction_limit_scalar(p, &pot, d).unwrap();
        if p < 1.0 {
            prop_assert_eq!(f, 0.0);
        } else {
            prop_assert!(f < 0.0);
        }
    }

    #[test]
    fn dispersion_relation_is_superlinear(r in 0.0..50.0f64, s in 0.0..50.0f64) {
        prop_assert!(phi1(r) >= r);
        if r < s {
            prop_assert!(phi1(r) < phi1(s));
        }
    }

    #[test]
    fn sphere_kernel_is_bounded_by_the_area(d in 1usize..=6, r in 0.0..200.0f64) {
        let k = SphereKernel::new(d).unwrap();
        prop_assert!(k.eval(r).abs() <= sphere_area(d - 1) * (1.0 + 1e-12));
    }

    #[test]
    fn sphere_kernel_routes_agree_at_the_switch(d in 2usize..=6, off in -0.5..2.0f64) {
        // the series loses digits to cancellation further out, hence the switch
        let k = SphereKernel::new(d).unwrap();
        let r = k.switch_point() + off;
        let scale = 2.0 * k.envelope(r).norm();
        prop_assert!((k.series(r) - k.asymptotic(r)).abs() <= 1e-8 * scale);
    }

    #[test]
    fn envelope_peaks_are_local_maxima(vals in prop::collection::vec(-1.0..1.0f64, 3..60)) {
        let samples: Vec<RemainderSample> = vals.iter().enumerate().map(|(i, &v)| RemainderSample { t: i as f64, value: v }).collect();
        for p in envelope_peaks(&samples) {
            let i = p.t as usize;
            prop_assert!(i > 0 && i + 1 < vals.len());
            prop_assert!(vals[i].abs() >= vals[i - 1].abs() && vals[i].abs() > vals[i + 1].abs());
        }
    }
}

#[test]
fn sup_norm_decreases_in_time() {
    let profile = GaussianProfile { width: 1.0 };
    for d in [1usize, 3, 5] {
        let mut prev = f64::INFINITY;
        for t in [4.0, 8.0, 16.0, 32.0] {
            let s = free_evolution_supnorm(profile, t, d).unwrap();
            assert!(s.value < prev, "d={d} t={t}: {} >= {prev}", s.value);
            prev = s.value;
        }
    }
}
