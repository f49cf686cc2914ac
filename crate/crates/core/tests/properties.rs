use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use zollspec::clusters::{cluster_mass_fraction, synthetic_zoll_spectrum, ClusterParams};
use zollspec::models::{
    sphere_distance, sphere_level_kernel, sphere_multiplicity, Deriv, SpectralModel, Spectrum,
};
use zollspec::projector::{make_window, projector_kernel, weyl_count, Separation};
use zollspec::smoothing::{h_eval, psi_eval, psi_hat_eval};
use zollspec::specfun::{bessel_j, gegenbauer_norm, sphere_volume};

fn unit(theta: f64, phi: f64) -> Vec<f64> {
    vec![
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

fn angles() -> impl Strategy<Value = (f64, f64)> {
    (0.0..PI, -PI..PI)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_projector_gram_is_psd(
        pts in prop::collection::vec(angles(), 2..12),
        center in 2usize..40,
        half in 0.5f64..4.0,
    ) {
        let s = Spectrum::sphere(2, 50).unwrap();
        let w = make_window(&s, center as f64 + 0.5, half).unwrap();
        let xs: Vec<Vec<f64>> = pts.iter().map(|&(t, p)| unit(t, p)).collect();
        let n = xs.len();
        let g = DMatrix::from_fn(n, n, |i, j| {
            let d = sphere_distance(&xs[i], &xs[j]);
            projector_kernel(&s, &w, &Separation::Geodesic(d), Deriv::NONE).unwrap()
        });
        prop_assert!((g.clone() - g.transpose()).abs().max() == 0.0);
        let scale = g.diagonal().max();
        let eig = SymmetricEigen::new(g);
        prop_assert!(eig.eigenvalues.min() >= -1e-10 * scale);
    }

    #[test]
    fn torus_projector_gram_is_psd(
        pts in prop::collection::vec((0.0..2.0 * PI, 0.0..2.0 * PI), 2..10),
        center in 1.0f64..8.0,
    ) {
        let t = Spectrum::torus(2, 10.0).unwrap();
        let w = make_window(&t, center, 1.0).unwrap();
        let n = pts.len();
        let g = DMatrix::from_fn(n, n, |i, j| {
            let dx = vec![pts[i].0 - pts[j].0, pts[i].1 - pts[j].1];
            projector_kernel(&t, &w, &Separation::Displacement(dx), Deriv::NONE).unwrap()
        });
        prop_assert!((g.clone() - g.transpose()).abs().max() <= 1e-12);
        let eig = SymmetricEigen::new(g);
        prop_assert!(eig.eigenvalues.min() >= -1e-10);
    }

    #[test]
    fn level_kernel_bounded_by_diagonal(dim in 2usize..6, l in 0usize..200, theta in 0.0..PI) {
        let k = sphere_level_kernel(dim, l, theta, Deriv::NONE).unwrap();
        let diag = sphere_level_kernel(dim, l, 0.0, Deriv::NONE).unwrap();
        prop_assert!(k.abs() <= diag * (1.0 + 1e-10));
        let m = sphere_multiplicity(dim, l).unwrap() as f64;
        prop_assert!((diag * sphere_volume(dim) - m).abs() <= 1e-9 * m);
    }

    #[test]
    fn gegenbauer_bounded(dim in 2usize..9, l in 0usize..2000, c in -1.0f64..1.0) {
        prop_assert!(gegenbauer_norm(l, dim, c, 0).unwrap().abs() <= 1.0 + 1e-10);
    }

    #[test]
    fn bessel_three_term_recurrence(order in 1.0f64..9.0, t in 0.5f64..2000.0) {
        let lhs = bessel_j(order - 1.0, t).unwrap() + bessel_j(order + 1.0, t).unwrap();
        let rhs = 2.0 * order / t * bessel_j(order, t).unwrap();
        let scale = (2.0 / (PI * t)).sqrt().max(bessel_j(order, t).unwrap().abs());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale * (1.0 + 2.0 * order / t));
    }

    #[test]
    fn psi_and_defect_identities(eps in 0.1f64..1.5, sigma in 0.02f64..0.5, mu in -5.0f64..5.0) {
        let p = psi_eval(eps, sigma, mu).unwrap();
        // ψ = P(a) - P(b) with P = ∫_0 ρ; sup P ≈ 0.5836 and the deepest
        // dip of P(a) - P(b), a > b, is about -0.1210.
        prop_assert!((-0.122..=1.168).contains(&p));
        let ind = if mu.abs() <= eps { 1.0 } else { 0.0 };
        prop_assert!((h_eval(eps, sigma, mu).unwrap() + p - ind).abs() <= 1e-14);
        prop_assert_eq!(psi_eval(eps, sigma, -mu).unwrap(), p);
        prop_assert!(psi_hat_eval(eps, sigma, mu).unwrap().abs() <= 2.0 * eps + 1e-15);
    }

    #[test]
    fn cluster_fraction_is_monotone(seed in 0u64..1000, c in 0.0f64..60.0, r1 in 0.05f64..5.0, dr in 0.0f64..5.0) {
        let m = SpectralModel::sphere(2).unwrap();
        let z = synthetic_zoll_spectrum(&m, 70, c, 1.0, seed).unwrap();
        let f = |r: f64| cluster_mass_fraction(&z, &ClusterParams::new(5.0, r, 50.5).unwrap(), 2.0 * PI, 2)
            .unwrap()
            .fraction;
        let (a, b) = (f(r1), f(r1 + dr));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn weyl_count_is_monotone(a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let t = Spectrum::torus(2, 30.0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(weyl_count(&t, lo).unwrap().count <= weyl_count(&t, hi).unwrap().count);
    }
}

#[test]
fn cumulative_multiplicity_matches_polynomial_count() {
    // Harmonic polynomials of degree <= L in n+1 variables.
    let binom =
        |n: u64, k: u64| (1..=k).fold(1u128, |acc, i| acc * (n - k + i) as u128 / i as u128);
    for dim in 2..=6u64 {
        for big_l in [0u64, 1, 5, 40] {
            let total: u128 = (0..=big_l)
                .map(|l| sphere_multiplicity(dim as usize, l as usize).unwrap() as u128)
                .sum();
            let want = binom(big_l + dim, dim)
                + if big_l >= 1 {
                    binom(big_l + dim - 1, dim)
                } else {
                    0
                };
            assert_eq!(total, want, "n={dim} L={big_l}");
        }
    }
}
