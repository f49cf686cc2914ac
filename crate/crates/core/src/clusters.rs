//! Eigenvalue clustering around the Zoll ladder and derivative-weighted
//! diagonal spectral sums.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, ModelKind, SpectralModel, Spectrum};
use crate::projector::{make_window, Window};
use crate::rng;

fn default_width_exponent() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Window radius around `lambda`.
    pub k_window: f64,
    /// Cluster width multiplier.
    pub r: f64,
    pub lambda: f64,
    /// Clusters are `[ν_l - r l^{-w}, ν_l + r l^{-w}]`; `w = 1/2` unless set.
    #[serde(default = "default_width_exponent")]
    pub width_exponent: f64,
}

impl ClusterParams {
    pub fn new(k_window: f64, r: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            k_window,
            r,
            lambda,
            width_exponent: default_width_exponent(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_width_exponent(mut self, w: f64) -> Result<Self> {
        self.width_exponent = w;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_window > 0.0 && self.r > 0.0) {
            return Err(Error::Domain(format!(
                "K and r must be positive, got K = {}, r = {}",
                self.k_window, self.r
            )));
        }
        if !(self.width_exponent >= 0.0) {
            return Err(Error::Domain(format!(
                "width exponent must be nonnegative, got {}",
                self.width_exponent
            )));
        }
        Ok(())
    }
}

/// Whether `λ_j` lies in `A(K, r, λ)` for the ladder `(2π/T)(l + a/4)`.
pub fn cluster_set_membership(
    lambda_j: f64,
    params: &ClusterParams,
    period: f64,
    maslov_index: u32,
) -> Result<bool> {
    params.validate()?;
    if !(lambda_j >= 0.0) {
        return Err(Error::Domain(format!("eigenvalue {lambda_j} is negative")));
    }
    if !(period > 0.0) {
        return Err(Error::Domain(format!(
            "period must be positive, got {period}"
        )));
    }
    if (lambda_j - params.lambda).abs() > params.k_window {
        return Ok(false);
    }
    // Widths never exceed r for l >= 1, and ladder points are 2π/T apart.
    let reach = (PI / period + 1.0).max(params.r);
    let step = 2.0 * PI / period;
    let offset = 0.25 * maslov_index as f64;
    let lo = ((lambda_j - reach) / step - offset).ceil().max(1.0) as usize;
    let hi = ((lambda_j + reach) / step - offset).floor();
    if hi < 1.0 {
        return Ok(false);
    }
    for l in lo..=hi as usize {
        let nu = models::zoll_frequencies(period, maslov_index, l);
        if (lambda_j - nu).abs() <= params.r * (l as f64).powf(-params.width_exponent) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `Σ_{selected levels} ∂^α_x ∂^α_y Π_λ(x, x)`, differentiating along one
/// direction. The value is independent of `x` on both model families.
pub fn derivative_diag_sum(spectrum: &Spectrum, window: &Window, alpha: u8) -> Result<f64> {
    if alpha > 2 {
        return Err(Error::Unsupported(format!(
            "diagonal derivative order {alpha} (max 2)"
        )));
    }
    let model = spectrum.model();
    match model.kind() {
        ModelKind::Sphere => window
            .selected()
            .iter()
            .map(|&i| models::sphere_level_diag(model.dim(), spectrum.levels()[i].index, alpha))
            .sum(),
        ModelKind::Torus => Ok(models::torus_diag(spectrum, window.selected(), alpha)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedLevel {
    pub lambda: f64,
    pub weight: f64,
}

/// Eigenvalues with diagonal weights `Σ |∂^α φ_j(x)|²` per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpectrum {
    pub levels: Vec<WeightedLevel>,
    pub deriv_order: u8,
}

impl WeightedSpectrum {
    /// One entry per level of `spectrum`, weighted by its diagonal sum.
    pub fn from_spectrum(spectrum: &Spectrum, alpha: u8) -> Result<Self> {
        let levels = (0..spectrum.levels().len())
            .map(|i| {
                let w = Window::from_indices(spectrum.levels()[i].lambda, 0.0, vec![i]);
                Ok(WeightedLevel {
                    lambda: spectrum.levels()[i].lambda,
                    weight: derivative_diag_sum(spectrum, &w, alpha)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            levels,
            deriv_order: alpha,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub in_mass: f64,
    pub total_mass: f64,
    pub fraction: f64,
    pub params: ClusterParams,
    pub deriv_order: u8,
}

/// Share of the window mass `Σ_{|λ_j - λ| <= K} w_j` carried by `A(K, r, λ)`.
pub fn cluster_mass_fraction(
    spectrum: &WeightedSpectrum,
    params: &ClusterParams,
    period: f64,
    maslov_index: u32,
) -> Result<ClusterReport> {
    params.validate()?;
    let flags = spectrum
        .levels
        .par_iter()
        .map(|l| {
            if (l.lambda - params.lambda).abs() > params.k_window {
                return Ok(None);
            }
            Ok(Some((
                l.weight,
                cluster_set_membership(l.lambda, params, period, maslov_index)?,
            )))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut in_mass = 0.0;
    let mut total_mass = 0.0;
    let mut any = false;
    for (w, member) in flags.into_iter().flatten() {
        any = true;
        total_mass += w;
        if member {
            in_mass += w;
        }
    }
    if !any || !(total_mass > 0.0) {
        return Err(Error::EmptyWindow {
            lo: params.lambda - params.k_window,
            hi: params.lambda + params.k_window,
        });
    }
    Ok(ClusterReport {
        in_mass,
        total_mass,
        fraction: in_mass / total_mass,
        params: *params,
        deriv_order: spectrum.deriv_order,
    })
}

/// Pseudo-eigenvalues `ν_l + c u / l`, `u` uniform on `[-1, 1]`, with
/// `round((l + 1)^p)` entries per `l` and unit weights. `l = 0` is unjittered.
///
/// The draws for level `l` come from stream `l` of `seed`.
pub fn synthetic_zoll_spectrum(
    model: &SpectralModel,
    l_max: usize,
    cluster_width: f64,
    weight_exponent: f64,
    seed: u64,
) -> Result<WeightedSpectrum> {
    if !(cluster_width >= 0.0) {
        return Err(Error::Domain(format!(
            "cluster width must be nonnegative, got {cluster_width}"
        )));
    }
    if !(weight_exponent >= 0.0) {
        return Err(Error::Domain(format!(
            "weight exponent must be nonnegative, got {weight_exponent}"
        )));
    }
    let per_level = (0..=l_max)
        .into_par_iter()
        .map(|l| {
            let nu = model.ladder(l)?;
            let count = ((l as f64 + 1.0).powf(weight_exponent).round() as usize).max(1);
            let jitter = if l == 0 || cluster_width == 0.0 {
                vec![0.0; count]
            } else {
                rng::symmetric_uniforms(seed, l as u64, count)
                    .into_iter()
                    .map(|u| cluster_width * u / l as f64)
                    .collect()
            };
            Ok(jitter
                .into_iter()
                .map(|j| WeightedLevel {
                    lambda: nu + j,
                    weight: 1.0,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedSpectrum {
        levels: per_level.into_iter().flatten().collect(),
        deriv_order: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalWeylRow {
    pub lambda: f64,
    pub sum: f64,
    /// `sum / λ^{n-1+2α}`.
    pub ratio: f64,
}

/// Diagonal sums over `[λ - K, λ + K]` for each `λ`, with the normalized ratio.
pub fn local_weyl_scaling(
    spectrum: &Spectrum,
    alpha: u8,
    k_window: f64,
    lambdas: &[f64],
) -> Result<Vec<LocalWeylRow>> {
    if lambdas.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Domain("λ list must be strictly increasing".into()));
    }
    let n = spectrum.model().dim() as i32;
    lambdas
        .iter()
        .map(|&lambda| {
            let w = make_window(spectrum, lambda, k_window)?;
            let sum = derivative_diag_sum(spectrum, &w, alpha)?;
            Ok(LocalWeylRow {
                lambda,
                sum,
                ratio: sum / lambda.powi(n - 1 + 2 * alpha as i32),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Deriv;

    fn params(k: f64, r: f64, lambda: f64) -> ClusterParams {
        ClusterParams::new(k, r, lambda).unwrap()
    }

    #[test]
    fn membership_examples() {
        let t = 2.0 * PI;
        assert!(cluster_set_membership(110f64.sqrt(), &params(10.0, 1.0, 10.5), t, 2).unwrap());
        assert!(!cluster_set_membership(10.0, &params(10.0, 0.01, 10.5), t, 2).unwrap());
        assert!(!cluster_set_membership(30.0, &params(10.0, 1.0, 10.5), t, 2).unwrap());
        assert!(cluster_set_membership(-1.0, &params(10.0, 1.0, 10.5), t, 2).is_err());
        assert!(ClusterParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn membership_finds_distant_witness_for_wide_clusters() {
        // ν_1 = 1.5; 3.5 is 2 away, inside r = 4 but outside π/T + 1.
        let p = params(10.0, 4.0, 3.0);
        assert!(cluster_set_membership(3.5, &p, 2.0 * PI, 2).unwrap());
        // l = 0 is never a witness.
        let p = params(10.0, 0.1, 0.5);
        assert!(!cluster_set_membership(0.5, &p, 2.0 * PI, 2).unwrap());
    }

    #[test]
    fn membership_with_width_exponent_one() {
        let p = params(10.0, 1.0, 10.5).with_width_exponent(1.0).unwrap();
        // 1/l = 0.1 at l = 10.
        assert!(cluster_set_membership(10.59, &p, 2.0 * PI, 2).unwrap());
        assert!(!cluster_set_membership(10.61, &p, 2.0 * PI, 2).unwrap());
    }

    #[test]
    fn diag_sum_examples() {
        let s = Spectrum::sphere(2, 20).unwrap();
        let w = make_window(&s, 1.5, 0.5).unwrap();
        let v = derivative_diag_sum(&s, &w, 1).unwrap();
        assert!((v - 3.0 / (4.0 * PI)).abs() < 1e-15);
        for l in [0usize, 3, 17] {
            let w = make_window(&s, l as f64 + 0.5, 0.5).unwrap();
            let v = derivative_diag_sum(&s, &w, 0).unwrap();
            assert!((v - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-14);
        }
        let t = Spectrum::torus(2, 3.0).unwrap();
        let w = make_window(&t, 1.0, 0.1).unwrap();
        assert!((derivative_diag_sum(&t, &w, 1).unwrap() - 2.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(derivative_diag_sum(&t, &w, 3).is_err());
    }

    #[test]
    fn isotropy_formula_on_spheres() {
        for dim in [2usize, 3, 5] {
            let s = Spectrum::sphere(dim, 40).unwrap();
            for l in [1usize, 7, 40] {
                let i = l;
                let w = Window::from_indices(0.0, 0.0, vec![i]);
                let lam2 = (l * (l + dim - 1)) as f64;
                let m = models::sphere_multiplicity(dim, l).unwrap() as f64;
                let want = lam2 * m / (dim as f64 * crate::specfun::sphere_volume(dim));
                let got = derivative_diag_sum(&s, &w, 1).unwrap();
                assert!((got - want).abs() <= 1e-12 * want);
            }
        }
    }

    #[test]
    fn diag_sum_matches_mixed_kernel_derivative() {
        let s = Spectrum::sphere(3, 30).unwrap();
        let w = make_window(&s, 12.0, 0.5).unwrap();
        let k = crate::projector::projector_kernel(
            &s,
            &w,
            &crate::projector::Separation::Geodesic(0.0),
            Deriv::new(1, 1),
        )
        .unwrap();
        assert!((k - derivative_diag_sum(&s, &w, 1).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn exact_sphere_spectrum_is_fully_clustered() {
        let s = Spectrum::sphere(2, 320).unwrap();
        let ws = WeightedSpectrum::from_spectrum(&s, 0).unwrap();
        for l in [10usize, 50, 100, 300] {
            let rep = cluster_mass_fraction(&ws, &params(10.0, 1.0, l as f64 + 0.5), 2.0 * PI, 2)
                .unwrap();
            assert_eq!(rep.fraction, 1.0);
        }
        let rep = cluster_mass_fraction(&ws, &params(10.0, 1.0, 100.5), 2.0 * PI, 2).unwrap();
        assert!(rep.total_mass > 0.0);
        assert!(cluster_mass_fraction(&ws, &params(0.1, 1.0, -50.0), 2.0 * PI, 2).is_err());
    }

    #[test]
    fn synthetic_examples() {
        let m = SpectralModel::sphere(2).unwrap();
        let z = synthetic_zoll_spectrum(&m, 30, 0.0, 1.0, 5).unwrap();
        for l in &z.levels {
            let frac = l.lambda - 0.5;
            assert_eq!(frac, frac.round());
        }
        assert_eq!(z.levels.len(), (1..=31).sum::<usize>());
        let a = synthetic_zoll_spectrum(&m, 120, 0.5, 1.0, 11).unwrap();
        let b = synthetic_zoll_spectrum(&m, 120, 0.5, 1.0, 11).unwrap();
        assert_eq!(a, b);
        let c = synthetic_zoll_spectrum(&m, 120, 0.5, 1.0, 12).unwrap();
        assert_ne!(a, c);
        for l in &a.levels {
            let ell = (l.lambda - 0.5).round();
            assert!((l.lambda - (ell + 0.5)).abs() <= 0.5 / ell.max(1.0) + 1e-15);
        }
    }

    #[test]
    fn synthetic_independent_of_thread_count() {
        let m = SpectralModel::sphere(2).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| synthetic_zoll_spectrum(&m, 200, 3.0, 1.0, 99).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn wide_jitter_deficit_shrinks_with_r() {
        // Jitter c/l = 0.4 near l = 100 against width r/10.
        let m = SpectralModel::sphere(2).unwrap();
        let deficit = |r: f64| {
            let mut acc = 0.0;
            for seed in 0..8 {
                let z = synthetic_zoll_spectrum(&m, 115, 40.0, 1.0, seed).unwrap();
                let p = params(10.0, r, 100.5);
                acc += 1.0 - cluster_mass_fraction(&z, &p, 2.0 * PI, 2).unwrap().fraction;
            }
            acc / 8.0
        };
        let (d1, d2, d3) = (deficit(1.0), deficit(2.0), deficit(3.0));
        assert!((d1 - 0.75).abs() < 0.05, "{d1}");
        assert!((d2 - 0.5).abs() < 0.05, "{d2}");
        assert!(d3 < d2 && d2 < d1);
    }

    #[test]
    fn fraction_monotone_in_r_and_saturates() {
        let m = SpectralModel::sphere(2).unwrap();
        let z = synthetic_zoll_spectrum(&m, 80, 20.0, 1.0, 3).unwrap();
        let mut last = 0.0;
        for r in [0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
            let f = cluster_mass_fraction(&z, &params(10.0, r, 50.5), 2.0 * PI, 2)
                .unwrap()
                .fraction;
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= last);
            last = f;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn local_weyl_examples() {
        let s = Spectrum::sphere(2, 220).unwrap();
        for l in [20usize, 60] {
            let nu = l as f64 + 0.5;
            let rows = local_weyl_scaling(&s, 0, 1.1, &[nu]).unwrap();
            // Levels l - 1, l and l + 1 all lie within 1.1 of ν_l.
            assert!((rows[0].sum - (6 * l + 3) as f64 / (4.0 * PI)).abs() < 1e-12);
            assert!((rows[0].ratio - 3.0 / (2.0 * PI)).abs() < 1e-12);
        }
        let lambdas: Vec<f64> = (0..20).map(|i| 20.0 + 180.0 * i as f64 / 19.0).collect();
        for alpha in [0u8, 1] {
            let rows = local_weyl_scaling(&s, alpha, 1.1, &lambdas).unwrap();
            let (lo, hi) = rows.iter().fold((f64::MAX, 0f64), |(a, b), r| {
                (a.min(r.ratio), b.max(r.ratio))
            });
            assert!(lo > 0.0 && hi / lo <= 3.0, "α={alpha}: {lo} {hi}");
        }
        assert!(local_weyl_scaling(&s, 0, 1.1, &[30.0, 20.0]).is_err());
    }
}
