//! Closed-form spectral models: the round sphere `S^n` and the flat torus
//! `T^n = [0, 2π)^n`.
//!
//! Frequencies are square roots of Laplace eigenvalues throughout. Sphere
//! kernels are zonal, so everything is parametrized by the geodesic angle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projector::Window;
use crate::specfun::gegenbauer::{self, normalized_derivative};
use crate::specfun::{sphere_volume, unit_ball_volume};

/// Derivative orders `(a, b)` in the first and second point.
///
/// On the sphere both points move along a common geodesic, so
/// `∂_x^a ∂_y^b K = (-1)^b f^{(a+b)}(d)` for the zonal profile `f`. On the
/// torus the derivatives are taken along the first coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Deriv {
    pub a: u8,
    pub b: u8,
}

impl Deriv {
    pub const NONE: Deriv = Deriv { a: 0, b: 0 };

    pub fn new(a: u8, b: u8) -> Self {
        Self { a, b }
    }

    pub fn total(self) -> u8 {
        self.a + self.b
    }

    pub(crate) fn sign(self) -> f64 {
        if self.b.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub(crate) fn check(self) -> Result<()> {
        if self.total() > 2 {
            return Err(Error::Unsupported(format!(
                "derivative order ({}, {}) exceeds total order 2",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sphere,
    Torus,
}

/// Geometry constants of a model manifold.
///
/// For the torus `period` and `maslov_index` carry no meaning (the torus is
/// not Zoll) and are stored as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    kind: ModelKind,
    dim: usize,
    period: f64,
    maslov_index: u32,
    vol: f64,
    vol_cosphere: f64,
}

impl SpectralModel {
    pub fn sphere(dim: usize) -> Result<Self> {
        if !(2..=8).contains(&dim) {
            return Err(Error::Domain(format!(
                "sphere dimension {dim} outside [2, 8]"
            )));
        }
        let vol = sphere_volume(dim);
        Ok(Self {
            kind: ModelKind::Sphere,
            dim,
            period: 2.0 * PI,
            maslov_index: 2 * (dim as u32 - 1),
            vol,
            vol_cosphere: vol * sphere_volume(dim - 1),
        })
    }

    pub fn torus(dim: usize) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::Domain(format!(
                "torus dimension {dim} outside [2, 4]"
            )));
        }
        let vol = (2.0 * PI).powi(dim as i32);
        Ok(Self {
            kind: ModelKind::Torus,
            dim,
            period: 0.0,
            maslov_index: 0,
            vol,
            vol_cosphere: vol * sphere_volume(dim - 1),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn maslov_index(&self) -> u32 {
        self.maslov_index
    }

    /// `vol(M)`.
    pub fn volume(&self) -> f64 {
        self.vol
    }

    /// `vol(S*M) = vol(M) vol(S^{n-1})`.
    pub fn cosphere_volume(&self) -> f64 {
        self.vol_cosphere
    }

    pub fn is_zoll(&self) -> bool {
        self.kind == ModelKind::Sphere
    }

    /// Ladder frequency `ν_l` for a Zoll model.
    pub fn ladder(&self, l: usize) -> Result<f64> {
        if !self.is_zoll() {
            return Err(Error::Unsupported(
                "the torus has no Zoll frequency ladder".into(),
            ));
        }
        Ok(zoll_frequencies(self.period, self.maslov_index, l))
    }

    /// Weyl constant `C_n = ω_n / (2π)^n`.
    pub fn weyl_constant(&self) -> f64 {
        unit_ball_volume(self.dim) / (2.0 * PI).powi(self.dim as i32)
    }
}

/// `ν_l = (2π/T)(l + a/4)`.
pub fn zoll_frequencies(period: f64, maslov_index: u32, l: usize) -> f64 {
    2.0 * PI / period * (l as f64 + 0.25 * maslov_index as f64)
}

/// One eigenvalue cluster of a model: a frequency and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub lambda: f64,
    pub multiplicity: u64,
    /// Sphere degree `l`, or torus shell position (shells sorted by norm).
    pub index: usize,
}

/// Default number of lattice points a torus enumeration may touch.
pub const DEFAULT_POINT_BUDGET: u64 = 8_000_000;

/// Levels of a model up to a cutoff, plus lattice points for the torus.
#[derive(Debug, Clone)]
pub struct Spectrum {
    model: SpectralModel,
    levels: Vec<Level>,
    covered: f64,
    // Torus only: flattened lattice points of each shell, stride `dim`.
    shells: Vec<Vec<i32>>,
}

impl Spectrum {
    /// Sphere levels `l = 0..=l_max`.
    pub fn sphere(dim: usize, l_max: usize) -> Result<Self> {
        let model = SpectralModel::sphere(dim)?;
        let levels = sphere_spectrum(dim, l_max)?;
        let covered = levels.last().map_or(0.0, |l| l.lambda);
        Ok(Self {
            model,
            levels,
            covered,
            shells: Vec::new(),
        })
    }

    /// Sphere levels covering every frequency up to `lambda`.
    pub fn sphere_covering(dim: usize, lambda: f64) -> Result<Self> {
        let mut l_max = 0usize;
        while sphere_frequency(dim, l_max) < lambda {
            l_max += 1;
        }
        Self::sphere(dim, l_max)
    }

    pub fn torus(dim: usize, lambda_max: f64) -> Result<Self> {
        Self::torus_with_budget(dim, lambda_max, DEFAULT_POINT_BUDGET)
    }

    pub fn torus_with_budget(dim: usize, lambda_max: f64, budget: u64) -> Result<Self> {
        let model = SpectralModel::torus(dim)?;
        let (levels, shells) = enumerate_torus(dim, lambda_max, budget)?;
        Ok(Self {
            model,
            levels,
            covered: lambda_max,
            shells,
        })
    }

    /// Spectrum of `model` covering frequencies up to `lambda`.
    pub fn for_model(model: &SpectralModel, lambda: f64) -> Result<Self> {
        match model.kind {
            ModelKind::Sphere => Self::sphere_covering(model.dim, lambda),
            ModelKind::Torus => Self::torus(model.dim, lambda),
        }
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Every eigenvalue up to this frequency is present in [`levels`](Self::levels).
    pub fn covered(&self) -> f64 {
        self.covered
    }

    /// Lattice points of a torus shell, each a slice of length `dim`.
    pub fn shell_points(&self, shell: usize) -> impl Iterator<Item = &[i32]> {
        let dim = self.model.dim;
        self.shells
            .get(shell)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .chunks_exact(dim)
    }

    pub(crate) fn require_cover(&self, lambda: f64) -> Result<()> {
        if lambda > self.covered {
            return Err(Error::Coverage {
                needed: lambda,
                covered: self.covered,
            });
        }
        Ok(())
    }
}

fn sphere_frequency(dim: usize, l: usize) -> f64 {
    ((l * (l + dim - 1)) as f64).sqrt()
}

/// Levels `l = 0..=l_max` of `S^dim`: `λ_l = sqrt(l(l+n-1))` with the
/// dimension of degree-`l` harmonics as multiplicity.
pub fn sphere_spectrum(dim: usize, l_max: usize) -> Result<Vec<Level>> {
    if !(2..=8).contains(&dim) {
        return Err(Error::Domain(format!(
            "sphere dimension {dim} outside [2, 8]"
        )));
    }
    if l_max > gegenbauer::MAX_DEGREE {
        return Err(Error::Domain(format!(
            "degree {l_max} exceeds {}",
            gegenbauer::MAX_DEGREE
        )));
    }
    (0..=l_max)
        .map(|l| {
            Ok(Level {
                lambda: sphere_frequency(dim, l),
                multiplicity: sphere_multiplicity(dim, l)?,
                index: l,
            })
        })
        .collect()
}

/// `C(l+n, n) - C(l+n-2, n)`, exact.
pub fn sphere_multiplicity(dim: usize, l: usize) -> Result<u64> {
    let hi = binomial(l + dim, dim)?;
    let lo = if l >= 2 {
        binomial(l + dim - 2, dim)?
    } else {
        0
    };
    u64::try_from(hi - lo)
        .map_err(|_| Error::Overflow(format!("multiplicity of degree {l} on S^{dim} exceeds u64")))
}

fn binomial(n: usize, k: usize) -> Result<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // C(n-k+i, i) = C(n-k+i-1, i-1) * (n-k+i) / i is exact at every step.
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or_else(|| Error::Overflow(format!("binomial({n}, {k})")))?
            / i as u128;
    }
    Ok(acc)
}

/// The zonal level kernel `sum_{j in level l} φ_j(x) φ_j(y)` on `S^n` at
/// geodesic distance `theta`, or its derivative.
pub fn sphere_level_kernel(dim: usize, l: usize, theta: f64, deriv: Deriv) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!(
            "geodesic angle {theta} outside [0, π]"
        )));
    }
    deriv.check()?;
    let m = sphere_multiplicity(dim, l)? as f64;
    let scale = m / sphere_volume(dim);
    Ok(scale * zonal_derivative(dim, l, theta, deriv.total()) * deriv.sign())
}

/// `d^k/dθ^k G_l^n(cos θ)` for `k <= 2`.
pub(crate) fn zonal_derivative(dim: usize, l: usize, theta: f64, k: u8) -> f64 {
    let (s, c) = theta.sin_cos();
    let c = c.clamp(-1.0, 1.0);
    match k {
        0 => normalized_derivative(l, dim, c, 0),
        1 => -s * normalized_derivative(l, dim, c, 1),
        _ => s * s * normalized_derivative(l, dim, c, 2) - c * normalized_derivative(l, dim, c, 1),
    }
}

/// `∂_x^α ∂_y^α` of the level kernel on the diagonal, derivatives along one
/// direction, `|α| <= 2`.
///
/// With `f(θ) = g(cos θ)` one has `f(0) = g(1)`, `-f''(0) = g'(1)` and
/// `f''''(0) = g'(1) + 3 g''(1)`.
pub fn sphere_level_diag(dim: usize, l: usize, alpha: u8) -> Result<f64> {
    let m = sphere_multiplicity(dim, l)? as f64;
    let scale = m / sphere_volume(dim);
    let g1 = gegenbauer::derivative_at_one(l, dim, 1);
    let v = match alpha {
        0 => 1.0,
        1 => g1,
        2 => g1 + 3.0 * gegenbauer::derivative_at_one(l, dim, 2),
        _ => {
            return Err(Error::Unsupported(format!(
                "diagonal derivative order {alpha} (max 2)"
            )))
        }
    };
    Ok(scale * v)
}

fn enumerate_torus(
    dim: usize,
    lambda_max: f64,
    budget: u64,
) -> Result<(Vec<Level>, Vec<Vec<i32>>)> {
    if !(2..=4).contains(&dim) {
        return Err(Error::Domain(format!(
            "torus dimension {dim} outside [2, 4]"
        )));
    }
    if !(lambda_max >= 0.0) {
        return Err(Error::Domain(format!("negative cutoff {lambda_max}")));
    }
    let radius = lambda_max.floor() as i64;
    let estimate = unit_ball_volume(dim) * (lambda_max + (dim as f64).sqrt()).powi(dim as i32);
    if estimate > budget as f64 {
        return Err(Error::Budget {
            needed: estimate.ceil() as u64,
            budget,
        });
    }
    let r2 = lambda_max * lambda_max;
    let mut by_norm: BTreeMap<i64, Vec<i32>> = BTreeMap::new();
    let mut point = vec![0i64; dim];
    visit_ball(dim, 0, 0, radius, r2, &mut point, &mut by_norm);

    let mut levels = Vec::with_capacity(by_norm.len());
    let mut shells = Vec::with_capacity(by_norm.len());
    for (index, (norm2, pts)) in by_norm.into_iter().enumerate() {
        levels.push(Level {
            lambda: (norm2 as f64).sqrt(),
            multiplicity: (pts.len() / dim) as u64,
            index,
        });
        shells.push(pts);
    }
    Ok((levels, shells))
}

fn visit_ball(
    dim: usize,
    axis: usize,
    partial: i64,
    radius: i64,
    r2: f64,
    point: &mut [i64],
    out: &mut BTreeMap<i64, Vec<i32>>,
) {
    if axis == dim {
        if (partial as f64) <= r2 {
            out.entry(partial)
                .or_default()
                .extend(point.iter().map(|&k| k as i32));
        }
        return;
    }
    let room = (r2 - partial as f64).max(0.0).sqrt().floor() as i64;
    let room = room.min(radius);
    for k in -room..=room {
        point[axis] = k;
        visit_ball(dim, axis + 1, partial + k * k, radius, r2, point, out);
    }
}

/// `(2π)^{-n} sum_{k in window shells} ∂^a_x ∂^b_y e^{i k·(x-y)}` with `Δx = x - y`.
///
/// The imaginary part vanishes by the `k ↔ -k` symmetry of every shell and is
/// returned so callers can check it.
pub fn torus_kernel(
    spectrum: &Spectrum,
    window: &Window,
    dx: &[f64],
    deriv: Deriv,
) -> Result<Complex64> {
    let model = spectrum.model();
    if model.kind != ModelKind::Torus {
        return Err(Error::Unsupported(
            "torus kernel on a non-torus model".into(),
        ));
    }
    if dx.len() != model.dim {
        return Err(Error::Domain(format!(
            "displacement has {} components, model dimension is {}",
            dx.len(),
            model.dim
        )));
    }
    deriv.check()?;
    // (i k1)^a (-i k1)^b = i^{a+b} (-1)^b k1^{a+b}
    let phase = Complex64::i().powu(deriv.total() as u32) * deriv.sign();
    let mut acc = Complex64::new(0.0, 0.0);
    for &shell in window.selected() {
        for k in spectrum.shell_points(shell) {
            let arg: f64 = k.iter().zip(dx).map(|(&ki, &xi)| ki as f64 * xi).sum();
            let weight = (k[0] as f64).powi(deriv.total() as i32);
            acc += Complex64::from_polar(weight, arg);
        }
    }
    Ok(acc * phase / model.vol)
}

/// Diagonal sum `(2π)^{-n} sum_k k_1^{2α}` over the given shells.
pub fn torus_diag(spectrum: &Spectrum, shells: &[usize], alpha: u8) -> f64 {
    let vol = spectrum.model().vol;
    shells
        .iter()
        .flat_map(|&s| spectrum.shell_points(s))
        .map(|k| (k[0] as f64).powi(2 * alpha as i32))
        .sum::<f64>()
        / vol
}

/// Jacobian factor `Θ = (sin d / d)^{n-1}` of the exponential map on `S^n`.
pub fn theta_sphere(dim: usize, d: f64) -> Result<f64> {
    if !(0.0..PI).contains(&d) {
        return Err(Error::Domain(format!(
            "distance {d} outside [0, π): conjugate locus"
        )));
    }
    if d == 0.0 {
        return Ok(1.0);
    }
    Ok((d.sin() / d).powi(dim as i32 - 1))
}

/// Geodesic distance between unit vectors on a sphere.
pub fn sphere_distance(x: &[f64], y: &[f64]) -> f64 {
    // atan2 form is accurate at both small and near-antipodal separations.
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let cross2: f64 = {
        let nx: f64 = x.iter().map(|a| a * a).sum();
        let ny: f64 = y.iter().map(|a| a * a).sum();
        (nx * ny - dot * dot).max(0.0)
    };
    cross2.sqrt().atan2(dot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_examples() {
        assert!((zoll_frequencies(2.0 * PI, 2, 10) - 10.5).abs() < 1e-14);
        assert!((zoll_frequencies(2.0 * PI, 0, 3) - 3.0).abs() < 1e-14);
        assert!((zoll_frequencies(PI, 4, 1) - 4.0).abs() < 1e-14);
        let s3 = SpectralModel::sphere(3).unwrap();
        assert!((s3.ladder(7).unwrap() - 8.0).abs() < 1e-14);
        assert!(SpectralModel::torus(2).unwrap().ladder(1).is_err());
    }

    #[test]
    fn model_constants() {
        let s2 = SpectralModel::sphere(2).unwrap();
        assert_eq!(s2.maslov_index(), 2);
        assert!((s2.volume() - 4.0 * PI).abs() < 1e-13);
        assert!((s2.cosphere_volume() - 8.0 * PI * PI).abs() < 1e-12);
        let t2 = SpectralModel::torus(2).unwrap();
        assert!((t2.volume() - 4.0 * PI * PI).abs() < 1e-12);
        assert!((t2.cosphere_volume() - t2.volume() * 2.0 * PI).abs() < 1e-11);
        assert!(SpectralModel::sphere(1).is_err());
        assert!(SpectralModel::sphere(9).is_err());
    }

    #[test]
    fn sphere_spectrum_examples() {
        let s = sphere_spectrum(2, 10).unwrap();
        assert!((s[10].lambda - 110f64.sqrt()).abs() < 1e-14);
        assert_eq!(s[10].multiplicity, 21);
        assert_eq!(s[0].lambda, 0.0);
        assert_eq!(s[0].multiplicity, 1);
        let s3 = sphere_spectrum(3, 1).unwrap();
        assert!((s3[1].lambda - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(s3[1].multiplicity, 4);
    }

    #[test]
    fn multiplicity_matches_formula() {
        // (2l+n-1)/(n-1) * C(l+n-2, l)
        for n in 2..=8usize {
            for l in 0..60usize {
                let c = binomial(l + n - 2, l).unwrap();
                let want = (2 * l + n - 1) as u128 * c / (n - 1) as u128;
                assert_eq!(
                    sphere_multiplicity(n, l).unwrap() as u128,
                    want,
                    "n={n} l={l}"
                );
            }
        }
        assert_eq!(sphere_multiplicity(3, 7).unwrap(), 64);
    }

    #[test]
    fn multiplicity_overflow_is_reported() {
        assert!(matches!(
            sphere_multiplicity(8, 5000),
            Err(Error::Overflow(_))
        ));
        assert!(sphere_multiplicity(8, 400).is_ok());
    }

    #[test]
    fn level_kernel_examples() {
        let k = sphere_level_kernel(2, 1, 0.0, Deriv::NONE).unwrap();
        assert!((k - 3.0 / (4.0 * PI)).abs() < 1e-15);
        let k = sphere_level_kernel(2, 2, PI / 2.0, Deriv::NONE).unwrap();
        assert!((k + 5.0 / (8.0 * PI)).abs() < 1e-15);
        let k = sphere_level_kernel(2, 1, PI / 2.0, Deriv::new(1, 0)).unwrap();
        assert!((k + 3.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(sphere_level_kernel(2, 1, 3.5, Deriv::NONE).is_err());
        assert!(sphere_level_kernel(2, 1, 0.5, Deriv::new(2, 1)).is_err());
    }

    #[test]
    fn degree_two_kernel_by_explicit_harmonics() {
        // Five real degree-2 harmonics on S^2, summed directly.
        let harmonics = |p: [f64; 3]| {
            let [x, y, z] = p;
            let c1 = (15.0 / (4.0 * PI)).sqrt();
            let c0 = (5.0 / (16.0 * PI)).sqrt();
            let c2 = (15.0 / (16.0 * PI)).sqrt();
            [
                c1 * x * y,
                c1 * y * z,
                c1 * x * z,
                c0 * (3.0 * z * z - 1.0),
                c2 * (x * x - y * y),
            ]
        };
        let north = [0.0, 0.0, 1.0];
        for theta in [0.0, 0.3, 1.2, PI / 2.0, 2.9] {
            let p = [theta.sin() * 0.6, theta.sin() * 0.8, theta.cos()];
            let direct: f64 = harmonics(north)
                .iter()
                .zip(harmonics(p))
                .map(|(a, b)| a * b)
                .sum();
            let zonal = sphere_level_kernel(2, 2, theta, Deriv::NONE).unwrap();
            assert!((direct - zonal).abs() < 1e-14, "theta={theta}");
        }
    }

    #[test]
    fn level_kernel_derivatives_match_finite_differences() {
        let h = 1e-5;
        for (n, l) in [(2usize, 7usize), (3, 12), (5, 4)] {
            for i in 1..30 {
                let th = 0.1 * i as f64;
                let f = |t: f64, d: Deriv| sphere_level_kernel(n, l, t, d).unwrap();
                let fd = (f(th + h, Deriv::NONE) - f(th - h, Deriv::NONE)) / (2.0 * h);
                let scale = f(0.0, Deriv::NONE) * (l * l) as f64;
                assert!((fd - f(th, Deriv::new(1, 0))).abs() < 1e-7 * scale);
                assert!((fd + f(th, Deriv::new(0, 1))).abs() < 1e-7 * scale);
                let fd2 = (f(th + h, Deriv::new(1, 0)) - f(th - h, Deriv::new(1, 0))) / (2.0 * h);
                assert!((fd2 - f(th, Deriv::new(2, 0))).abs() < 1e-7 * scale * (l * l) as f64);
                assert!((fd2 + f(th, Deriv::new(1, 1))).abs() < 1e-7 * scale * (l * l) as f64);
            }
        }
    }

    #[test]
    fn trace_identity() {
        for n in [2usize, 3, 4] {
            let vol = sphere_volume(n);
            for l in [0usize, 1, 5, 77, 300] {
                let k = sphere_level_kernel(n, l, 0.0, Deriv::NONE).unwrap();
                let m = sphere_multiplicity(n, l).unwrap() as f64;
                assert!((vol * k - m).abs() <= 1e-12 * m);
            }
        }
    }

    #[test]
    fn diagonal_derivatives_match_zonal_profile() {
        // -f''(0) and f''''(0) by finite differences of the zonal kernel.
        let h = 1e-3;
        for (n, l) in [(2usize, 3usize), (2, 10), (3, 6)] {
            let f = |t: f64| sphere_level_kernel(n, l, t.abs(), Deriv::NONE).unwrap();
            let f2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let d1 = sphere_level_diag(n, l, 1).unwrap();
            assert!((d1 + f2).abs() < 1e-4 * d1.abs(), "n={n} l={l}");
            let g = |t: f64| sphere_level_kernel(n, l, t.abs(), Deriv::new(2, 0)).unwrap();
            let f4 = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
            let d2 = sphere_level_diag(n, l, 2).unwrap();
            assert!(
                (d2 - f4).abs() < 1e-3 * d2.abs(),
                "n={n} l={l}: {d2} vs {f4}"
            );
        }
        let d = sphere_level_diag(2, 1, 1).unwrap();
        assert!((d - 3.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn torus_enumeration_examples() {
        let s = Spectrum::torus(2, 1.5).unwrap();
        let got: Vec<(f64, u64)> = s
            .levels()
            .iter()
            .map(|l| (l.lambda, l.multiplicity))
            .collect();
        assert_eq!(got.len(), 3);
        assert_eq!(got[0], (0.0, 1));
        assert_eq!(got[1], (1.0, 4));
        assert!((got[2].0 - 2f64.sqrt()).abs() < 1e-15 && got[2].1 == 4);

        let s = Spectrum::torus(2, 0.5).unwrap();
        assert_eq!(s.levels().len(), 1);

        let s = Spectrum::torus(2, 10.0).unwrap();
        let total: u64 = s.levels().iter().map(|l| l.multiplicity).sum();
        let mut brute = 0u64;
        for x in -10i64..=10 {
            for y in -10i64..=10 {
                if x * x + y * y <= 100 {
                    brute += 1;
                }
            }
        }
        assert_eq!(total, brute);
        assert_eq!(total, 317);
    }

    #[test]
    fn torus_budget_guard() {
        assert!(matches!(
            Spectrum::torus_with_budget(3, 100.0, 1_000_000),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn levels_strictly_increasing() {
        for spec in [
            Spectrum::sphere(3, 50).unwrap(),
            Spectrum::torus(3, 12.0).unwrap(),
        ] {
            assert!(spec.levels().windows(2).all(|w| w[0].lambda < w[1].lambda));
            assert!(spec.levels().iter().all(|l| l.multiplicity >= 1));
        }
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_sphere(2, 0.0).unwrap(), 1.0);
        assert!((theta_sphere(2, PI / 2.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((theta_sphere(3, PI / 2.0).unwrap() - 4.0 / (PI * PI)).abs() < 1e-15);
        assert!(theta_sphere(2, PI).is_err());
    }

    #[test]
    fn mehler_heine_convergence() {
        let mut sups = Vec::new();
        for l in [25usize, 50, 100, 200] {
            let nu = l as f64 + 0.5;
            let sup = (0..=500)
                .map(|i| {
                    let t = 5.0 * i as f64 / 500.0;
                    let p = normalized_derivative(l, 2, (t / nu).cos(), 0);
                    (p - crate::specfun::bessel::jv(0.0, t)).abs()
                })
                .fold(0.0, f64::max);
            sups.push(sup);
        }
        assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
        assert!(sups[2] <= sups[0] / 3.0);
    }
}
