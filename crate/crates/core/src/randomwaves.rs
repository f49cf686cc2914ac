//! Monochromatic random waves: explicit real orthonormal bases, Gaussian
//! sampling, exact and empirical covariances, and the scaled-coordinate
//! covariance limit.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, Deriv, ModelKind, Spectrum};
use crate::projector::{make_window, projector_kernel, Separation, Window};
use crate::rng;
use crate::specfun::{scaling_profile, scaling_profile_derivative};

/// Samples per parallel work unit.
const CHUNK: usize = 256;

/// `φ_j(point)` for member `member` of level `level` (a position in
/// [`Spectrum::levels`]).
///
/// On `S²` the members are real spherical harmonics with `m = member - l`:
/// `m < 0` uses `sin(|m|φ)`, `m > 0` uses `cos(mφ)`. Points are unit vectors
/// in `R³`. On `Tⁿ` member `2i` is the cosine and `2i + 1` the sine wave of
/// the `i`-th lattice vector of the shell whose first nonzero entry is
/// positive; the zero shell has the single constant member.
pub fn basis_eval(spectrum: &Spectrum, level: usize, member: usize, point: &[f64]) -> Result<f64> {
    let lv = spectrum.levels().get(level).ok_or(Error::Index {
        index: level,
        size: spectrum.levels().len(),
    })?;
    if member as u64 >= lv.multiplicity {
        return Err(Error::Index {
            index: member,
            size: lv.multiplicity as usize,
        });
    }
    let model = spectrum.model();
    match model.kind() {
        ModelKind::Sphere => {
            if model.dim() != 2 {
                return Err(Error::Unsupported(format!(
                    "explicit bases are implemented on S² only, not S^{}",
                    model.dim()
                )));
            }
            let (theta, phi) = sphere_angles(point)?;
            Ok(real_harmonic(
                lv.index,
                member as i64 - lv.index as i64,
                theta,
                phi,
            ))
        }
        ModelKind::Torus => {
            check_len(point, model.dim())?;
            let waves = torus_half_shell(spectrum, level);
            Ok(torus_member(&waves, member, point, model.dim()))
        }
    }
}

fn check_len(point: &[f64], want: usize) -> Result<()> {
    if point.len() != want {
        return Err(Error::Domain(format!(
            "point has {} coordinates, expected {want}",
            point.len()
        )));
    }
    Ok(())
}

fn sphere_angles(point: &[f64]) -> Result<(f64, f64)> {
    check_len(point, 3)?;
    let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "point is not on the unit sphere (|x| = {norm})"
        )));
    }
    let theta = point[2].clamp(-1.0, 1.0).acos();
    let phi = point[1].atan2(point[0]);
    Ok((theta, phi))
}

/// Fully normalized associated Legendre values `q_l^m(cos θ)` for one `m`,
/// with `∫_{S²} (q_l^m(cos θ) e^{imφ})² = 1`.
fn normalized_legendre(l: usize, m: usize, theta: f64) -> f64 {
    let (x, s) = (theta.cos(), theta.sin());
    let mut qmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        qmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    if l == m {
        return qmm;
    }
    let mf = m as f64;
    let mut prev = qmm;
    let mut cur = (2.0 * mf + 3.0).sqrt() * x * qmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

fn real_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let q = normalized_legendre(l, m.unsigned_abs() as usize, theta);
    match m {
        0 => q,
        m if m > 0 => std::f64::consts::SQRT_2 * q * (m as f64 * phi).cos(),
        m => std::f64::consts::SQRT_2 * q * ((-m) as f64 * phi).sin(),
    }
}

fn torus_half_shell(spectrum: &Spectrum, level: usize) -> Vec<Vec<i32>> {
    spectrum
        .shell_points(level)
        .filter(|k| k.iter().find(|&&c| c != 0).is_none_or(|&c| c > 0))
        .map(|k| k.to_vec())
        .collect()
}

fn torus_member(waves: &[Vec<i32>], member: usize, point: &[f64], dim: usize) -> f64 {
    let scale = (2.0 * PI).powf(-0.5 * dim as f64);
    let k = &waves[member / 2];
    if k.iter().all(|&c| c == 0) {
        return scale;
    }
    let arg: f64 = k.iter().zip(point).map(|(&c, &x)| c as f64 * x).sum();
    let trig = if member.is_multiple_of(2) {
        arg.cos()
    } else {
        arg.sin()
    };
    std::f64::consts::SQRT_2 * scale * trig
}

/// Values of every basis function of the window at every point, row `j`
/// holding `φ_j` at all points.
fn basis_matrix(
    spectrum: &Spectrum,
    window: &Window,
    points: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for &level in window.selected() {
        let m = spectrum.levels()[level].multiplicity as usize;
        for member in 0..m {
            rows.push(
                points
                    .iter()
                    .map(|p| basis_eval(spectrum, level, member, p))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec<'a> {
    pub spectrum: &'a Spectrum,
    pub window: Window,
    pub samples: usize,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
}

impl<'a> EnsembleSpec<'a> {
    pub fn validate(&self) -> Result<()> {
        if self.window.is_empty() {
            return Err(Error::EmptyWindow {
                lo: self.window.lo(),
                hi: self.window.hi(),
            });
        }
        if self.samples == 0 {
            return Err(Error::Domain("sample count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Realized waves, `values[s * points + p] = ψ^{(s)}(x_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realizations {
    pub samples: usize,
    pub points: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl Realizations {
    pub fn at(&self, sample: usize, point: usize) -> f64 {
        self.values[sample * self.points + point]
    }
}

/// `ψ^{(s)}(x) = dim(H)^{-1/2} Σ_j a_j^{(s)} φ_j(x)` with `a^{(s)}` the
/// normal stream `s` of `seed`.
pub fn sample_ensemble(spec: &EnsembleSpec<'_>) -> Result<Realizations> {
    spec.validate()?;
    let basis = basis_matrix(spec.spectrum, &spec.window, &spec.points)?;
    let dim = basis.len();
    let np = spec.points.len();
    let norm = 1.0 / (dim as f64).sqrt();
    let chunks: Vec<Vec<f64>> = (0..spec.samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(spec.samples);
            let mut out = Vec::with_capacity((end - c * CHUNK) * np);
            for s in c * CHUNK..end {
                let a = rng::normals(spec.seed, s as u64, dim);
                for p in 0..np {
                    let v: f64 = a.iter().zip(&basis).map(|(aj, row)| aj * row[p]).sum();
                    out.push(norm * v);
                }
            }
            out
        })
        .collect();
    Ok(Realizations {
        samples: spec.samples,
        points: np,
        dim,
        values: chunks.concat(),
    })
}

fn separation(spectrum: &Spectrum, x: &[f64], y: &[f64]) -> Result<Separation> {
    let model = spectrum.model();
    match model.kind() {
        ModelKind::Sphere => {
            check_len(x, model.dim() + 1)?;
            check_len(y, model.dim() + 1)?;
            Ok(Separation::Geodesic(models::sphere_distance(x, y)))
        }
        ModelKind::Torus => {
            check_len(x, model.dim())?;
            check_len(y, model.dim())?;
            Ok(Separation::Displacement(
                x.iter().zip(y).map(|(a, b)| a - b).collect(),
            ))
        }
    }
}

/// `K(x, y) = Π_window(x, y) / dim(H)`.
pub fn covariance_exact(spectrum: &Spectrum, window: &Window, x: &[f64], y: &[f64]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::EmptyWindow {
            lo: window.lo(),
            hi: window.hi(),
        });
    }
    let sep = separation(spectrum, x, y)?;
    Ok(projector_kernel(spectrum, window, &sep, Deriv::NONE)? / window.dimension(spectrum) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEntry {
    pub x: usize,
    pub y: usize,
    pub empirical: f64,
    pub exact: f64,
    /// Sample standard deviation of `ψ(x)ψ(y)` over `√M`.
    pub std_error: f64,
}

impl CovarianceEntry {
    /// `|empirical - exact|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.exact).abs() / self.std_error
    }
}

pub const MIN_COVARIANCE_SAMPLES: usize = 100;

/// Empirical `E[ψ(x)ψ(y)]` for each index pair into `spec.points`.
pub fn empirical_covariance(
    spec: &EnsembleSpec<'_>,
    pairs: &[(usize, usize)],
) -> Result<Vec<CovarianceEntry>> {
    if spec.samples < MIN_COVARIANCE_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_COVARIANCE_SAMPLES} samples, got {}",
            spec.samples
        )));
    }
    let np = spec.points.len();
    if let Some(&(i, j)) = pairs.iter().find(|(i, j)| *i >= np || *j >= np) {
        return Err(Error::Index {
            index: i.max(j),
            size: np,
        });
    }
    let waves = sample_ensemble(spec)?;
    covariance_from(&waves, spec, pairs)
}

/// Covariance table from already sampled waves.
pub fn covariance_from(
    waves: &Realizations,
    spec: &EnsembleSpec<'_>,
    pairs: &[(usize, usize)],
) -> Result<Vec<CovarianceEntry>> {
    let m = waves.samples as f64;
    pairs
        .iter()
        .map(|&(i, j)| {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for s in 0..waves.samples {
                let v = waves.at(s, i) * waves.at(s, j);
                sum += v;
                sum2 += v * v;
            }
            let mean = sum / m;
            let var = ((sum2 - m * mean * mean) / (m - 1.0)).max(0.0);
            Ok(CovarianceEntry {
                x: i,
                y: j,
                empirical: mean,
                exact: covariance_exact(
                    spec.spectrum,
                    &spec.window,
                    &spec.points[i],
                    &spec.points[j],
                )?,
                std_error: (var / m).sqrt(),
            })
        })
        .collect()
}

/// `exp_N(u / ν)` at the north pole of `S^n`, `u ∈ R^n`.
pub fn scaled_point(u: &[f64], nu: f64) -> Vec<f64> {
    let r = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut p: Vec<f64> = if r == 0.0 {
        vec![0.0; u.len()]
    } else {
        let s = (r / nu).sin() / r;
        u.iter().map(|v| v * s).collect()
    };
    p.push((r / nu).cos());
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledCheck {
    pub lhs: f64,
    pub limit: f64,
    pub abs_error: f64,
}

pub const SCALED_FD_STEP: f64 = 1e-3;

/// `K_{ν_l,ε}(exp(u/ν_l), exp(v/ν_l))` against
/// `(2π)^n / vol(S*M) · F_n(|u - v|)`, or their `u_1`-derivatives.
pub fn scaled_covariance_check(
    spectrum: &Spectrum,
    l: usize,
    eps: f64,
    u: &[f64],
    v: &[f64],
    deriv: u8,
) -> Result<ScaledCheck> {
    let model = spectrum.model();
    if model.kind() != ModelKind::Sphere {
        return Err(Error::Unsupported(
            "scaled covariance is defined on spheres".into(),
        ));
    }
    let n = model.dim();
    check_len(u, n)?;
    check_len(v, n)?;
    if deriv > 1 {
        return Err(Error::Unsupported(format!(
            "derivative order {deriv} (max 1)"
        )));
    }
    let nu = model.ladder(l)?;
    let norm = |w: &[f64]| w.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm(u) > nu / 4.0 || norm(v) > nu / 4.0 {
        return Err(Error::Domain(format!(
            "|u|, |v| must not exceed ν/4 = {}",
            nu / 4.0
        )));
    }
    let window = make_window(spectrum, nu, eps)?;
    let k = |uu: &[f64]| {
        covariance_exact(
            spectrum,
            &window,
            &scaled_point(uu, nu),
            &scaled_point(v, nu),
        )
    };

    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let r = norm(&diff);
    let prefactor = (2.0 * PI).powi(n as i32) / model.cosphere_volume();
    let (lhs, limit) = if deriv == 0 {
        (k(u)?, prefactor * scaling_profile(n, r)?)
    } else {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[0] += SCALED_FD_STEP;
        dn[0] -= SCALED_FD_STEP;
        let fd = (k(&up)? - k(&dn)?) / (2.0 * SCALED_FD_STEP);
        let d = if r == 0.0 {
            0.0
        } else {
            scaling_profile_derivative(n, r, 1)? * diff[0] / r
        };
        (fd, prefactor * d)
    };
    Ok(ScaledCheck {
        lhs,
        limit,
        abs_error: (lhs - limit).abs(),
    })
}

/// `sup_{s in grid on [0, s_max]} |lhs - limit|` with `u = (s/2, 1, 0, ...)`,
/// `v = (-s/2, 1, 0, ...)`, so `|u - v| = s`.
pub fn scaled_covariance_sup(
    spectrum: &Spectrum,
    l: usize,
    eps: f64,
    deriv: u8,
    s_max: f64,
    grid: usize,
) -> Result<f64> {
    if grid < 2 {
        return Err(Error::Domain(
            "scaled covariance grid needs at least 2 points".into(),
        ));
    }
    let n = spectrum.model().dim();
    (0..grid)
        .into_par_iter()
        .map(|i| {
            let s = s_max * i as f64 / (grid - 1) as f64;
            let mut u = vec![0.0; n];
            let mut v = vec![0.0; n];
            u[0] = 0.5 * s;
            v[0] = -0.5 * s;
            u[1] = 1.0;
            v[1] = 1.0;
            Ok(scaled_covariance_check(spectrum, l, eps, &u, &v, deriv)?.abs_error)
        })
        .collect::<Result<Vec<_>>>()
        .map(|e| e.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimCheck {
    pub dim: u64,
    pub prediction: f64,
    pub ratio: f64,
}

/// `dim H_{ν,ε}` against `(2π/T) vol(S*M) / (2π)^n · ν^{n-1}`.
pub fn dim_window(spectrum: &Spectrum, nu: f64, eps: f64) -> Result<DimCheck> {
    let model = spectrum.model();
    if !model.is_zoll() {
        return Err(Error::Unsupported(
            "the window dimension formula needs a Zoll period".into(),
        ));
    }
    let window = make_window(spectrum, nu, eps)?;
    if window.is_empty() {
        return Err(Error::EmptyWindow {
            lo: window.lo(),
            hi: window.hi(),
        });
    }
    let n = model.dim() as i32;
    let dim = window.dimension(spectrum);
    let prediction =
        2.0 * PI / model.period() * model.cosphere_volume() / (2.0 * PI).powi(n) * nu.powi(n - 1);
    Ok(DimCheck {
        dim,
        prediction,
        ratio: dim as f64 / prediction,
    })
}

/// First positive zero of `P_l(cos d)` in `d`, by bisection.
pub fn first_legendre_zero(l: usize) -> f64 {
    let p = |d: f64| crate::specfun::gegenbauer::normalized(l, 2, d.cos());
    let (mut lo, mut hi) = (0.0, 2.0 / (l as f64 + 0.5));
    while p(hi) > 0.0 {
        hi *= 1.1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
