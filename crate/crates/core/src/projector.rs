//! Spectral windows, exact projector kernels and the remainder against the
//! universal Bessel term.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, Deriv, ModelKind, Spectrum};
use crate::specfun::{scaling_profile, scaling_profile_derivative, QuadratureRule};

/// A closed frequency interval `[center - half_width, center + half_width]`
/// together with the levels of a spectrum that fall inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    center: f64,
    half_width: f64,
    selected: Vec<usize>,
}

impl Window {
    pub(crate) fn from_indices(center: f64, half_width: f64, selected: Vec<usize>) -> Self {
        Self {
            center,
            half_width,
            selected,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Positions into [`Spectrum::levels`].
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    /// `dim(H)`: the summed multiplicity of the selected levels.
    pub fn dimension(&self, spectrum: &Spectrum) -> u64 {
        self.selected
            .iter()
            .map(|&i| spectrum.levels()[i].multiplicity)
            .sum()
    }
}

/// Select every level with `|λ - center| <= half_width`.
pub fn make_window(spectrum: &Spectrum, center: f64, half_width: f64) -> Result<Window> {
    if !(half_width > 0.0) {
        return Err(Error::Domain(format!(
            "half width must be positive, got {half_width}"
        )));
    }
    spectrum.require_cover(center + half_width)?;
    let selected = spectrum
        .levels()
        .iter()
        .enumerate()
        .filter(|(_, l)| (l.lambda - center).abs() <= half_width)
        .map(|(i, _)| i)
        .collect();
    Ok(Window {
        center,
        half_width,
        selected,
    })
}

/// Where the second point sits relative to the first.
#[derive(Debug, Clone, PartialEq)]
pub enum Separation {
    /// Geodesic angle on a sphere.
    Geodesic(f64),
    /// `x - y` on a torus.
    Displacement(Vec<f64>),
}

/// `Π_window(x, y)` or one of its derivatives.
pub fn projector_kernel(
    spectrum: &Spectrum,
    window: &Window,
    separation: &Separation,
    deriv: Deriv,
) -> Result<f64> {
    let model = spectrum.model();
    match (model.kind(), separation) {
        (ModelKind::Sphere, Separation::Geodesic(theta)) => {
            let mut acc = 0.0;
            for &i in window.selected() {
                let l = spectrum.levels()[i].index;
                acc += models::sphere_level_kernel(model.dim(), l, *theta, deriv)?;
            }
            // Validate the angle even for an empty window.
            if window.is_empty() {
                models::sphere_level_kernel(model.dim(), 0, *theta, deriv)?;
            }
            Ok(acc)
        }
        (ModelKind::Torus, Separation::Displacement(dx)) => {
            Ok(models::torus_kernel(spectrum, window, dx, deriv)?.re)
        }
        (kind, sep) => Err(Error::Unsupported(format!(
            "separation {sep:?} does not match a {kind:?} model"
        ))),
    }
}

/// `(2π/T) ν^{n-1} F_n(ν d)` and its `d`-derivatives.
pub fn universal_term(dim: usize, period: f64, nu: f64, d: f64, deriv: Deriv) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::Domain(format!(
            "distance must be nonnegative, got {d}"
        )));
    }
    deriv.check()?;
    let k = deriv.total();
    let prefactor = 2.0 * PI / period * nu.powi(dim as i32 - 1 + k as i32);
    let profile = if k == 0 {
        scaling_profile(dim, nu * d)?
    } else {
        scaling_profile_derivative(dim, nu * d, k)?
    };
    Ok(prefactor * profile * deriv.sign())
}

/// `R_ε(l; d)`: the windowed projector at `ν_l` minus the universal term.
pub fn remainder(spectrum: &Spectrum, eps: f64, l: usize, d: f64, deriv: Deriv) -> Result<f64> {
    let model = spectrum.model();
    let nu = model.ladder(l)?;
    let window = make_window(spectrum, nu, eps)?;
    remainder_in_window(spectrum, &window, d, deriv)
}

fn remainder_in_window(spectrum: &Spectrum, window: &Window, d: f64, deriv: Deriv) -> Result<f64> {
    let model = spectrum.model();
    let exact = projector_kernel(spectrum, window, &Separation::Geodesic(d), deriv)?;
    let universal = universal_term(model.dim(), model.period(), window.center(), d, deriv)?;
    Ok(exact - universal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub ell: usize,
    pub nu: f64,
    pub delta: f64,
    pub deriv: Deriv,
    /// `sup_{d <= δ} ν^{1-n-|α|-|β|} |∂^α ∂^β R|`.
    pub sup_scaled_remainder: f64,
    /// Distance at which the supremum was attained.
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderScan {
    pub eps: f64,
    pub ells: Vec<usize>,
    pub deltas: Vec<f64>,
    pub derivs: Vec<Deriv>,
    pub grid_points: usize,
    /// Ordered by `ell`, then `delta`, then `deriv`.
    pub entries: Vec<ScanEntry>,
}

impl RemainderScan {
    pub fn get(&self, ell: usize, delta: f64, deriv: Deriv) -> Option<&ScanEntry> {
        self.entries
            .iter()
            .find(|e| e.ell == ell && e.delta == delta && e.deriv == deriv)
    }
}

pub const MIN_SCAN_GRID: usize = 64;

/// Tabulate the normalized supremum of the remainder over `d ∈ [0, δ]`.
///
/// The supremum is taken over a uniform grid of `grid_points` nodes and then
/// refined by golden-section search between the neighbours of the grid argmax.
pub fn remainder_scan(
    spectrum: &Spectrum,
    eps: f64,
    ells: &[usize],
    deltas: &[f64],
    derivs: &[Deriv],
    grid_points: usize,
) -> Result<RemainderScan> {
    if grid_points < MIN_SCAN_GRID {
        return Err(Error::Domain(format!(
            "scan grid needs at least {MIN_SCAN_GRID} points, got {grid_points}"
        )));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(0.0..=PI).contains(&d)) {
        return Err(Error::Domain(format!("scan radius {d} outside [0, π]")));
    }
    for deriv in derivs {
        deriv.check()?;
    }
    let model = spectrum.model();
    let windows = ells
        .iter()
        .map(|&l| make_window(spectrum, model.ladder(l)?, eps))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for (wi, &l) in ells.iter().enumerate() {
        for &delta in deltas {
            for &deriv in derivs {
                jobs.push((wi, l, delta, deriv));
            }
        }
    }
    let entries = jobs
        .par_iter()
        .map(|&(wi, ell, delta, deriv)| {
            let window = &windows[wi];
            let nu = window.center();
            let scale = nu.powi(1 - model.dim() as i32 - deriv.total() as i32);
            let g = |d: f64| -> Result<f64> {
                Ok(scale * remainder_in_window(spectrum, window, d, deriv)?.abs())
            };
            let (argmax, sup) = grid_sup(g, delta, grid_points)?;
            Ok(ScanEntry {
                ell,
                nu,
                delta,
                deriv,
                sup_scaled_remainder: sup,
                argmax,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RemainderScan {
        eps,
        ells: ells.to_vec(),
        deltas: deltas.to_vec(),
        derivs: derivs.to_vec(),
        grid_points,
        entries,
    })
}

fn grid_sup<G: Fn(f64) -> Result<f64>>(g: G, delta: f64, points: usize) -> Result<(f64, f64)> {
    if delta == 0.0 {
        return Ok((0.0, g(0.0)?));
    }
    let h = delta / (points - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..points {
        let v = g(h * i as f64)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = h * best.0.saturating_sub(1) as f64;
    let hi = (h * (best.0 + 1) as f64).min(delta);
    let (x, v) = golden_max(&g, lo, hi, 40)?;
    if v > best.1 {
        Ok((x, v))
    } else {
        Ok((h * best.0 as f64, best.1))
    }
}

fn golden_max<G: Fn(f64) -> Result<f64>>(
    g: &G,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    for _ in 0..iters {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d)?;
        }
    }
    Ok(if gc > gd { (c, gc) } else { (d, gd) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCount {
    pub lambda: f64,
    pub count: u64,
    /// `count - C_n vol(M) λ^n` with `C_n = ω_n / (2π)^n`.
    pub residual: f64,
}

/// `#{j : λ_j <= λ}` with multiplicity, and its deviation from the Weyl term.
pub fn weyl_count(spectrum: &Spectrum, lambda: f64) -> Result<WeylCount> {
    spectrum.require_cover(lambda)?;
    let count = spectrum
        .levels()
        .iter()
        .take_while(|l| l.lambda <= lambda)
        .map(|l| l.multiplicity)
        .sum::<u64>();
    let model = spectrum.model();
    let leading = model.weyl_constant() * model.volume() * lambda.powi(model.dim() as i32);
    Ok(WeylCount {
        lambda,
        count,
        residual: count as f64 - leading,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
}

/// Compare `(2π)^{-n} ∫_{S^{n-1}} e^{i<v,ω>} dσ(ω)` by quadrature with `F_n(|v|)`.
///
/// `n = 2` uses the periodic trapezoid rule in the angle; `n = 3` uses
/// Gauss–Legendre in the polar angle with the `sin θ` area factor. The
/// imaginary part vanishes by symmetry, so only the real part is integrated.
pub fn bessel_identity_check(dim: usize, v: f64, quad_nodes: usize) -> Result<IdentityCheck> {
    if quad_nodes < 32 {
        return Err(Error::Domain(format!(
            "need at least 32 nodes, got {quad_nodes}"
        )));
    }
    if !(v >= 0.0) {
        return Err(Error::Domain(format!("|v| must be nonnegative, got {v}")));
    }
    let lhs = match dim {
        2 => {
            let rule = QuadratureRule::periodic_trapezoid(quad_nodes, 0.0, 2.0 * PI)?;
            rule.integrate(|phi| (v * phi.cos()).cos()) / (2.0 * PI).powi(2)
        }
        3 => {
            let rule = QuadratureRule::gauss_legendre(quad_nodes, 0.0, PI)?;
            let polar = rule.integrate(|th| (v * th.cos()).cos() * th.sin());
            2.0 * PI * polar / (2.0 * PI).powi(3)
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "sphere-integral check implemented for n in {{2, 3}}, got {dim}"
            )))
        }
    };
    let rhs = scaling_profile(dim, v)?;
    Ok(IdentityCheck {
        lhs,
        rhs,
        abs_error: (lhs - rhs).abs(),
    })
}
