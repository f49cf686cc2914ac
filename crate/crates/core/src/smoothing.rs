//! The mollifier `ρ`, the smoothed window `ψ_{ε,σ}`, the defect `h`, the
//! Poisson summation check and spectrally summed smoothed projectors.
//!
//! `ρ̂` equals one on `[-1, 1]`, vanishes outside `[-2, 2]` and on
//! `1 <= |t| <= 2` equals `1 - S^k(|t| - 1)`, where
//! `S(u) = f(u) / (f(u) + f(1 - u))`, `f(u) = exp(-1/u)`, and `S^k` is the
//! `k`-fold composition. For `k = 1` this is the indicator of `[-1.5, 1.5]`
//! convolved with the bump `S'(· + 1/2)`.
//!
//! `ψ_{ε,σ}` is evaluated through the antiderivative
//! `P(x) = ∫_0^x ρ = (1/π) ∫_0^2 ρ̂(t) sin(tx)/t dt`,
//! so `ψ_{ε,σ}(μ) = P((μ + ε)/σ) - P((μ - ε)/σ)` with no truncation in `τ`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, Deriv, ModelKind, Spectrum};
use crate::projector::{Separation, Window};
use crate::specfun::QuadratureRule;

const PANEL_NODES: usize = 16;
const MAX_SMOOTHNESS: u32 = 3;
/// `τ` range over which the decay constants are fitted. Further out the
/// computed `ρ` is at the rounding floor.
const FIT_RANGE: f64 = 400.0;
const FIT_STEP: f64 = 0.25;
/// `P` is replaced by `±1/2` once `|1/2 - P|` stays below this on the
/// sampled range `[0, TAIL_SCAN]`.
const TAIL_TOLERANCE: f64 = 1e-14;
const TAIL_SCAN: f64 = 1500.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstant {
    pub order: u32,
    /// Smallest `C` with `|ρ(τ)| <= C (1 + |τ|)^{-order}` on the fit grid.
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct MollifierPair {
    smoothness: u32,
    tail: [TailConstant; 3],
    tail_radius: f64,
    unit_rule: QuadratureRule,
}

impl MollifierPair {
    pub fn new(transition_smoothness: u32) -> Result<Self> {
        if !(1..=MAX_SMOOTHNESS).contains(&transition_smoothness) {
            return Err(Error::Domain(format!(
                "transition smoothness {transition_smoothness} outside [1, {MAX_SMOOTHNESS}]"
            )));
        }
        let mut m = Self {
            smoothness: transition_smoothness,
            tail: [2, 4, 8].map(|order| TailConstant {
                order,
                constant: 0.0,
            }),
            tail_radius: f64::INFINITY,
            unit_rule: QuadratureRule::gauss_legendre(PANEL_NODES, -1.0, 1.0)?,
        };
        let steps = (FIT_RANGE / FIT_STEP) as usize;
        for i in 0..=steps {
            let tau = FIT_STEP * i as f64;
            let r = m.rho(tau).abs();
            for tc in m.tail.iter_mut() {
                tc.constant = tc.constant.max(r * (1.0 + tau).powi(tc.order as i32));
            }
        }
        let mut radius = None;
        for i in (0..=TAIL_SCAN as usize).rev() {
            let x = i as f64;
            if (0.5 - m.raw_antiderivative(x)).abs() > TAIL_TOLERANCE {
                radius = Some(x + 1.0);
                break;
            }
        }
        match radius {
            Some(r) if r < TAIL_SCAN => m.tail_radius = r,
            _ => {
                return Err(Error::Domain(format!(
                    "mollifier tail does not settle below {TAIL_TOLERANCE} within {TAIL_SCAN}"
                )))
            }
        }
        Ok(m)
    }

    /// The `k = 1` mollifier, built once.
    pub fn standard() -> &'static MollifierPair {
        static STANDARD: OnceLock<MollifierPair> = OnceLock::new();
        STANDARD.get_or_init(|| MollifierPair::new(1).expect("standard mollifier"))
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    /// Fitted constants for `N = 2, 4, 8`.
    pub fn tail_constants(&self) -> &[TailConstant; 3] {
        &self.tail
    }

    /// Beyond this `|x|`, `P(x)` is taken as `±1/2`; the sampled deviation
    /// there is below `1e-14`.
    pub fn tail_radius(&self) -> f64 {
        self.tail_radius
    }

    pub fn rho_hat(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 1.0 {
            1.0
        } else if a >= 2.0 {
            0.0
        } else {
            let mut u = a - 1.0;
            for _ in 0..self.smoothness {
                u = smoothstep(u);
            }
            1.0 - u
        }
    }

    /// `ρ(τ) = (1/π) ∫_0^2 ρ̂(t) cos(tτ) dt`.
    pub fn rho(&self, tau: f64) -> f64 {
        let plateau = if tau == 0.0 { 1.0 } else { tau.sin() / tau };
        let per_unit = (tau.abs() / 2.0).ceil() as usize;
        let slope = self.panels(1.0, 2.0, per_unit.max(24), |t| {
            self.rho_hat(t) * (t * tau).cos()
        });
        (plateau + slope) / PI
    }

    /// `P(x) = ∫_0^x ρ`.
    pub fn rho_antiderivative(&self, x: f64) -> f64 {
        if x.abs() >= self.tail_radius {
            return 0.5 * x.signum();
        }
        self.raw_antiderivative(x)
    }

    fn raw_antiderivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        self.transform(x, |t, x| (t * x).sin() / t) / PI
    }

    /// `|∫_x^∞ ρ|` bound from the fitted `N = 8` constant.
    pub fn tail_mass_bound(&self, x: f64) -> f64 {
        let x = x.abs();
        self.tail[2].constant / (7.0 * (1.0 + x).powi(7))
    }

    fn transform<K: Fn(f64, f64) -> f64>(&self, x: f64, kernel: K) -> f64 {
        // Keep the phase change per panel near two radians.
        let per_unit = (x.abs() / 2.0).ceil() as usize;
        let inner = self.panels(0.0, 1.0, per_unit.max(2), |t| kernel(t, x));
        let outer = self.panels(1.0, 2.0, per_unit.max(24), |t| {
            self.rho_hat(t) * kernel(t, x)
        });
        inner + outer
    }

    fn panels<F: Fn(f64) -> f64>(&self, a: f64, b: f64, count: usize, f: F) -> f64 {
        let h = (b - a) / count as f64;
        let mut acc = 0.0;
        for p in 0..count {
            let mid = a + h * (p as f64 + 0.5);
            let half = 0.5 * h;
            let s: f64 = self
                .unit_rule
                .nodes()
                .iter()
                .zip(self.unit_rule.weights())
                .map(|(&z, &w)| w * f(mid + half * z))
                .sum();
            acc += half * s;
        }
        acc
    }

    /// `ψ_{ε,σ}(μ) = ∫_{-ε}^{ε} σ^{-1} ρ((μ - s)/σ) ds`.
    pub fn psi(&self, eps: f64, sigma: f64, mu: f64) -> Result<f64> {
        check_scales(eps, sigma)?;
        Ok(self.rho_antiderivative((mu + eps) / sigma)
            - self.rho_antiderivative((mu - eps) / sigma))
    }

    /// `ψ̂_{ε,σ}(t) = ρ̂(σt) 2 sin(tε)/t`.
    pub fn psi_hat(&self, eps: f64, sigma: f64, t: f64) -> Result<f64> {
        check_scales(eps, sigma)?;
        if t == 0.0 {
            return Ok(2.0 * eps);
        }
        Ok(self.rho_hat(sigma * t) * 2.0 * (t * eps).sin() / t)
    }

    /// `h_{ε,σ}(τ) = 1_{[-ε, ε]}(τ) - ψ_{ε,σ}(τ)`.
    pub fn h(&self, eps: f64, sigma: f64, tau: f64) -> Result<f64> {
        let ind = if tau.abs() <= eps { 1.0 } else { 0.0 };
        Ok(ind - self.psi(eps, sigma, tau)?)
    }

    /// Smallest `C` with `|h(τ)| <= C (1 + ||τ| - ε|/σ)^{-N}` on `tau_grid`.
    pub fn h_bound(&self, eps: f64, sigma: f64, order: u32, tau_grid: &[f64]) -> Result<f64> {
        if ![2, 4, 8].contains(&order) {
            return Err(Error::Domain(format!(
                "decay order {order} not in {{2, 4, 8}}"
            )));
        }
        let mut c: f64 = 0.0;
        for &tau in tau_grid {
            let w = (1.0 + (tau.abs() - eps).abs() / sigma).powi(order as i32);
            c = c.max(self.h(eps, sigma, tau)?.abs() * w);
        }
        Ok(c)
    }
}

fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let f = |v: f64| (-1.0 / v).exp();
    let (a, b) = (f(u), f(1.0 - u));
    a / (a + b)
}

fn check_scales(eps: f64, sigma: f64) -> Result<()> {
    if !(eps > 0.0 && sigma > 0.0 && eps.is_finite() && sigma.is_finite()) {
        return Err(Error::Domain(format!(
            "ε and σ must be positive, got ε = {eps}, σ = {sigma}"
        )));
    }
    Ok(())
}

pub fn make_mollifier(transition_smoothness: u32) -> Result<MollifierPair> {
    MollifierPair::new(transition_smoothness)
}

pub fn psi_eval(eps: f64, sigma: f64, mu: f64) -> Result<f64> {
    MollifierPair::standard().psi(eps, sigma, mu)
}

pub fn psi_hat_eval(eps: f64, sigma: f64, t: f64) -> Result<f64> {
    MollifierPair::standard().psi_hat(eps, sigma, t)
}

pub fn h_eval(eps: f64, sigma: f64, tau: f64) -> Result<f64> {
    MollifierPair::standard().h(eps, sigma, tau)
}

pub fn h_bound_check(eps: f64, sigma: f64, order: u32, tau_grid: &[f64]) -> Result<f64> {
    MollifierPair::standard().h_bound(eps, sigma, order, tau_grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
    /// Bound on the neglected terms of the right-hand sum.
    pub truncation_estimate: f64,
    /// Largest `|m|` kept on the right.
    pub rhs_terms: usize,
}

/// `Σ_k ψ̂_{ε,εσ}(kT)` against `(2π/T) Σ_m ψ_{1,σ}(2πm/(Tε))`.
pub fn poisson_check(period: f64, eps: f64, sigma: f64, k_max: usize) -> Result<PoissonCheck> {
    poisson_check_with(MollifierPair::standard(), period, eps, sigma, k_max)
}

pub fn poisson_check_with(
    m: &MollifierPair,
    period: f64,
    eps: f64,
    sigma: f64,
    k_max: usize,
) -> Result<PoissonCheck> {
    check_scales(eps, sigma)?;
    if !(period > 0.0) {
        return Err(Error::Domain(format!(
            "period must be positive, got {period}"
        )));
    }
    if eps >= 2.0 * PI / period {
        return Err(Error::Domain(format!(
            "ε = {eps} must be below 2π/T = {}",
            2.0 * PI / period
        )));
    }
    if eps * sigma * period * ((k_max + 1) as f64) < 2.0 {
        return Err(Error::Domain(format!(
            "k_max = {k_max} leaves nonzero terms: ρ̂(εσ(k_max+1)T) needs εσ(k_max+1)T >= 2"
        )));
    }

    let mut lhs = m.psi_hat(eps, eps * sigma, 0.0)?;
    for k in 1..=k_max {
        lhs += 2.0 * m.psi_hat(eps, eps * sigma, k as f64 * period)?;
    }

    let spacing = 2.0 * PI / (period * eps);
    // Past m_max both antiderivative arguments exceed the tail radius.
    let m_max = ((m.tail_radius() * sigma + 1.0) / spacing).ceil() as usize;
    let mut sum = m.psi(1.0, sigma, 0.0)?;
    for j in 1..=m_max {
        sum += 2.0 * m.psi(1.0, sigma, spacing * j as f64)?;
    }
    let rhs = 2.0 * PI / period * sum;

    // Σ_{m > m_max} |ψ(am)| <= Σ 2 sup_{x >= x_m} |∫_x^∞ ρ|, bounded by an integral.
    let x_first = (spacing * (m_max + 1) as f64 - 1.0) / sigma;
    let c8 = m.tail_constants()[2].constant;
    let tail_sum = 2.0
        * (m.tail_mass_bound(x_first) + sigma / spacing * c8 / (42.0 * (1.0 + x_first).powi(6)));
    let truncation_estimate = 2.0 * PI / period * 2.0 * tail_sum;

    Ok(PoissonCheck {
        lhs,
        rhs,
        abs_error: (lhs - rhs).abs(),
        truncation_estimate,
        rhs_terms: m_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedValue {
    pub value: f64,
    /// Bound on the contribution of levels whose weight was replaced by zero.
    pub tail_estimate: f64,
    pub levels_used: usize,
}

/// `Σ_λ ψ_{ε,σ}(ν - λ) Π_λ(x, y)` summed over the computed spectrum.
///
/// Levels further than `ε + σ r` from `ν`, with `r` the mollifier tail
/// radius, carry weight below `1e-16` and are only counted in the tail
/// estimate. The spectrum must cover `ν + ε + σ r`.
pub fn smoothed_projector(
    spectrum: &Spectrum,
    eps: f64,
    sigma: f64,
    nu: f64,
    separation: &Separation,
    deriv: Deriv,
) -> Result<SmoothedValue> {
    smoothed_projector_with(
        MollifierPair::standard(),
        spectrum,
        eps,
        sigma,
        nu,
        separation,
        deriv,
    )
}

pub fn smoothed_projector_with(
    m: &MollifierPair,
    spectrum: &Spectrum,
    eps: f64,
    sigma: f64,
    nu: f64,
    separation: &Separation,
    deriv: Deriv,
) -> Result<SmoothedValue> {
    check_scales(eps, sigma)?;
    deriv.check()?;
    let reach = eps + sigma * m.tail_radius();
    spectrum.require_cover(nu + reach)?;
    let model = spectrum.model();

    let mut value = 0.0;
    let mut tail = 0.0;
    let mut used = 0;
    for (i, level) in spectrum.levels().iter().enumerate() {
        let mu = nu - level.lambda;
        let bound = level_bound(spectrum, i, deriv)?;
        if mu.abs() > reach {
            let dist = (mu.abs() - eps) / sigma;
            tail += 2.0 * m.tail_mass_bound(dist) * bound;
            continue;
        }
        let w = m.psi(eps, sigma, mu)?;
        if w == 0.0 {
            continue;
        }
        let k = match (model.kind(), separation) {
            (ModelKind::Sphere, Separation::Geodesic(theta)) => {
                models::sphere_level_kernel(model.dim(), level.index, *theta, deriv)?
            }
            (ModelKind::Torus, Separation::Displacement(dx)) => {
                let single = Window::from_indices(level.lambda, 0.0, vec![i]);
                models::torus_kernel(spectrum, &single, dx, deriv)?.re
            }
            (kind, sep) => {
                return Err(Error::Unsupported(format!(
                    "separation {sep:?} does not match a {kind:?} model"
                )))
            }
        };
        value += w * k;
        used += 1;
    }
    Ok(SmoothedValue {
        value,
        tail_estimate: tail,
        levels_used: used,
    })
}

/// `sup |∂^a_x ∂^b_y Π_λ|` by Cauchy–Schwarz on the diagonal values.
fn level_bound(spectrum: &Spectrum, i: usize, deriv: Deriv) -> Result<f64> {
    let model = spectrum.model();
    let level = &spectrum.levels()[i];
    let diag = |alpha: u8| -> Result<f64> {
        match model.kind() {
            ModelKind::Sphere => models::sphere_level_diag(model.dim(), level.index, alpha),
            ModelKind::Torus => Ok(models::torus_diag(spectrum, &[i], alpha)),
        }
    };
    Ok((diag(deriv.a)? * diag(deriv.b)?).sqrt())
}
