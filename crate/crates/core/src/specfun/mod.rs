//! Special functions and quadrature used by the kernel computations.

pub mod bessel;
pub mod gegenbauer;
pub mod quadrature;

use std::f64::consts::PI;

pub use bessel::{bessel_j, bessel_j_half_integer, bessel_j_ratio, gamma};
pub use gegenbauer::gegenbauer_norm;
pub use quadrature::{QuadratureRule, RuleKind};

use crate::error::{Error, Result};

/// The universal profile `F_n(t) = (2π)^{-n/2} J_{(n-2)/2}(t) / t^{(n-2)/2}`.
pub fn scaling_profile(n: usize, t: f64) -> Result<f64> {
    check_profile_dim(n)?;
    let order = 0.5 * (n as f64 - 2.0);
    Ok((2.0 * PI).powf(-0.5 * n as f64) * bessel_j_ratio(order, t)?)
}

/// `k`-th derivative of `F_n` at `t`, `k <= 2`.
///
/// Uses `(t^{-a} J_a)' = -t^{-a} J_{a+1}`, so
/// `F' = -c t R_{a+1}` and `F'' = -c (R_{a+1} - t^2 R_{a+2})` with
/// `R_b(t) = J_b(t)/t^b` and `c = (2π)^{-n/2}`.
pub fn scaling_profile_derivative(n: usize, t: f64, k: u8) -> Result<f64> {
    check_profile_dim(n)?;
    if !(0.0..=bessel::MAX_ARG).contains(&t) {
        return Err(Error::Domain(format!("profile argument {t} out of range")));
    }
    let a = 0.5 * (n as f64 - 2.0);
    let c = (2.0 * PI).powf(-0.5 * n as f64);
    let v = match k {
        0 => c * bessel::jv_ratio(a, t),
        1 => -c * t * bessel::jv_ratio(a + 1.0, t),
        2 => -c * (bessel::jv_ratio(a + 1.0, t) - t * t * bessel::jv_ratio(a + 2.0, t)),
        _ => {
            return Err(Error::Domain(format!(
                "profile derivative order {k} not supported (max 2)"
            )))
        }
    };
    Ok(v)
}

fn check_profile_dim(n: usize) -> Result<()> {
    if !(2..=8).contains(&n) {
        return Err(Error::Domain(format!("dimension {n} outside [2, 8]")));
    }
    Ok(())
}

/// Volume of the unit sphere `S^{k}` in `R^{k+1}`.
pub fn sphere_volume(k: usize) -> f64 {
    let m = (k + 1) as f64;
    2.0 * PI.powf(0.5 * m) / gamma(0.5 * m)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64 + 1.0)
}
