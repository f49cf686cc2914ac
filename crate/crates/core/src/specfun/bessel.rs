//! Bessel functions of the first kind for real order.
//!
//! Three evaluation regimes are stitched together:
//!
//! * `t <= 12`: the defining power series. The largest term is below `5e3` for
//!   every supported order, so cancellation costs at most four digits.
//! * `12 < t <= 500`: Miller's backward recurrence started well above
//!   `max(t, order)`, normalized with the Neumann-type sum
//!   `(t/2)^a = sum_k (a + 2k) Γ(a + k) / k! J_{a+2k}(t)` where `a` is the
//!   fractional part of the order.
//! * `t > 500`: Hankel's asymptotic expansion.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Largest order accepted by the public entry points.
pub const MAX_ORDER: f64 = 10.0;
/// Largest argument accepted by the public entry points.
pub const MAX_ARG: f64 = 1.0e4;

const SERIES_LIMIT: f64 = 12.0;
const ASYMPTOTIC_LIMIT: f64 = 500.0;

/// `J_order(t)` for `order ∈ [0, 10]` and `t ∈ [0, 1e4]`.
pub fn bessel_j(order: f64, t: f64) -> Result<f64> {
    check_order(order)?;
    check_arg(t)?;
    Ok(jv(order, t))
}

/// `J_order(t) / t^order`, continuous at `t = 0` where it equals
/// `1 / (2^order Γ(order + 1))`.
pub fn bessel_j_ratio(order: f64, t: f64) -> Result<f64> {
    check_order(order)?;
    check_arg(t)?;
    Ok(jv_ratio(order, t))
}

fn check_order(order: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&order) {
        return Err(Error::Domain(format!(
            "Bessel order {order} outside [0, {MAX_ORDER}]"
        )));
    }
    Ok(())
}

fn check_arg(t: f64) -> Result<()> {
    if !(0.0..=MAX_ARG).contains(&t) {
        return Err(Error::Domain(format!(
            "Bessel argument {t} outside [0, {MAX_ARG}]"
        )));
    }
    Ok(())
}

/// Unchecked evaluation; callers inside the crate use orders up to `MAX_ORDER + 2`.
pub(crate) fn jv(order: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if order == 0.0 { 1.0 } else { 0.0 };
    }
    if t <= SERIES_LIMIT {
        (t / 2.0).powf(order) * series_reduced(order, t)
    } else if t <= ASYMPTOTIC_LIMIT {
        miller(order, t)
    } else {
        hankel(order, t)
    }
}

pub(crate) fn jv_ratio(order: f64, t: f64) -> f64 {
    if t <= SERIES_LIMIT {
        series_reduced(order, t) / 2f64.powf(order)
    } else {
        jv(order, t) / t.powf(order)
    }
}

/// `sum_k (-1)^k (t/2)^{2k} / (k! Γ(k + order + 1))`.
fn series_reduced(order: f64, t: f64) -> f64 {
    let q = 0.25 * t * t;
    let mut term = 1.0 / gamma(order + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + order));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 0.5 * t {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    sum
}

fn miller(order: f64, t: f64) -> f64 {
    let frac = order - order.floor();
    let target = order.floor() as usize;
    let scale = t.max(order);
    let mut start = (scale + (400.0 * scale).sqrt() + 16.0).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    // Backward recurrence J_{k-1} = 2(a+k)/t J_k - J_{k+1} on unnormalized values.
    let mut upper = 0.0;
    let mut current = 1.0e-30;
    let mut at_target = 0.0;
    let mut norm = 0.0;

    // Γ(a + k) / k! for the even indices, built upward and consumed downward.
    let half = start / 2;
    let mut gamma_ratio = vec![0.0; half + 1];
    gamma_ratio[0] = gamma(frac + 1.0);
    if half >= 1 {
        gamma_ratio[1] = gamma(frac + 1.0);
        for k in 1..half {
            gamma_ratio[k + 1] = gamma_ratio[k] * (frac + k as f64) / (k as f64 + 1.0);
        }
    }

    let mut k = start;
    loop {
        if k == target {
            at_target = current;
        }
        if k.is_multiple_of(2) {
            let m = k / 2;
            let weight = if m == 0 {
                gamma_ratio[0]
            } else {
                (frac + k as f64) * gamma_ratio[m]
            };
            norm += weight * current;
        }
        if k == 0 {
            break;
        }
        let lower = 2.0 * (frac + k as f64) / t * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if current.abs() > 1e200 {
            current *= 1e-200;
            upper *= 1e-200;
            norm *= 1e-200;
            at_target *= 1e-200;
        }
    }
    at_target * (t / 2.0).powf(frac) / norm
}

fn hankel(order: f64, t: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * t);
        // P takes the even terms with signs (-, +, ...), Q the odd ones with (+, -, ...).
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 || k > 60 {
            break;
        }
        k += 1;
    }
    let chi = t - (0.5 * order * PI + FRAC_PI_4);
    (2.0 / (PI * t)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_{k + 1/2}(t)` from the closed trigonometric forms (spherical Bessel
/// functions), for `k <= 4`. Independent of the general-order path.
pub fn bessel_j_half_integer(k: usize, t: f64) -> Result<f64> {
    if k > 4 {
        return Err(Error::Domain(format!(
            "closed half-integer form supports k <= 4, got {k}"
        )));
    }
    check_arg(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t < 0.5 + k as f64 {
        // Upward recurrence loses accuracy here; use the series of the spherical function.
        let mut term = 1.0;
        for j in 1..=k {
            term *= t / (2 * j + 1) as f64;
        }
        let mut sum = term;
        let mut j = 0.0;
        let q = 0.5 * t * t;
        loop {
            j += 1.0;
            term *= -q / (j * (2.0 * (k as f64 + j) + 1.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return Ok(sum * (2.0 * t / PI).sqrt());
    }
    let (s, c) = t.sin_cos();
    let mut prev = s / t;
    if k == 0 {
        return Ok(prev * (2.0 * t / PI).sqrt());
    }
    let mut cur = s / (t * t) - c / t;
    for j in 1..k {
        let next = (2 * j + 1) as f64 / t * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur * (2.0 * t / PI).sqrt())
}

/// Γ(x) for `x > 0` by the Lanczos approximation (g = 7, nine terms).
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let tt = x + G + 0.5;
    (2.0 * PI).sqrt() * tt.powf(x + 0.5) * (-tt).exp() * acc
}
