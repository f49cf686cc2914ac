//! Ultraspherical polynomials normalized to one at `c = 1`.
//!
//! For the sphere `S^n` the relevant parameter is `(n - 1) / 2`, and the
//! degree-`l` polynomial with that parameter is written `G_l^n`. The
//! normalized three-term recurrence reads
//!
//! ```text
//! G_{l+1}(c) = (2(l + a) c G_l(c) - l G_{l-1}(c)) / (l + 2a),   a = (n - 1)/2,
//! ```
//!
//! and differentiation shifts the dimension by two:
//! `d/dc G_l^n = l (l + n - 1) / n * G_{l-1}^{n+2}`.

use crate::error::{Error, Result};

/// Largest degree accepted by [`gegenbauer_norm`].
pub const MAX_DEGREE: usize = 5000;

/// Normalized Gegenbauer polynomial of degree `degree` for `S^dim`, or its
/// first or second derivative in `c`.
pub fn gegenbauer_norm(degree: usize, dim: usize, c: f64, deriv_order: u8) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {dim}")));
    }
    if degree > MAX_DEGREE {
        return Err(Error::Domain(format!(
            "degree {degree} exceeds {MAX_DEGREE}"
        )));
    }
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("argument {c} outside [-1, 1]")));
    }
    if deriv_order > 2 {
        return Err(Error::Domain(format!(
            "derivative order {deriv_order} not supported (max 2)"
        )));
    }
    Ok(normalized_derivative(degree, dim, c, deriv_order))
}

pub(crate) fn normalized_derivative(degree: usize, dim: usize, c: f64, deriv_order: u8) -> f64 {
    let mut factor = 1.0;
    let mut l = degree;
    let mut n = dim;
    for _ in 0..deriv_order {
        if l == 0 {
            return 0.0;
        }
        factor *= (l * (l + n - 1)) as f64 / n as f64;
        l -= 1;
        n += 2;
    }
    factor * normalized(l, n, c)
}

/// `G_l^n(c)` by upward recurrence.
pub(crate) fn normalized(degree: usize, dim: usize, c: f64) -> f64 {
    let a = 0.5 * (dim as f64 - 1.0);
    let mut prev = 1.0;
    if degree == 0 {
        return prev;
    }
    let mut cur = c;
    for l in 1..degree {
        let lf = l as f64;
        let next = (2.0 * (lf + a) * c * cur - lf * prev) / (lf + 2.0 * a);
        prev = cur;
        cur = next;
    }
    cur
}

/// `d^k/dc^k G_l^n` evaluated at `c = 1`, in closed form.
pub(crate) fn derivative_at_one(degree: usize, dim: usize, deriv_order: u8) -> f64 {
    let mut factor = 1.0;
    let mut l = degree;
    let mut n = dim;
    for _ in 0..deriv_order {
        if l == 0 {
            return 0.0;
        }
        factor *= (l * (l + n - 1)) as f64 / n as f64;
        l -= 1;
        n += 2;
    }
    factor
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_closed(l: usize, c: f64) -> f64 {
        match l {
            0 => 1.0,
            1 => c,
            2 => 0.5 * (3.0 * c * c - 1.0),
            3 => 0.5 * (5.0 * c * c * c - 3.0 * c),
            4 => (35.0 * c.powi(4) - 30.0 * c * c + 3.0) / 8.0,
            _ => unreachable!(),
        }
    }

    // Chebyshev U_l(c) / (l + 1) is the normalized polynomial for S^3.
    fn sphere3_closed(l: usize, c: f64) -> f64 {
        let u = match l {
            0 => 1.0,
            1 => 2.0 * c,
            2 => 4.0 * c * c - 1.0,
            3 => 8.0 * c.powi(3) - 4.0 * c,
            4 => 16.0 * c.powi(4) - 12.0 * c * c + 1.0,
            _ => unreachable!(),
        };
        u / (l as f64 + 1.0)
    }

    #[test]
    fn spec_examples() {
        assert_eq!(gegenbauer_norm(2, 2, 1.0, 0).unwrap(), 1.0);
        assert!((gegenbauer_norm(2, 2, 0.0, 0).unwrap() + 0.5).abs() < 1e-15);
        assert!((gegenbauer_norm(1, 2, 0.3, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recurrence_matches_closed_forms() {
        for l in 0..=4 {
            for i in 0..=40 {
                let c = -1.0 + i as f64 / 20.0;
                assert!((normalized(l, 2, c) - legendre_closed(l, c)).abs() < 1e-12);
                assert!((normalized(l, 3, c) - sphere3_closed(l, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for dim in [2, 3, 5] {
            for l in [1usize, 3, 10, 40] {
                for i in 1..40 {
                    let c = -0.95 + 1.9 * i as f64 / 40.0;
                    let fd = (normalized(l, dim, c + h) - normalized(l, dim, c - h)) / (2.0 * h);
                    let an = gegenbauer_norm(l, dim, c, 1).unwrap();
                    let tol = 1e-5 * (l * l) as f64;
                    assert!(
                        (fd - an).abs() <= tol,
                        "dim={dim} l={l} c={c}: {fd} vs {an}"
                    );

                    let fd2 = (gegenbauer_norm(l, dim, c + h, 1).unwrap()
                        - gegenbauer_norm(l, dim, c - h, 1).unwrap())
                        / (2.0 * h);
                    let an2 = gegenbauer_norm(l, dim, c, 2).unwrap();
                    assert!((fd2 - an2).abs() <= 1e-5 * (l as f64).powi(4).max(1.0));
                }
            }
        }
    }

    #[test]
    fn closed_derivatives_at_one() {
        for dim in [2, 3, 4] {
            for l in 0..30 {
                for k in 0..=2u8 {
                    let rec = normalized_derivative(l, dim, 1.0, k);
                    let closed = derivative_at_one(l, dim, k);
                    assert!((rec - closed).abs() <= 1e-12 * closed.abs().max(1.0));
                }
            }
        }
        // Legendre: P_l'(1) = l(l+1)/2.
        assert_eq!(derivative_at_one(10, 2, 1), 55.0);
    }

    #[test]
    fn bounded_by_one_on_interval() {
        for l in [50, 500, 5000] {
            for i in 0..=100 {
                let c = -1.0 + i as f64 / 50.0;
                assert!(normalized(l, 2, c).abs() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gegenbauer_norm(3, 2, 1.01, 0).is_err());
        assert!(gegenbauer_norm(3, 2, 0.0, 3).is_err());
        assert!(gegenbauer_norm(MAX_DEGREE + 1, 2, 0.0, 0).is_err());
        assert!(gegenbauer_norm(3, 1, 0.0, 0).is_err());
    }
}
