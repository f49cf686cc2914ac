use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    GaussLegendreOnInterval,
    PeriodicTrapezoid,
}

/// Nodes and positive weights for a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl QuadratureRule {
    /// Gauss–Legendre rule with `count` nodes mapped to `[a, b]`.
    pub fn gauss_legendre(count: usize, a: f64, b: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        if !(b > a) {
            return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
        }
        let (x, w) = legendre_nodes(count);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Ok(Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| half * v).collect(),
            kind: RuleKind::GaussLegendreOnInterval,
        })
    }

    /// Equispaced rule on the periodic interval `[start, start + period)`.
    pub fn periodic_trapezoid(count: usize, start: f64, period: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        if !(period > 0.0) {
            return Err(Error::Domain(format!(
                "period must be positive, got {period}"
            )));
        }
        let h = period / count as f64;
        Ok(Self {
            nodes: (0..count).map(|i| start + h * i as f64).collect(),
            weights: vec![h; count],
            kind: RuleKind::PeriodicTrapezoid,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted node sum of `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Like [`integrate`](Self::integrate) for fallible integrands; the first
    /// failure, or a non-finite value, aborts the sum.
    pub fn try_integrate<F, E>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> std::result::Result<f64, E>,
        E: std::fmt::Display,
    {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x).map_err(|e| Error::Integrand(format!("at node {x}: {e}")))?;
            if !v.is_finite() {
                return Err(Error::Integrand(format!(
                    "non-finite value {v} at node {x}"
                )));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Nodes and weights on `[-1, 1]`, nodes increasing.
fn legendre_nodes(count: usize) -> (Vec<f64>, Vec<f64>) {
    let n = count;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
