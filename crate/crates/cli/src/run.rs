//! Subcommand dispatch, CSV tables and the run manifest.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use zollspec::clusters::{
    cluster_mass_fraction, synthetic_zoll_spectrum, ClusterParams, WeightedSpectrum,
};
use zollspec::models::{sphere_distance, Spectrum};
use zollspec::projector::{
    bessel_identity_check, make_window, projector_kernel, remainder_scan, weyl_count, Separation,
};
use zollspec::randomwaves::{
    dim_window, empirical_covariance, scaled_covariance_sup, EnsembleSpec,
};
use zollspec::smoothing::{h_bound_check, h_eval, poisson_check};

use crate::config::{Command, ModelName, RunConfig};

pub const BESSEL_TOL: f64 = 1e-10;
pub const POISSON_TOL: f64 = 1e-8;
pub const MONOTONE_SLACK: f64 = 1e-15;
pub const HALVING_FACTOR: f64 = 1.3;
pub const DEFECT_SPREAD: f64 = 2.0;
pub const DEFICIT_FACTOR: f64 = 3.0;
pub const MC_Z: f64 = 5.0;
pub const DIM_EXACT_TOL: f64 = 1e-12;
pub const DIM_APPROX_TOL: f64 = 0.05;
pub const SMOOTH_STEP: f64 = 1e-3;
pub const SMOOTH_RANGE: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Tables and checks produced by one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv: String,
    pub assertions: Vec<Assertion>,
    pub summary: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub csv: String,
    pub wall_time_seconds: f64,
    pub passed: bool,
    pub assertions: &'a [Assertion],
    pub summary: &'a Value,
}

pub enum Failure {
    Numeric(zollspec::Error),
    Io(String),
}

impl From<zollspec::Error> for Failure {
    fn from(e: zollspec::Error) -> Self {
        Self::Numeric(e)
    }
}

pub struct Written {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub passed: bool,
}

/// Compute, then write `<command>.csv` and `run.json` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<Written, Failure> {
    let t0 = Instant::now();
    let outcome = compute(cfg)?;
    let wall = t0.elapsed().as_secs_f64();
    let csv_name = format!("{}.csv", cfg.command.name());
    let csv = cfg.out.join(&csv_name);
    let manifest_path = cfg.out.join("run.json");
    let passed = outcome.assertions.iter().all(|a| a.passed);
    let manifest = Manifest {
        version: zollspec::VERSION,
        command: cfg.command.name(),
        config: cfg,
        csv: csv_name,
        wall_time_seconds: wall,
        passed,
        assertions: &outcome.assertions,
        summary: &outcome.summary,
    };
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    std::fs::write(&csv, &outcome.csv).map_err(io)?;
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(&manifest_path, text + "\n").map_err(io)?;
    Ok(Written {
        csv,
        manifest: manifest_path,
        passed,
    })
}

pub fn compute(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    match cfg.command {
        Command::Kernel => kernel(cfg),
        Command::RemainderScan => scan(cfg),
        Command::WeylCount => weyl(cfg),
        Command::BesselCheck => bessel(cfg),
        Command::PoissonCheck => poisson(cfg),
        Command::SmoothCheck => smooth(cfg),
        Command::ClusterReport => clusters(cfg),
        Command::RwaveCov => rwave(cfg),
        Command::ScaledCov => scaled(cfg),
        Command::DimCheck => dims(cfg),
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

fn largest_ell_frequency(cfg: &RunConfig) -> Result<f64, zollspec::Error> {
    cfg.model
        .build()
        .ladder(*cfg.ells.iter().max().expect("validated nonempty"))
}

fn kernel(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let model = cfg.model.build();
    let s = Spectrum::for_model(&model, cfg.nu + cfg.eps)?;
    let w = make_window(&s, cfg.nu, cfg.eps)?;
    let mut rows = Vec::new();
    for deriv in cfg.parsed_derivs() {
        for &d in &cfg.distances {
            let sep = if cfg.model.is_sphere() {
                Separation::Geodesic(d)
            } else {
                let mut x = vec![0.0; cfg.model.dim()];
                x[0] = d;
                Separation::Displacement(x)
            };
            let k = projector_kernel(&s, &w, &sep, deriv)?;
            rows.push(vec![f(d), deriv.a.to_string(), deriv.b.to_string(), f(k)]);
        }
    }
    Ok(Outcome {
        csv: table("d,deriv_a,deriv_b,kernel", rows),
        assertions: Vec::new(),
        summary: json!({ "window_dimension": w.dimension(&s) }),
    })
}

fn scan(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let s = Spectrum::for_model(
        &cfg.model.build(),
        largest_ell_frequency(cfg)? + cfg.eps + 1.0,
    )?;
    let derivs = cfg.parsed_derivs();
    let sc = remainder_scan(&s, cfg.eps, &cfg.ells, &cfg.deltas, &derivs, cfg.grid)?;
    let rows = sc.entries.iter().map(|e| {
        vec![
            e.ell.to_string(),
            f(e.nu),
            f(e.delta),
            e.deriv.a.to_string(),
            e.deriv.b.to_string(),
            f(e.sup_scaled_remainder),
        ]
    });
    let csv = table("ell,nu,delta,deriv_a,deriv_b,sup_scaled_remainder", rows);

    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let lo_ell = *cfg.ells.iter().min().expect("nonempty");
    let hi_ell = *cfg.ells.iter().max().expect("nonempty");
    let mut assertions = Vec::new();
    for d in &derivs {
        let label = format!("{}:{}", d.a, d.b);
        let at = |ell, delta| {
            sc.get(ell, delta, *d)
                .map_or(f64::NAN, |e| e.sup_scaled_remainder)
        };
        let ratios: Vec<f64> = deltas
            .windows(2)
            .map(|p| at(hi_ell, p[0]) / at(hi_ell, p[1]))
            .collect();
        let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        if !ratios.is_empty() {
            assertions.push(Assertion::new(
                &format!("decay per δ step at ℓ={hi_ell}, deriv {label}"),
                min_ratio >= HALVING_FACTOR,
                format!("smallest ratio {min_ratio:.4} (need >= {HALVING_FACTOR})"),
            ));
        }
        if hi_ell != lo_ell {
            for &delta in &deltas {
                let (a, b) = (at(lo_ell, delta), at(hi_ell, delta));
                assertions.push(Assertion::new(
                    &format!("ℓ={hi_ell} <= ℓ={lo_ell} at δ={delta}, deriv {label}"),
                    b <= a,
                    format!("{b:.6e} vs {a:.6e}"),
                ));
            }
        }
    }
    Ok(Outcome {
        csv,
        assertions,
        summary: json!({ "entries": sc.entries.len() }),
    })
}

fn weyl(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let lmax = cfg.lambdas.iter().cloned().fold(0.0, f64::max);
    let s = Spectrum::for_model(&cfg.model.build(), lmax)?;
    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    for &lam in &cfg.lambdas {
        let w = weyl_count(&s, lam)?;
        rows.push(vec![
            f(lam),
            w.count.to_string(),
            f(w.count as f64 - w.residual),
            f(w.residual),
        ]);
        if cfg.model == ModelName::T2 {
            assertions.push(Assertion::new(
                &format!("|N(λ) - πλ²| <= 10λ at λ={lam}"),
                w.residual.abs() <= 10.0 * lam,
                format!("residual {:.6e}", w.residual),
            ));
            if lam == 10.0 {
                assertions.push(Assertion::new(
                    "N(10) = 317",
                    w.count == 317,
                    format!("count {}", w.count),
                ));
            }
        }
    }
    Ok(Outcome {
        csv: table("lambda,count,weyl_term,residual", rows),
        assertions,
        summary: Value::Null,
    })
}

fn bessel(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &v in &cfg.radii {
        let c = bessel_identity_check(cfg.model.dim(), v, cfg.quad_nodes)?;
        worst = worst.max(c.abs_error);
        rows.push(vec![f(v), f(c.lhs), f(c.rhs), f(c.abs_error)]);
    }
    Ok(Outcome {
        csv: table("v,lhs,rhs,abs_error", rows),
        assertions: vec![Assertion::new(
            "quadrature matches profile",
            worst <= BESSEL_TOL,
            format!("max abs error {worst:.3e} (tolerance {BESSEL_TOL:e})"),
        )],
        summary: json!({ "abs_error": worst }),
    })
}

fn poisson(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let period = cfg.model.build().period();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut gaps = Vec::new();
    for &sigma in &cfg.sigma {
        let k_max = (2.0 / (cfg.eps * sigma * period)).ceil() as usize;
        let c = poisson_check(period, cfg.eps, sigma, k_max)?;
        let gap = (c.lhs - 2.0 * PI / period).abs();
        worst = worst.max(c.abs_error);
        gaps.push(gap);
        rows.push(vec![
            f(sigma),
            k_max.to_string(),
            f(c.lhs),
            f(c.rhs),
            f(c.abs_error),
            f(c.truncation_estimate),
            f(gap),
        ]);
    }
    // Gap measured along the σ list in the order given.
    let monotone = gaps.windows(2).all(|p| p[1] <= p[0] + MONOTONE_SLACK);
    Ok(Outcome {
        csv: table(
            "sigma,k_max,lhs,rhs,abs_error,truncation_estimate,gap",
            rows,
        ),
        assertions: vec![
            Assertion::new(
                "both sides agree",
                worst <= POISSON_TOL,
                format!("max abs error {worst:.3e} (tolerance {POISSON_TOL:e})"),
            ),
            Assertion::new(
                "gap to 2π/T shrinks along the σ list",
                monotone,
                format!("gaps {gaps:?}"),
            ),
        ],
        summary: json!({ "abs_error": worst, "gaps": gaps }),
    })
}

fn smooth(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let n = (2.0 * SMOOTH_RANGE / SMOOTH_STEP).round() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| -SMOOTH_RANGE + SMOOTH_STEP * i as f64)
        .collect();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut edges = true;
    for &sigma in &cfg.sigma {
        let c2 = h_bound_check(cfg.eps, sigma, 2, &grid)?;
        let hp = h_eval(cfg.eps, sigma, cfg.eps)?;
        let hm = h_eval(cfg.eps, sigma, -cfg.eps)?;
        edges &= hp.abs() <= 1.0 && hm.abs() <= 1.0;
        fits.push(c2);
        rows.push(vec![f(sigma), f(c2), f(hp), f(hm)]);
    }
    let lo = fits.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fits.iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        csv: table("sigma,c2,h_plus_eps,h_minus_eps", rows),
        assertions: vec![
            Assertion::new(
                "fitted constant stable across σ",
                hi <= DEFECT_SPREAD * lo,
                format!("max/min {:.4} (limit {DEFECT_SPREAD})", hi / lo),
            ),
            Assertion::new("|h(±ε)| <= 1", edges, String::new()),
        ],
        summary: json!({ "c2": fits }),
    })
}

fn clusters(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let model = cfg.model.build();
    let period = model.period();
    let maslov = model.maslov_index();
    let top = largest_ell_frequency(cfg)? + cfg.k_window + 1.0;
    let exact =
        WeightedSpectrum::from_spectrum(&Spectrum::for_model(&model, top)?, cfg.deriv_order)?;
    let params = |r: f64, lambda: f64| {
        ClusterParams::new(cfg.k_window, r, lambda)
            .and_then(|p| p.with_width_exponent(cfg.width_exponent))
    };
    let mut rows = Vec::new();
    let mut exact_ok = true;
    for &ell in &cfg.ells {
        let lambda = model.ladder(ell)?;
        for &r in &cfg.r {
            let rep = cluster_mass_fraction(&exact, &params(r, lambda)?, period, maslov)?;
            exact_ok &= rep.fraction == 1.0;
            rows.push(vec![
                "exact".into(),
                String::new(),
                f(lambda),
                f(r),
                f(rep.in_mass),
                f(rep.total_mass),
                f(rep.fraction),
            ]);
        }
    }
    let mut assertions = vec![Assertion::new(
        "exact spectrum fully clustered",
        exact_ok,
        String::new(),
    )];
    let mut deficits = Vec::new();
    if cfg.synthetic > 0 {
        let l_max = *cfg.ells.iter().max().expect("nonempty") + cfg.k_window.ceil() as usize + 2;
        let spectra = (0..cfg.synthetic as u64)
            .map(|i| {
                synthetic_zoll_spectrum(
                    &model,
                    l_max,
                    cfg.jitter,
                    cfg.power,
                    cfg.seed.wrapping_add(i),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        for &ell in &cfg.ells {
            let lambda = model.ladder(ell)?;
            let mut by_r = Vec::new();
            for &r in &cfg.r {
                let mut sum = 0.0;
                for (i, z) in spectra.iter().enumerate() {
                    let rep = cluster_mass_fraction(z, &params(r, lambda)?, period, maslov)?;
                    sum += 1.0 - rep.fraction;
                    let seed = cfg.seed.wrapping_add(i as u64);
                    rows.push(vec![
                        "synthetic".into(),
                        seed.to_string(),
                        f(lambda),
                        f(r),
                        f(rep.in_mass),
                        f(rep.total_mass),
                        f(rep.fraction),
                    ]);
                }
                by_r.push((r, sum / spectra.len() as f64));
            }
            for &(r, d) in &by_r {
                if let Some(&(_, d2)) = by_r.iter().find(|(r2, _)| *r2 == 2.0 * r) {
                    assertions.push(Assertion::new(
                        &format!("mean deficit drops by {DEFICIT_FACTOR}x from r={r} to r={} at λ={lambda}", 2.0 * r),
                        d2 * DEFICIT_FACTOR <= d,
                        format!("{d:.6e} -> {d2:.6e}"),
                    ));
                }
            }
            deficits.push(json!({ "lambda": lambda, "mean_deficit_by_r": by_r }));
        }
    }
    Ok(Outcome {
        csv: table("spectrum,seed,lambda,r,in_mass,total_mass,fraction", rows),
        assertions,
        summary: json!({ "synthetic": deficits }),
    })
}

fn unit(theta: f64, phi: f64) -> Vec<f64> {
    vec![
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

/// Deterministic pairs: the first fifth coincide, the rest move apart along one axis.
fn pair_points(model: ModelName, pairs: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut pts = Vec::with_capacity(2 * pairs);
    let mut dist = Vec::with_capacity(pairs);
    let same = pairs.div_ceil(5);
    for i in 0..pairs {
        let d = if i < same {
            0.0
        } else {
            0.012 * (i + 1 - same) as f64
        };
        if model.is_sphere() {
            let (th, ph) = (
                0.3 + (0.13 * i as f64) % 2.5,
                -2.5 + (0.29 * i as f64) % 5.0,
            );
            let (x, y) = (unit(th, ph), unit(th + d, ph));
            dist.push(sphere_distance(&x, &y));
            pts.push(x);
            pts.push(y);
        } else {
            let x: Vec<f64> = (0..model.dim())
                .map(|k| (0.37 + 0.91 * i as f64 + 1.3 * k as f64) % (2.0 * PI))
                .collect();
            let mut y = x.clone();
            y[0] += d;
            dist.push(d);
            pts.push(x);
            pts.push(y);
        }
    }
    (pts, dist)
}

fn rwave(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let s = Spectrum::for_model(&cfg.model.build(), cfg.nu + cfg.eps)?;
    let (points, dist) = pair_points(cfg.model, cfg.pairs);
    let pairs: Vec<(usize, usize)> = (0..cfg.pairs).map(|i| (2 * i, 2 * i + 1)).collect();
    let spec = EnsembleSpec {
        spectrum: &s,
        window: make_window(&s, cfg.nu, cfg.eps)?,
        samples: cfg.samples,
        seed: cfg.seed,
        points,
    };
    let cov = empirical_covariance(&spec, &pairs)?;
    let rows = cov.iter().enumerate().map(|(i, c)| {
        vec![
            i.to_string(),
            f(dist[i]),
            f(c.empirical),
            f(c.exact),
            f(c.std_error),
            f(c.z_score()),
        ]
    });
    let within = cov.iter().filter(|c| c.z_score() <= MC_Z).count();
    let need = cfg.pairs - cfg.pairs / 20;
    Ok(Outcome {
        csv: table("pair,distance,empirical,exact,std_error,z_score", rows),
        assertions: vec![Assertion::new(
            &format!(
                "at least {need} of {} estimates within {MC_Z} standard errors",
                cfg.pairs
            ),
            within >= need,
            format!("{within} within"),
        )],
        summary: json!({ "within": within, "window_dimension": spec.window.dimension(&s) }),
    })
}

fn scaled(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let model = cfg.model.build();
    let s = Spectrum::for_model(&model, largest_ell_frequency(cfg)? + cfg.eps + 1.0)?;
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for &ell in &cfg.ells {
        let e = scaled_covariance_sup(&s, ell, cfg.eps, cfg.deriv_order, cfg.s_max, cfg.grid)?;
        sups.push(e);
        rows.push(vec![
            ell.to_string(),
            f(model.ladder(ell)?),
            cfg.deriv_order.to_string(),
            f(e),
        ]);
    }
    let mut assertions = Vec::new();
    if let (Some(first), Some(last)) = (sups.first(), sups.last()) {
        if sups.len() > 1 {
            assertions.push(Assertion::new(
                "sup at the last ℓ is at most half the first",
                *last <= 0.5 * first,
                format!("{first:.6e} -> {last:.6e}"),
            ));
        }
    }
    Ok(Outcome {
        csv: table("ell,nu,deriv,sup_abs_error", rows),
        assertions,
        summary: json!({ "sup_abs_error": sups }),
    })
}

fn dims(cfg: &RunConfig) -> Result<Outcome, zollspec::Error> {
    let model = cfg.model.build();
    let s = Spectrum::for_model(&model, largest_ell_frequency(cfg)? + cfg.eps + 1.0)?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for &ell in &cfg.ells {
        let nu = model.ladder(ell)?;
        let c = dim_window(&s, nu, cfg.eps)?;
        ratios.push(c.ratio);
        rows.push(vec![
            ell.to_string(),
            f(nu),
            c.dim.to_string(),
            f(c.prediction),
            f(c.ratio),
        ]);
    }
    let assertion = if cfg.model == ModelName::S2 {
        let worst = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        Assertion::new(
            "ratio is exactly 1",
            worst <= DIM_EXACT_TOL,
            format!("max |ratio - 1| = {worst:.3e}"),
        )
    } else {
        let last = *ratios.last().expect("nonempty");
        Assertion::new(
            &format!("ratio within {DIM_APPROX_TOL} of 1 at the last ℓ"),
            (last - 1.0).abs() <= DIM_APPROX_TOL,
            format!("ratio {last:.6}"),
        )
    };
    Ok(Outcome {
        csv: table("ell,nu,dim,prediction,ratio", rows),
        assertions: vec![assertion],
        summary: json!({ "ratios": ratios }),
    })
}
