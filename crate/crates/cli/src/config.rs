//! Run configuration: flags and TOML files share one key set, flags win.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use zollspec::models::{Deriv, SpectralModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Window projector kernel at a list of distances.
    /// CSV: d,deriv_a,deriv_b,kernel
    Kernel,
    /// Sup of the scaled remainder over d <= δ for each (ℓ, δ, derivative).
    /// CSV: ell,nu,delta,deriv_a,deriv_b,sup_scaled_remainder
    RemainderScan,
    /// Eigenvalue counting function against the Weyl term.
    /// CSV: lambda,count,weyl_term,residual
    WeylCount,
    /// Sphere-integral quadrature against the Bessel profile.
    /// CSV: v,lhs,rhs,abs_error
    BesselCheck,
    /// Both sides of the Poisson summation identity for each σ.
    /// CSV: sigma,k_max,lhs,rhs,abs_error,truncation_estimate,gap
    PoissonCheck,
    /// Fitted decay constant of the smoothing defect on τ ∈ [-3, 3].
    /// CSV: sigma,c2,h_plus_eps,h_minus_eps
    SmoothCheck,
    /// Cluster mass fractions for exact and synthetic spectra.
    /// CSV: spectrum,seed,lambda,r,in_mass,total_mass,fraction
    ClusterReport,
    /// Monte Carlo covariance of window random waves against the exact kernel.
    /// CSV: pair,distance,empirical,exact,std_error,z_score
    RwaveCov,
    /// Sup distance between the rescaled covariance and its Bessel limit.
    /// CSV: ell,nu,deriv,sup_abs_error
    ScaledCov,
    /// Window dimension against the ν^(n-1) prediction.
    /// CSV: ell,nu,dim,prediction,ratio
    DimCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kernel => "kernel",
            Self::RemainderScan => "remainder-scan",
            Self::WeylCount => "weyl-count",
            Self::BesselCheck => "bessel-check",
            Self::PoissonCheck => "poisson-check",
            Self::SmoothCheck => "smooth-check",
            Self::ClusterReport => "cluster-report",
            Self::RwaveCov => "rwave-cov",
            Self::ScaledCov => "scaled-cov",
            Self::DimCheck => "dim-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    S2,
    S3,
    T2,
    T3,
}

impl ModelName {
    pub fn build(self) -> SpectralModel {
        match self {
            Self::S2 => SpectralModel::sphere(2),
            Self::S3 => SpectralModel::sphere(3),
            Self::T2 => SpectralModel::torus(2),
            Self::T3 => SpectralModel::torus(3),
        }
        .expect("fixed dimensions are valid")
    }

    pub fn dim(self) -> usize {
        match self {
            Self::S2 | Self::T2 => 2,
            Self::S3 | Self::T3 => 3,
        }
    }

    pub fn is_sphere(self) -> bool {
        matches!(self, Self::S2 | Self::S3)
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::S2 => "s2",
            Self::S3 => "s3",
            Self::T2 => "t2",
            Self::T3 => "t3",
        };
        f.write_str(s)
    }
}

/// Every option, unset by default. Used both as clap flags and as the
/// schema of `--config` files.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Manifold model.
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelName>,
    /// Window half width ε.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Smoothing scales σ.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// Window center ν.
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Ladder indices ℓ.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ells: Option<Vec<usize>>,
    /// Distance bounds δ for remainder scans.
    #[arg(long, global = true, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Derivative pairs `a:b`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub derivs: Option<Vec<String>>,
    /// Geodesic distances (or displacements along the first axis on tori).
    #[arg(long, global = true, value_delimiter = ',')]
    pub distances: Option<Vec<f64>>,
    /// Radii |v| for the Bessel identity.
    #[arg(long, global = true, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Frequencies λ for counting.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Cluster window half width K.
    #[arg(long = "K", global = true)]
    #[serde(rename = "K")]
    pub k_window: Option<f64>,
    /// Cluster widths r.
    #[arg(long, global = true, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// Exponent w in the cluster width r·ℓ^(-w).
    #[arg(long, global = true)]
    pub width_exponent: Option<f64>,
    /// Derivative order for cluster weights or scaled covariance.
    #[arg(long, global = true)]
    pub deriv_order: Option<u8>,
    /// Number of synthetic spectra (cluster-report).
    #[arg(long, global = true)]
    pub synthetic: Option<usize>,
    /// Jitter amplitude c of synthetic spectra.
    #[arg(long, global = true)]
    pub jitter: Option<f64>,
    /// Weight exponent p of synthetic spectra.
    #[arg(long, global = true)]
    pub power: Option<f64>,
    /// Monte Carlo sample count M.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Number of point pairs (rwave-cov).
    #[arg(long, global = true)]
    pub pairs: Option<usize>,
    /// Base seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid size for sup searches.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Largest |u - v| in the scaled covariance sup.
    #[arg(long, global = true)]
    pub s_max: Option<f64>,
    /// Quadrature nodes.
    #[arg(long, global = true)]
    pub quad_nodes: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    /// Fields of `top` take precedence over `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay!(
            self,
            top,
            model,
            eps,
            sigma,
            nu,
            ells,
            deltas,
            derivs,
            distances,
            radii,
            lambdas,
            k_window,
            r,
            width_exponent,
            deriv_order,
            synthetic,
            jitter,
            power,
            samples,
            pairs,
            seed,
            grid,
            s_max,
            quad_nodes,
            out
        )
    }

    pub fn from_toml(text: &str) -> Result<Settings, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Settings, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Fully resolved configuration; serialized verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelName,
    pub eps: f64,
    pub sigma: Vec<f64>,
    pub nu: f64,
    pub ells: Vec<usize>,
    pub deltas: Vec<f64>,
    pub derivs: Vec<String>,
    pub distances: Vec<f64>,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    #[serde(rename = "K")]
    pub k_window: f64,
    pub r: Vec<f64>,
    pub width_exponent: f64,
    pub deriv_order: u8,
    pub synthetic: usize,
    pub jitter: f64,
    pub power: f64,
    pub samples: usize,
    pub pairs: usize,
    pub seed: u64,
    pub grid: usize,
    pub s_max: f64,
    pub quad_nodes: usize,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl RunConfig {
    /// Apply per-command defaults and validate, reporting every violation.
    pub fn resolve(command: Command, s: Settings) -> Result<RunConfig, Vec<String>> {
        use Command::*;
        let default_model = if command == WeylCount {
            ModelName::T2
        } else {
            ModelName::S2
        };
        let default_ells = match command {
            RemainderScan => vec![25, 200],
            ClusterReport => vec![10, 50, 100, 300],
            ScaledCov => vec![50, 200],
            DimCheck => vec![1, 2, 5, 10, 20, 50, 100],
            _ => vec![50],
        };
        let default_derivs = match command {
            RemainderScan => vec!["0:0".into(), "1:0".into(), "0:1".into()],
            _ => vec!["0:0".into()],
        };
        let default_grid = match command {
            RemainderScan => 256,
            _ => 64,
        };
        let cfg = RunConfig {
            command,
            model: s.model.unwrap_or(default_model),
            eps: s.eps.unwrap_or(0.5),
            sigma: s.sigma.unwrap_or_else(|| vec![0.2, 0.1, 0.05]),
            nu: s.nu.unwrap_or(50.5),
            ells: s.ells.unwrap_or(default_ells),
            deltas: s.deltas.unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05]),
            derivs: s.derivs.unwrap_or(default_derivs),
            distances: s
                .distances
                .unwrap_or_else(|| vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0]),
            radii: s.radii.unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 5.0]),
            lambdas: s.lambdas.unwrap_or_else(|| vec![10.0, 50.0, 100.0, 200.0]),
            k_window: s.k_window.unwrap_or(10.0),
            r: s.r.unwrap_or_else(|| vec![1.0]),
            width_exponent: s.width_exponent.unwrap_or(0.5),
            deriv_order: s.deriv_order.unwrap_or(0),
            synthetic: s.synthetic.unwrap_or(0),
            jitter: s.jitter.unwrap_or(0.5),
            power: s.power.unwrap_or(1.0),
            samples: s.samples.unwrap_or(10_000),
            pairs: s.pairs.unwrap_or(20),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            grid: s.grid.unwrap_or(default_grid),
            s_max: s.s_max.unwrap_or(5.0),
            quad_nodes: s.quad_nodes.unwrap_or(64),
            out: s.out.unwrap_or_else(|| PathBuf::from("zollspec-out")),
        };
        let problems = cfg.violations();
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(problems)
        }
    }

    pub fn parsed_derivs(&self) -> Vec<Deriv> {
        self.derivs.iter().filter_map(|d| parse_deriv(d)).collect()
    }

    fn violations(&self) -> Vec<String> {
        use Command::*;
        let mut v = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let c = self.command;

        need(
            positive(self.eps),
            format!("eps must be positive and finite, got {}", self.eps),
        );
        let lists: [(&str, bool); 8] = [
            ("sigma", self.sigma.is_empty()),
            ("ells", self.ells.is_empty()),
            ("deltas", self.deltas.is_empty()),
            ("derivs", self.derivs.is_empty()),
            ("distances", self.distances.is_empty()),
            ("radii", self.radii.is_empty()),
            ("lambdas", self.lambdas.is_empty()),
            ("r", self.r.is_empty()),
        ];
        for (name, empty) in lists {
            need(!empty, format!("{name} must not be empty"));
        }
        need(
            self.sigma.iter().all(|&x| positive(x)),
            "every sigma must be positive".into(),
        );
        need(
            self.deltas.iter().all(|&x| positive(x)),
            "every delta must be positive".into(),
        );
        need(
            self.r.iter().all(|&x| positive(x)),
            "every r must be positive".into(),
        );
        need(
            self.distances.iter().all(|x| x.is_finite() && *x >= 0.0),
            "distances must be nonnegative".into(),
        );
        need(
            self.radii.iter().all(|x| x.is_finite() && *x >= 0.0),
            "radii must be nonnegative".into(),
        );
        need(
            self.lambdas.iter().all(|x| x.is_finite() && *x >= 0.0),
            "lambdas must be nonnegative".into(),
        );
        for d in &self.derivs {
            need(
                parse_deriv(d).is_some(),
                format!("derivative `{d}` is not of the form a:b with a, b <= 2"),
            );
        }
        need(
            positive(self.nu),
            format!("nu must be positive, got {}", self.nu),
        );
        need(
            positive(self.k_window),
            format!("K must be positive, got {}", self.k_window),
        );
        need(
            self.width_exponent.is_finite() && self.width_exponent >= 0.0,
            "width-exponent must be nonnegative".into(),
        );
        need(
            self.jitter.is_finite() && self.jitter >= 0.0,
            "jitter must be nonnegative".into(),
        );
        need(
            self.power.is_finite() && self.power >= 0.0,
            "power must be nonnegative".into(),
        );
        need(
            self.quad_nodes >= 32,
            format!("quad-nodes must be at least 32, got {}", self.quad_nodes),
        );
        need(positive(self.s_max), "s-max must be positive".into());
        need(
            self.grid >= if c == RemainderScan { 64 } else { 2 },
            format!("grid too small: {}", self.grid),
        );
        need(self.pairs >= 1, "pairs must be at least 1".into());
        need(
            self.samples >= 100,
            format!("samples must be at least 100, got {}", self.samples),
        );

        let m = self.model;
        let sphere_only = matches!(
            c,
            RemainderScan | PoissonCheck | ClusterReport | ScaledCov | DimCheck
        );
        need(
            !sphere_only || m.is_sphere(),
            format!("{} needs a sphere model, got {m}", c.name()),
        );
        need(
            c != RwaveCov || m != ModelName::S3,
            "rwave-cov supports s2, t2 and t3".into(),
        );
        need(
            c != ClusterReport || self.deriv_order <= 2,
            "deriv-order must be at most 2".into(),
        );
        need(
            c != ScaledCov || self.deriv_order <= 1,
            "scaled-cov deriv-order must be 0 or 1".into(),
        );
        need(
            c != ScaledCov || self.ells.iter().all(|&l| l >= 1),
            "scaled-cov needs ℓ >= 1".into(),
        );
        v.extend(writable(&self.out));
        v
    }
}

pub fn parse_deriv(s: &str) -> Option<Deriv> {
    let (a, b) = s.split_once(':')?;
    let a: u8 = a.trim().parse().ok()?;
    let b: u8 = b.trim().parse().ok()?;
    (a <= 2 && b <= 2).then(|| Deriv::new(a, b))
}

fn writable(dir: &Path) -> Option<String> {
    let probe = dir.join(".zollspec-write-probe");
    let ok = std::fs::create_dir_all(dir).is_ok() && std::fs::write(&probe, b"").is_ok();
    let _ = std::fs::remove_file(&probe);
    (!ok).then(|| format!("output directory {} is not writable", dir.display()))
}
