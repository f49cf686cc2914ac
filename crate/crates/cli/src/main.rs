use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use zollspec_cli::config::{Command, RunConfig, Settings};
use zollspec_cli::run::{run, Failure};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

/// Spectral projector experiments on round spheres and flat tori.
///
/// Each subcommand writes `<subcommand>.csv` and `run.json` into `--out`.
/// Exit codes: 0 all assertions pass, 1 configuration error, 2 numeric
/// failure, 3 assertion failure. `ZOLLSPEC_THREADS` caps the worker pool.
#[derive(Debug, Parser)]
#[command(name = "zollspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

fn config_error(lines: &[String]) -> ExitCode {
    eprintln!("configuration error:");
    for l in lines {
        eprintln!("  - {l}");
    }
    ExitCode::from(EXIT_CONFIG)
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ZOLLSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ZOLLSPEC_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG),
            };
        }
    };
    if let Err(e) = init_threads() {
        return config_error(&[e]);
    }
    let base = match &cli.config {
        Some(p) => match Settings::load(p) {
            Ok(s) => s,
            Err(e) => return config_error(&[e]),
        },
        None => Settings::default(),
    };
    let cfg = match RunConfig::resolve(cli.command, base.overlay(cli.settings)) {
        Ok(c) => c,
        Err(v) => return config_error(&v),
    };
    match run(&cfg) {
        Ok(w) => {
            println!("wrote {} and {}", w.csv.display(), w.manifest.display());
            if w.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "one or more assertions failed; see {}",
                    w.manifest.display()
                );
                ExitCode::from(EXIT_ASSERTION)
            }
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numeric failure: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Io(e)) => {
            eprintln!("cannot write outputs: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
