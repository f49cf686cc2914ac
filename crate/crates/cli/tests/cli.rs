use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zollspec(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zollspec"));
    cmd.args(args).arg("--out").arg(out);
    match threads {
        Some(t) => cmd.env("ZOLLSPEC_THREADS", t),
        None => cmd.env_remove("ZOLLSPEC_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn remainder_scan_minimal_flags_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollspec(
        &[
            "remainder-scan",
            "--model",
            "s2",
            "--eps",
            "0.5",
            "--ells",
            "25,50,100,200",
            "--deltas",
            "0.4,0.2,0.1,0.05",
        ],
        dir.path(),
        None,
    );
    // Exit 0 or 3 depending on assertions; never a config or numeric failure.
    assert!(matches!(o.status.code(), Some(0) | Some(3)), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("remainder-scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("ell,nu,delta,deriv_a,deriv_b,sup_scaled_remainder")
    );
    assert_eq!(lines.count(), 4 * 4 * 3);
    let m = manifest(dir.path());
    assert_eq!(m["config"]["ells"], serde_json::json!([25, 50, 100, 200]));
    assert_eq!(m["passed"].as_bool(), Some(o.status.code() == Some(0)));
}

#[test]
fn poisson_check_defaults_pass_with_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollspec(&["poisson-check"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let m = manifest(dir.path());
    assert!(m["summary"]["abs_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let args = [
        "rwave-cov",
        "--samples",
        "2000",
        "--pairs",
        "10",
        "--seed",
        "7",
    ];
    let runs: Vec<String> = [Some("1"), Some("8"), Some("1")]
        .iter()
        .map(|t| {
            let dir = tempfile::tempdir().unwrap();
            let o = zollspec(&args, dir.path(), *t);
            assert!(matches!(o.status.code(), Some(0) | Some(3)), "{o:?}");
            std::fs::read_to_string(dir.path().join("rwave-cov.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "model = \"s2\"\nepsilom = 0.5\n").unwrap();
    let o = zollspec(
        &["poisson-check", "--config", cfg.to_str().unwrap()],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("epsilom"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn zero_eps_is_a_config_error_listing_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollspec(
        &["poisson-check", "--eps", "0", "--model", "t2"],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("eps must be positive"), "{err}");
    assert!(err.contains("needs a sphere model"), "{err}");
    assert!(!dir.path().join("run.json").exists());
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "radii = [1.0, 2.0]\nquad-nodes = 40\n").unwrap();
    let o = zollspec(
        &[
            "bessel-check",
            "--config",
            cfg.to_str().unwrap(),
            "--quad-nodes",
            "64",
        ],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let m = manifest(dir.path());
    assert_eq!(m["config"]["quad-nodes"], 64);
    assert_eq!(m["config"]["radii"], serde_json::json!([1.0, 2.0]));
}

#[test]
fn unknown_flag_and_bad_thread_count_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        zollspec(&["kernel", "--epsilom", "1"], dir.path(), None)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        zollspec(&["kernel"], dir.path(), Some("zero"))
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn numeric_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // Lattice enumeration in three dimensions at this λ exceeds the point budget.
    let o = zollspec(
        &["weyl-count", "--model", "t3", "--lambdas", "400"],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn assertion_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // Decay factor cannot hold with a single δ pair this close.
    let o = zollspec(
        &["remainder-scan", "--ells", "50", "--deltas", "0.1,0.099"],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    assert_eq!(manifest(dir.path())["passed"], false);
}

#[test]
fn help_lists_csv_schemas() {
    let o = Command::new(env!("CARGO_BIN_EXE_zollspec"))
        .args(["help", "remainder-scan"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout)
        .contains("ell,nu,delta,deriv_a,deriv_b,sup_scaled_remainder"));
}
