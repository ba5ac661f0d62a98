//! End-to-end runs of the binary: exit codes, overrides, outputs, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_youngwave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

const SMALL_NOISE: &[&str] =
    &["--grid.n=512", "--noise.mc_paths=200", "--noise.decay_seeds=2", "--noise.decay_levels=[2,4]"];

#[test]
fn params_reports_a_feasible_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["params"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["details"]["verdict"]["verdict"], "feasible");
    assert!(dir.path().join("params.csv").exists());
}

#[test]
fn infeasible_params_are_a_result_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["params", "--params.a0=0.8", "--params.a=0.5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("params.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("infeasible"));
}

#[test]
fn sweep_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["params", "--params.sweep=true", "--params.cells=20", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("feasibility.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 20 * 20);
    assert!(fs::read_to_string(dir.path().join("feasibility.gp")).unwrap().contains("feasibility.csv"));
}

#[test]
fn invalid_configurations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["params", "--grid.size=3"][..],
        &["kernel-check", "--kernel.pairs=0"],
        &["noise", "--grid.n=300"],
        &["noise", "--noise.a0=2.5"],
        &["young", "--young.n_min=8", "--young.n_max=4"],
        &["solve", "--noise.a0=0.9", "--noise.measure.exponent=0.9"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 5\n[params]\na0 = 0.2\na = 0.4\n").unwrap();
    let o = run(&["params", "--config", cfg.to_str().unwrap(), "--params.a=0.3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(dir.path());
    assert_eq!(s["config"]["seed"], 5);
    assert_eq!(s["config"]["params"]["a0"], 0.2);
    assert_eq!(s["config"]["params"]["a"], 0.3);
}

#[test]
fn noise_runs_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let mut args = vec!["noise", "--seed", "9"];
        args.extend_from_slice(SMALL_NOISE);
        let o = run(&args, d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for f in ["summary.json", "noise_covariance.csv", "noise_slices.csv", "noise_path/slice_00003.bwf"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn solve_exports_solution_and_fails_when_iterations_run_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--grid.n=512", "--solve.level=4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("solution/solution.json").exists());
    assert!(dir.path().join("dalembert.csv").exists());

    let o = run(&["solve", "--grid.n=512", "--solve.level=4", "--solve.picard_max=2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(dir.path())["pass"], false);
}
