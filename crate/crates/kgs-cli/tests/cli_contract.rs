//! End-to-end contract of the `kgs` binary: exit codes, artifact discipline,
//! and byte-level determinism of reports.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kgs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kgs"))
}

fn run_kgs(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = kgs();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning the kgs binary")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).expect("writing fixture");
}

/// Small, fast global run: one or two windows on a coarse grid.
const TINY_GLOBAL: &str = r#"
experiment = "global-solve"
seed = 1

[grid]
l = 10.0
n = 64

[time]
t_final = 0.05
dt = 5.0e-3
c_t = 0.4

[data.u0]
kind = "gaussian"
amp = 0.3
center = 5.0
width = 1.5
extension = "zero"
"#;

#[test]
fn success_writes_passing_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, TINY_GLOBAL);
    let out = dir.path().join("out");
    let res = run_kgs(
        &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert_eq!(report["experiment"], "global-solve");
}

#[test]
fn failed_check_exits_one_and_records_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    // An unattainably small mass-drift budget forces the armed check to fail.
    write(&cfg, &format!("{TINY_GLOBAL}\n[tolerances]\ndrift = 1.0e-30\n"));
    let out = dir.path().join("out");
    let res = run_kgs(
        &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(false));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("mass_drift"), "failing check named on stderr: {stderr}");
}

#[test]
fn malformed_toml_exits_two_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, "experiment = \"global-solve\"\n[grid\nl = 10.0\n");
    let out = dir.path().join("out");
    let res = run_kgs(
        &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists(), "no artifacts may be written for a rejected config");
}

#[test]
fn unknown_config_field_exits_two_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, &format!("{TINY_GLOBAL}\n[grid2]\nn = 9\n"));
    let out = dir.path().join("out");
    let res = run_kgs(
        &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_experiment_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, TINY_GLOBAL);
    let res = run_kgs(
        &["no-such-experiment", "--config", cfg.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("global-solve"), "error lists the registry: {err}");
}

#[test]
fn experiment_name_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, TINY_GLOBAL);
    let out = dir.path().join("out");
    let res = run_kgs(
        &["linear-kg-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn invalid_thread_count_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, TINY_GLOBAL);
    let out = dir.path().join("out");
    for bad in ["abc", "0", "-3"] {
        let res = run_kgs(
            &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            &[("KGS_THREADS", bad)],
        );
        assert_eq!(res.status.code(), Some(2), "KGS_THREADS={bad}");
        assert!(!out.exists());
    }
}

#[test]
fn reports_are_byte_identical_across_reruns_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, TINY_GLOBAL);
    let out = dir.path().join("out");
    let mut bytes = Vec::new();
    for threads in ["1", "4", "1"] {
        let res = run_kgs(
            &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            &[("KGS_THREADS", threads)],
        );
        assert_eq!(res.status.code(), Some(0));
        bytes.push(fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "report bytes must not depend on the thread count");
    assert_eq!(bytes[0], bytes[2], "report bytes must not depend on the rerun");
}

#[test]
fn report_command_aggregates_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, TINY_GLOBAL);
    let parent = dir.path().join("suite");
    for name in ["a", "b"] {
        let out = parent.join(name);
        let res = run_kgs(
            &["global-solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            &[],
        );
        assert_eq!(res.status.code(), Some(0));
    }
    let rep_cfg = dir.path().join("rep.toml");
    write(&rep_cfg, "experiment = \"report\"\n");
    let res = run_kgs(
        &["report", "--config", rep_cfg.to_str().unwrap(), "--out", parent.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("global-solve"), "table lists the runs: {stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(parent.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}

#[test]
fn report_command_fails_on_missing_directory() {
    let dir = tempfile::tempdir().unwrap();
    let rep_cfg = dir.path().join("rep.toml");
    write(&rep_cfg, "experiment = \"report\"\n");
    let missing = dir.path().join("nowhere");
    let res = run_kgs(
        &["report", "--config", rep_cfg.to_str().unwrap(), "--out", missing.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
}
