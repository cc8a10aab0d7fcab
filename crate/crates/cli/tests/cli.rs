//! End-to-end tests of the `limbsim` binary: exit codes, file handling and
//! output contracts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_limbsim"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run_args(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary ran")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_passing_scenario_exits_zero_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("trace.csv");
    let scenario = scenarios_dir().join("grip_object.scn");
    let out = run_args(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("assertions: 4 passed, 0 failed"));
    let csv = fs::read_to_string(&out_csv).unwrap();
    assert!(csv.starts_with("time,raw_elbow_up"));
    assert_eq!(csv.lines().count(), 1001); // header + 1000 samples
}

#[test]
fn bundled_scenarios_all_pass() {
    for name in [
        "lift.scn",
        "grip_object.scn",
        "grab_and_release.scn",
        "worm_hold.scn",
    ] {
        let scenario = scenarios_dir().join(name);
        let out = run_args(&["check", "--scenario", scenario.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name} failed:\n{}\n{}",
            stdout_of(&out),
            stderr_of(&out)
        );
    }
}

#[test]
fn failing_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fail.scn");
    fs::write(&path, "dt 0.001\nduration 0.1\nexpect 0.05 theta 5 6\n").unwrap();
    let out = run_args(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("FAIL"));
}

#[test]
fn run_and_check_agree() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body, expected) in [
        ("pass.scn", "duration 0.1\nexpect 0.05 theta 0 0\n", 0),
        ("fail.scn", "duration 0.1\nexpect 0.05 aperture 0 0.01\n", 1),
    ] {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let run = run_args(&["run", "--scenario", path.to_str().unwrap()]);
        let check = run_args(&["check", "--scenario", path.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(expected));
        assert_eq!(check.status.code(), Some(expected));
    }
}

#[test]
fn malformed_scenario_exits_two_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    fs::write(&path, "duration 1\nat 0 press WRIST\nexpect 2 theta 0 1\n").unwrap();
    let out = run_args(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("line 3"), "stderr: {err}");
}

#[test]
fn missing_scenario_file_exits_two() {
    let out = run_args(&["run", "--scenario", "/nonexistent/x.scn"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_and_subcommand_exit_two() {
    let out = run_args(&["run", "--scenario", "x.scn", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_args(&["explode"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_args(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fit_motor_prints_builtin_fit_and_residuals() {
    let out = run_args(&["fit-motor", "--spec", "gripper-1271"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("stall_torque       0.452632"));
    assert!(text.contains("stall_current      0.192368"));
    assert!(text.contains("anchor round-trip residuals"));
    // residuals are printed in scientific notation and must be tiny
    for line in text.lines().filter(|l| l.contains("rated torque")) {
        let value: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(value <= 1e-9, "residual too large: {line}");
    }

    let out = run_args(&["fit-motor", "--spec", "elbow-80838.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("stall_torque       0.027000"));
}

#[test]
fn fit_motor_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.motor");
    fs::write(
        &path,
        "nominal_voltage = 6\nno_load_speed_rpm = 100\nrated_speed_rpm = 50\nrated_torque = 0.1\nrated_current = 0.2\ngear_ratio = 30\nmass = 0.2\n",
    )
    .unwrap();
    let out = run_args(&["fit-motor", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    // stall = 0.1 / (1 - 50/100) = 0.2
    assert!(stdout_of(&out).contains("stall_torque       0.200000"));
}

#[test]
fn fit_motor_unknown_spec_exits_two() {
    let out = run_args(&["fit-motor", "--spec", "warp-drive"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_overrides_apply_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small_hand.cfg");
    fs::write(&cfg, "aperture_max = 0.05\n").unwrap();
    let scn = dir.path().join("idle.scn");
    fs::write(&scn, "duration 0.01\nexpect 0 aperture 0.05 0.05\n").unwrap();
    let out = run_args(&[
        "check",
        "--scenario",
        scn.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "warp = 9\n").unwrap();
    let scn = dir.path().join("idle.scn");
    fs::write(&scn, "duration 0.01\n").unwrap();
    let out = run_args(&[
        "run",
        "--scenario",
        scn.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuzz_passes_and_reproduces() {
    let a = run_args(&["fuzz", "--ticks", "100000", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr_of(&a));
    assert!(stdout_of(&a).contains("all safety invariants held"));
    let b = run_args(&["fuzz", "--ticks", "100000", "--seed", "42"]);
    assert_eq!(stdout_of(&a), stdout_of(&b));
}

#[test]
fn trace_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios_dir().join("grip_object.scn");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out_path in [&a, &b] {
        let out = run_args(&[
            "run",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
