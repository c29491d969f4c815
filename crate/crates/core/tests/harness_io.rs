mod common;

use std::fs;
use std::process::Command;

use common::*;
use stap_codesign::am::{self, RunOptions};
use stap_codesign::harness::{emit_trace, load_scenario, read_trace_csv, TraceFormat};
use stap_codesign::waveform::SolverKind;
use stap_codesign::Error;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stap-codesign"))
}

#[test]
fn bundled_scenario_dimensions() {
    let cfg = bundled_scenario();
    assert_eq!((cfg.dims.sensors, cfg.dims.samples, cfg.dims.pulses), (5, 8, 8));
    assert_eq!(cfg.clutter.patches, 25);
    assert_eq!((cfg.kappa, cfg.power), (1.0, 1.0));
    assert_eq!(cfg.space_time_dim(), 320);
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    fs::write(&path, "").unwrap();
    let err = load_scenario(&path).unwrap_err();
    assert!(matches!(err, Error::Parse(_)), "{err:?}");
}

#[test]
fn negative_power_names_the_field() {
    let text = fs::read_to_string(bundled_scenario_path()).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["power"] = serde_json::json!(-1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, value.to_string()).unwrap();
    let err = load_scenario(&path).unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("power"), "{err}");
}

#[test]
fn trace_has_one_row_per_record() {
    let report = am::run(&bundled_scenario(), SolverKind::Qcqp, &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    emit_trace(&report.trace, &path, TraceFormat::Csv).unwrap();
    let rows = read_trace_csv(&path).unwrap();
    assert_eq!(rows.len(), 21);
    for (row, rec) in rows.iter().zip(&report.trace.records) {
        assert_eq!(row.objective, rec.objective);
    }
}

#[test]
fn cli_run_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let status = cli()
        .args(["run", "--solver", "cls", "--iters", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read_trace_csv(&out).unwrap().len(), 4);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let io = cli().args(["run", "--scenario"]).arg(&missing).status().unwrap();
    assert_eq!(io.code(), Some(1));

    let usage = cli().args(["run", "--solver", "simplex"]).status().unwrap();
    assert_eq!(usage.code(), Some(2));

    let text = fs::read_to_string(bundled_scenario_path()).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["kappa"] = serde_json::json!(0.0);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, value.to_string()).unwrap();
    let invalid = cli().args(["run", "--scenario"]).arg(&bad).status().unwrap();
    assert_eq!(invalid.code(), Some(2));

    // Zero mode cannot run the direct update on a singular waveform Hessian.
    let numeric = cli()
        .args(["run", "--iters", "2", "--lambda-mode", "zero"])
        .output()
        .unwrap();
    assert_eq!(numeric.status.code(), Some(3));
}

#[test]
fn cli_compare_prints_table() {
    let output = cli()
        .args(["compare", "--solver", "qcqp,sdp", "--iters", "2", "--rescale"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let table = String::from_utf8(output.stdout).unwrap();
    for label in ["qcqp/root", "qcqp/root/rescaled", "sdp/root", "sdp/root/rescaled"] {
        assert!(table.contains(label), "{table}");
    }
}
