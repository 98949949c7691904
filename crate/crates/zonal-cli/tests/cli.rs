//! End-to-end tests of the `zonal` binary: artifact shapes, the exit-code
//! contract, and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn zonal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = zonal(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 artifact")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Data rows of a CSV artifact, comments and header stripped.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn enumerate_counts_match_closed_form() {
    let gamma2 = config_path("gamma2.json");
    let text = stdout_ok(&["enumerate", "--config", gamma2.to_str().unwrap(), "--n-max", "6"]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 7);
    let mut cumulative: u128 = 0;
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row[0], n.to_string());
        assert_eq!(row[1], row[2], "walked count vs closed form at n = {n}");
        cumulative += row[1].parse::<u128>().unwrap();
        assert_eq!(row[3], cumulative.to_string());
    }
    // 4·3^(n−1) per sphere for the two-factor rank-one group.
    assert_eq!(rows[6][1], "972");
}

#[test]
fn malformed_config_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"group\": \n").unwrap();
    let out = zonal(&["enumerate", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "stderr: {err}");
}

#[test]
fn n_above_cap_exits_2_naming_cap() {
    let gamma2 = config_path("gamma2.json");
    let out = zonal(&["enumerate", "--config", gamma2.to_str().unwrap(), "--n-max", "99"]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cap 40"), "stderr: {err}");
}

#[test]
fn poincare_columns_present_and_monotone() {
    let gamma2 = config_path("gamma2.json");
    let text = stdout_ok(&["poincare", "--config", gamma2.to_str().unwrap(), "--n-max", "8"]);
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("header line");
    assert_eq!(header, "n,count,p_n,restricted,predicted,ratio");
    assert!(text.contains("# s: 1.0000000000000000e0"));
    assert!(text.contains("# delta_source: fixed"));

    let rows = data_rows(&text);
    assert_eq!(rows.len(), 9);
    let mut prev = 0.0;
    for row in &rows {
        let p: f64 = row[2].parse().unwrap();
        let restricted: f64 = row[3].parse().unwrap();
        assert!(p >= prev, "P_n must be nondecreasing");
        assert!(restricted <= p + 1e-15, "restricted sum cannot exceed the full sum");
        prev = p;
    }
    // Model cells are left empty below n = 2, populated afterwards.
    assert!(rows[0][4].is_empty() && rows[1][4].is_empty());
    assert!(!rows[2][4].is_empty() && !rows[2][5].is_empty());
}

#[test]
fn poincare_estimates_delta_when_s_omitted() {
    // Same group as the shipped config, but with no `s` and no
    // `estimate_delta`: estimation is the documented fallback.
    let base = std::fs::read_to_string(config_path("gamma2.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&base).unwrap();
    doc.as_object_mut().unwrap().remove("s");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gamma2-no-s.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let text = stdout_ok(&["poincare", "--config", path.to_str().unwrap(), "--n-max", "12"]);
    assert!(text.contains("# delta_source: estimated"), "artifact: {text}");
    assert!(text.contains("# delta_hat: "));
    assert!(text.contains("# delta_stderr: "));
    assert!(text.contains("# fit_window: "));
}

#[test]
fn regime_report_round_trips_against_schema() {
    let gamma2 = config_path("gamma2.json");
    let text = stdout_ok(&["regime", "--config", gamma2.to_str().unwrap(), "--s", "0.8"]);
    // The reader rejects unknown fields, so a clean round-trip is the
    // schema validation.
    let report: zonal::report::RegimeReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.schema, zonal::report::REGIME_REPORT_SCHEMA);
    assert_eq!(report.delta_source, "flag");
    assert_eq!(report.r_max, 1);
    assert!((report.beta - 0.4).abs() < 1e-12);
    assert!(report.regime.starts_with("polynomial"));
    assert!(report.convolution_ratio_min >= 1.0);
    assert!(report.convolution_ratio_max.is_finite());
    let reserialized = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(text.trim_end(), reserialized);
}

#[test]
fn regime_classifies_config_delta_as_boundary() {
    let gamma2 = config_path("gamma2.json");
    let text = stdout_ok(&["regime", "--config", gamma2.to_str().unwrap()]);
    let report: zonal::report::RegimeReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.delta, 1.0);
    assert_eq!(report.delta_source, "config");
    assert_eq!(report.regime, "logarithmic");
    assert_eq!(report.beta, 0.0);
    // β = 0 skips the Γ normalization entirely, so the boundary tables are
    // exactly w_n = ln n and ν_n = n / ln n.
    for (w, nu) in report.wandering_rate.iter().zip(&report.return_sequence) {
        let n = f64::from(w.n);
        assert_eq!(w.value, n.ln());
        assert_eq!(nu.value, n / n.ln());
    }
}

#[test]
fn regime_below_beardon_bound_exits_2() {
    let gamma2 = config_path("gamma2.json");
    let out = zonal(&["regime", "--config", gamma2.to_str().unwrap(), "--s", "0.4"]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Beardon"), "stderr: {err}");
}

#[test]
fn sumlevel_emits_exact_first_levels() {
    let text = stdout_ok(&["sumlevel", "--n-max", "3"]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], "1/2");
    assert_eq!(rows[1][1], "1/3");
    assert_eq!(rows[2][1], "3/10");
    assert_eq!(rows[2][3], "17/15");
}

#[test]
fn sumlevel_rejects_zero_and_values_over_cap() {
    let out = zonal(&["sumlevel", "--n-max", "0"]);
    assert_eq!(exit_code(&out), 2);
    let out = zonal(&["sumlevel", "--n-max", "31"]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cap 30"), "stderr: {err}");
}

#[test]
fn artifacts_are_byte_identical_across_runs_and_thread_counts() {
    let gamma2 = config_path("gamma2.json");
    let dir = tempfile::tempdir().unwrap();
    let mut artifacts = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "2"), ("d", "4")] {
        let path = dir.path().join(name);
        let out = zonal(&[
            "poincare",
            "--config",
            gamma2.to_str().unwrap(),
            "--n-max",
            "10",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty(), "--out must silence stdout");
        artifacts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(artifacts[0], artifacts[1], "identical invocations");
    assert_eq!(artifacts[0], artifacts[2], "thread count must not leak into artifacts");
    assert_eq!(artifacts[0], artifacts[3]);
}

#[test]
fn seed_is_echoed_into_metadata() {
    let gamma2 = config_path("gamma2.json");
    let text = stdout_ok(&[
        "enumerate",
        "--config",
        gamma2.to_str().unwrap(),
        "--n-max",
        "4",
        "--seed",
        "7",
    ]);
    assert!(text.contains("# seed: 7"));
}
