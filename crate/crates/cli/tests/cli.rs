//! End-to-end tests of the `matperturb` binary: fixtures, error paths,
//! exit codes and report reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matperturb_cli::{MatrixFile, MatrixKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_matperturb"))
}

fn write_matrix(dir: &Path, name: &str, rows: usize, cols: usize, kind: Option<MatrixKind>, data: &[(f64, f64)]) -> PathBuf {
    let file = MatrixFile {
        rows,
        cols,
        kind,
        data: data.to_vec(),
    };
    let path = dir.join(name);
    file.save(&path).unwrap();
    path
}

fn parse_report(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}\nstderr: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("report is valid JSON")
}

fn embedded_matrix(report: &serde_json::Value, name: &str) -> MatrixFile {
    let results = report["results"].as_array().expect("results array");
    let entry = results
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no result named {name}"));
    MatrixFile::parse(&entry["matrix"].to_string()).expect("embedded matrix parses")
}

#[test]
fn approx_power_fixture_reproduces_expected_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let t = 0.01;
    let a = write_matrix(
        dir.path(),
        "a.json",
        2,
        2,
        Some(MatrixKind::Psd),
        &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
    );
    let e = write_matrix(
        dir.path(),
        "e.json",
        2,
        2,
        Some(MatrixKind::Hermitian),
        &[(0.0, 0.0), (t, 0.0), (t, 0.0), (t, 0.0)],
    );
    let out = bin()
        .args(["approx", "--mode", "power", "--p", "2", "--no-timestamp"])
        .arg("--input")
        .arg(&a)
        .arg("--perturb")
        .arg(&e)
        .output()
        .unwrap();
    let report = parse_report(&out);
    let approx = embedded_matrix(&report, "approximation");
    let d_root = (t - t * t).sqrt();
    let expect = [(1.0, 0.0), (t, 0.0), (t, 0.0), (d_root, 0.0)];
    for (got, want) in approx.data.iter().zip(&expect) {
        assert!((got.0 - want.0).abs() < 1e-14, "{got:?} vs {want:?}");
        assert!(got.1.abs() < 1e-14);
    }
}

#[test]
fn approx_dk_on_singular_base_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_matrix(
        dir.path(),
        "a.json",
        2,
        2,
        Some(MatrixKind::Psd),
        &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
    );
    let e = write_matrix(
        dir.path(),
        "e.json",
        2,
        2,
        Some(MatrixKind::Hermitian),
        &[(0.0, 0.0), (0.01, 0.0), (0.01, 0.0), (0.01, 0.0)],
    );
    let out = bin()
        .args(["approx", "--mode", "dk", "--p", "2"])
        .arg("--input")
        .arg(&a)
        .arg("--perturb")
        .arg(&e)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let err: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert!(err["error"]
        .as_str()
        .unwrap()
        .contains("singular-case power approximation"));
}

#[test]
fn approx_modulus_of_zero_base_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_matrix(
        dir.path(),
        "x.json",
        2,
        2,
        Some(MatrixKind::General),
        &[(0.0, 0.0); 4],
    );
    let z = write_matrix(
        dir.path(),
        "z.json",
        2,
        2,
        Some(MatrixKind::General),
        &[(0.3, 0.1), (-0.2, 0.0), (0.05, -0.4), (0.6, 0.2)],
    );
    let out = bin()
        .args(["approx", "--mode", "modulus", "--no-timestamp"])
        .arg("--input")
        .arg(&x)
        .arg("--perturb")
        .arg(&z)
        .output()
        .unwrap();
    let report = parse_report(&out);
    let approx = embedded_matrix(&report, "approximation");
    let exact = embedded_matrix(&report, "exact");
    for (a, b) in approx.data.iter().zip(&exact.data) {
        assert!((a.0 - b.0).abs() < 1e-12);
        assert!((a.1 - b.1).abs() < 1e-12);
    }
    let err = report["summary"]["metrics"]["error_spectral"].as_f64().unwrap();
    assert!(err < 1e-12);
}

#[test]
fn order_power_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("errors.csv");
    let out = bin()
        .args([
            "order",
            "--problem",
            "power",
            "--p",
            "2",
            "--n",
            "6",
            "--rank",
            "3",
            "--trials",
            "10",
            "--seed",
            "42",
            "--no-timestamp",
        ])
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    let report = parse_report(&out);
    assert_eq!(report["summary"]["pass"], true);
    let min_slope = report["summary"]["metrics"]["min_slope"].as_f64().unwrap();
    assert!(min_slope >= 1.45, "min slope {min_slope}");

    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("scale,error,trial"));
    assert_eq!(lines.count(), 10 * 12);
}

#[test]
fn order_dk_campaign_passes() {
    let out = bin()
        .args([
            "order", "--problem", "dk", "--p", "2", "--n", "5", "--trials", "5", "--seed", "7",
            "--no-timestamp",
        ])
        .output()
        .unwrap();
    let report = parse_report(&out);
    assert_eq!(report["summary"]["pass"], true);
    let min_slope = report["summary"]["metrics"]["min_slope"].as_f64().unwrap();
    assert!(min_slope >= 1.95, "min slope {min_slope}");
}

#[test]
fn order_rejects_short_scale_ladders() {
    let out = bin()
        .args([
            "order",
            "--problem",
            "power",
            "--p",
            "2",
            "--scales",
            "0.1,0.05,0.025",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("at least 6"));
}

#[test]
fn order_gates_unproven_exponents_behind_force() {
    let base = [
        "order", "--problem", "power", "--p", "3.5", "--n", "4", "--rank", "2", "--trials", "2",
        "--no-timestamp",
    ];
    let out = bin().args(base).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));

    let out = bin().args(base).arg("--force").output().unwrap();
    let report = parse_report(&out);
    // no proven order: the fits carry no expected order and cannot fail
    assert_eq!(report["summary"]["pass"], true);
    assert!(report["order_fits"][0]["expected_order"].is_null());
}

#[test]
fn order_reports_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = bin()
            .args([
                "order",
                "--problem",
                "modulus",
                "--n",
                "4",
                "--rank",
                "2",
                "--trials",
                "3",
                "--seed",
                "9",
                "--no-timestamp",
            ])
            .arg("--out")
            .arg(&path)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("r1.json"), run("r2.json"));
}

#[test]
fn seed_env_var_overrides_flag() {
    let out = bin()
        .args([
            "order", "--problem", "lemma-gt", "--n", "4", "--rank", "2", "--trials", "2",
            "--seed", "1", "--no-timestamp",
        ])
        .env("MATPERTURB_SEED", "777")
        .output()
        .unwrap();
    let report = parse_report(&out);
    assert_eq!(report["config"]["seed"], 777);
    assert_eq!(report["config"]["seed_from_env"], true);
}

#[test]
fn order_runs_both_projector_product_bounds() {
    let out = bin()
        .args([
            "order", "--problem", "lemma-gt2", "--n", "5", "--rank", "2", "--trials", "2",
            "--seed", "3", "--no-timestamp",
        ])
        .output()
        .unwrap();
    let report = parse_report(&out);
    assert_eq!(report["summary"]["pass"], true);
    let fits = report["order_fits"].as_array().unwrap();
    assert_eq!(fits.len(), 4); // two bounds, two trials each
}

#[test]
fn wihler_scalar_sweep_touches_the_bound() {
    let out = bin()
        .args([
            "wihler", "--n", "1", "--p", "2", "--trials", "50", "--seed", "5", "--no-timestamp",
        ])
        .output()
        .unwrap();
    let report = parse_report(&out);
    assert_eq!(report["summary"]["pass"], true);
    let max_ratio = report["summary"]["metrics"]["max_ratio"].as_f64().unwrap();
    assert!(max_ratio <= 1.0 + 1e-10);
    assert!(max_ratio >= 1.0 - 1e-10, "sharp case missing: {max_ratio}");
}

#[test]
fn wihler_large_sweep_has_no_violations() {
    let out = bin()
        .args([
            "wihler", "--n", "8", "--p", "3", "--trials", "1000", "--seed", "11",
            "--no-timestamp",
        ])
        .output()
        .unwrap();
    let report = parse_report(&out);
    assert_eq!(report["summary"]["metrics"]["violations"], 0.0);
}

#[test]
fn wihler_rejects_exponents_below_one() {
    let out = bin()
        .args(["wihler", "--n", "2", "--p", "0.5", "--trials", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_matrix_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"rows\": 2").unwrap();
    let out = bin()
        .args(["approx", "--mode", "modulus"])
        .arg("--input")
        .arg(&path)
        .arg("--perturb")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mismatched_shapes_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_matrix(dir.path(), "x.json", 2, 2, None, &[(1.0, 0.0); 4]);
    let z = write_matrix(dir.path(), "z.json", 3, 3, None, &[(0.0, 0.0); 9]);
    let out = bin()
        .args(["approx", "--mode", "modulus"])
        .arg("--input")
        .arg(&x)
        .arg("--perturb")
        .arg(&z)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2x2"));
}

#[test]
fn written_matrices_read_back_losslessly() {
    // awkward values through a full write -> approx -> report cycle
    let dir = tempfile::tempdir().unwrap();
    let values = [
        (0.1, -1.0 / 3.0),
        (1e-15, 2.5e3),
        (-0.75, 0.0),
        (5.0, -1e-12),
    ];
    let x = write_matrix(dir.path(), "x.json", 2, 2, None, &values);
    let back = MatrixFile::load(&x).unwrap();
    for (a, b) in values.iter().zip(&back.data) {
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}

#[test]
fn failed_order_assertion_exits_with_code_three() {
    // an impossible demand: the measured slope must beat the expected
    // order by a full unit
    let out = bin()
        .args([
            "order", "--problem", "dk", "--p", "2", "--n", "4", "--trials", "2", "--seed", "3",
            "--slope-margin=-1.0", "--no-timestamp",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["pass"], false);
}
