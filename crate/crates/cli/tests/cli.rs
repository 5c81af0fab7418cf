use std::process::Command;

use cartesian_lens_cli::{run, Outcome};

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("cartesian-lens").chain(args.iter().copied()))
}

fn stdout(o: &Outcome) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Outcome) -> Vec<Vec<f64>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn sample_csv_has_header_and_rows() {
    let o = cli(&["sample", "--b", "1", "--n", "2", "--c", "1.5", "--count", "256", "--format", "csv"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("psi,x,y,nx,ny"));
    let rows = csv_rows(&o);
    assert!(!rows.is_empty() && rows.len() <= 256);
    assert!(rows.iter().all(|r| r.len() == 5));
}

#[test]
fn sample_full_count_when_focus_is_inside() {
    let o = cli(&["sample", "--b", "1", "--n", "1.5", "--c", "2", "--count", "256"]);
    assert_eq!(csv_rows(&o).len(), 256);
}

#[test]
fn empty_locus_is_a_usage_error() {
    let o = cli(&["sample", "--b", "1", "--n", "2", "--c", "0.5"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("EmptyLocus"), "{}", o.stderr);
    assert!(o.stdout.is_empty());
}

#[test]
fn coincident_foci_give_a_circle() {
    let o = cli(&["sample", "--b", "0", "--n", "2", "--c", "1", "--count", "64"]);
    assert_eq!(o.code, 0);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 64);
    for r in rows {
        assert!((r[1].hypot(r[2]) - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn ode_default_run_conserves() {
    let o = cli(&["ode", "--b", "1", "--n", "2", "--c", "1.5"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(stdout(&o).lines().next(), Some("s,x,y,q"));
    let drift: f64 = o.stderr.trim().strip_prefix("max_drift ").unwrap().parse().unwrap();
    assert!(drift < 1e-8);
    let rows = csv_rows(&o);
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| (r[3] - 1.5).abs() < 1e-8));
}

#[test]
fn loose_ode_fails_a_strict_gate() {
    let o = cli(&["ode", "--b", "1", "--n", "2", "--c", "1.5", "--tol", "1e-3", "--max-drift", "1e-12"]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("DriftExceeded"));
    assert!(!o.stdout.is_empty());
}

#[test]
fn zero_arc_span_gives_one_row() {
    let o = cli(&["ode", "--b", "1", "--n", "2", "--c", "1.5", "--arc-span", "0"]);
    assert_eq!(o.code, 0);
    assert_eq!(csv_rows(&o).len(), 1);
    assert_eq!(o.stderr, "max_drift 0.0000000000000000e0\n");
}

#[test]
fn ode_infinite_source_needs_a_span_when_open() {
    let o = cli(&["ode", "--b", "1", "--n", "0.5", "--c", "0.3", "--infinite"]);
    assert_eq!(o.code, 2);
    let o = cli(&["ode", "--b", "1", "--n", "0.5", "--c", "0.3", "--infinite", "--arc-span", "1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let o = cli(&["ode", "--b", "1", "--n", "2", "--c", "2", "--infinite", "--format", "json"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["closure"].as_f64().unwrap() < 1e-6);
}

#[test]
fn trace_reports_focusing() {
    let o = cli(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--rays", "1000"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ray_count"], 1000);
    assert!(v["max_angular_deviation"].as_f64().unwrap() < 1e-8);
    assert!(v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn trace_perturbed_and_parallel() {
    let bumped = cli(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--perturb", "1e-3", "--seed", "9"]);
    let v: serde_json::Value = serde_json::from_slice(&bumped.stdout).unwrap();
    assert!(v["max_angular_deviation"].as_f64().unwrap() > 1e-4);
    let other = cli(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--perturb", "1e-3", "--seed", "10"]);
    assert_ne!(bumped.stdout, other.stdout);

    let o = cli(&["trace", "--b", "1", "--n", "2", "--parallel", "--rays", "200", "--format", "csv"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(stdout(&o).starts_with("height,hit_x,hit_y,deviation,miss\n"));
    assert!(csv_rows(&o).iter().all(|r| r[3] < 1e-8));
}

#[test]
fn trace_flag_errors() {
    assert_eq!(cli(&["trace", "--b", "1", "--n", "1.5"]).code, 2);
    assert_eq!(cli(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--rays", "0"]).code, 2);
    assert_eq!(cli(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--psi-min", "1", "--psi-max", "0"]).code, 2);
    assert_eq!(cli(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--format", "svg"]).code, 2);
    assert_eq!(cli(&["trace", "--b", "1", "--n", "1", "--parallel"]).code, 2);
}

#[test]
fn conic_parabola_json() {
    let o = cli(&["conic", "--b", "1", "--n", "-1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "Parabola");
    assert_eq!(v["parabola_4b"], 4.0);
}

#[test]
fn conic_modes() {
    let v: serde_json::Value = serde_json::from_slice(&cli(&["conic", "--mode", "both-infinite"]).stdout).unwrap();
    assert_eq!(v["kind"], "VerticalLine");
    assert_eq!(v["line_x"], 0.0);
    let o = cli(&["conic", "--b", "2", "--n", "-1", "--c", "1", "--mode", "unity", "--format", "svg"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(stdout(&o).matches("<polyline").count(), 2);
    assert_eq!(cli(&["conic", "--b", "2", "--n", "0.5", "--c", "1", "--mode", "unity"]).code, 2);
    assert_eq!(cli(&["conic", "--n", "2"]).code, 2);
}

#[test]
fn revolve_certificates_vanish() {
    let o = cli(&["revolve", "--b", "1", "--n", "2", "--c", "1.5", "--samples", "200", "--format", "json"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["max_abs_residual", "max_abs_drucker_det", "max_abs_coplanarity", "max_axis_distance"] {
        assert!(v[k].as_f64().unwrap() < 1e-9, "{k}");
    }
    assert!(v["min_jacobian_count"].as_u64().unwrap() >= 2);

    let o = cli(&["revolve", "--b", "1", "--n", "2", "--c", "1.5", "--samples", "200", "--perturb", "0.02"]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().any(|r| r[7].abs() > 1e-4));
}

#[test]
fn unknown_flag_and_bad_values_exit_2() {
    let o = cli(&["sample", "--b", "1", "--n", "2", "--c", "1.5", "--wat"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("Usage"));
    assert_eq!(cli(&["sample", "--b", "nan", "--n", "2", "--c", "1.5"]).code, 2);
    assert_eq!(cli(&["sample", "--b", "1", "--n", "2", "--c", "1.5", "--count", "1"]).code, 2);
    assert_eq!(cli(&["ode", "--b", "1", "--n", "2", "--c", "1.5", "--tol", "0"]).code, 2);
    assert_eq!(cli(&["revolve", "--b", "1", "--n", "2", "--c", "1.5", "--samples", "0"]).code, 2);
    assert_eq!(cli(&["bogus"]).code, 2);
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oval.svg");
    let o = cli(&["sample", "--b", "1", "--n", "2", "--c", "1.5", "--format", "svg", "--out", path.to_str().unwrap()]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.is_empty());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.contains("<svg") && svg.matches("<circle").count() == 2);

    let bad = dir.path().join("missing").join("x.csv");
    let o = cli(&["sample", "--b", "1", "--n", "2", "--c", "1.5", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("OutputError"));
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["sample", "--b", "1", "--n", "2", "--c", "1.5", "--format", "json"][..],
        &["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--rays", "300", "--format", "csv"],
        &["revolve", "--b", "1", "--n", "2", "--c", "1.5", "--samples", "100", "--seed", "5"],
    ] {
        assert_eq!(cli(args), cli(args));
    }
}

#[test]
fn binary_verify_passes() {
    let out = Command::new(env!("CARGO_BIN_EXE_cartesian-lens")).arg("verify").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), 10);
    assert!(text.ends_with("10 criteria: 10 passed, 0 failed\n"));
}
