use std::path::PathBuf;
use std::process::{Command, Output};

use latproj::property_harness::{Classification, Report};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latproj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// The JSON object printed after the human-readable lines.
fn trailing_json(text: &str) -> serde_json::Value {
    let start = text.find("\n{").expect("json block") + 1;
    serde_json::from_str(&text[start..]).expect("valid json")
}

#[test]
fn project_euclidean_clips() {
    let o = run(&["project", "--instance", &fixture("euclid2.json"), "--vector", "1,-2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("point = (1, 0)"), "{out}");
    let json = trailing_json(&out);
    assert_eq!(json["point"], serde_json::json!([1.0, 0.0]));
    assert_eq!(json["certificate"]["verdict"], serde_json::json!(true));
    assert_eq!(json["method"], "closed_form");
}

#[test]
fn project_offdiag_dykstra_finds_metric_projection() {
    let o = run(&[
        "project",
        "--instance",
        &fixture("gram_offdiag.json"),
        "--vector",
        "1,-1",
        "--method",
        "dykstra",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json = trailing_json(&stdout(&o));
    let p: Vec<f64> = serde_json::from_value(json["point"].clone()).unwrap();
    assert!((p[0] - 0.5).abs() <= 1e-6 && p[1].abs() <= 1e-6, "{p:?}");
    assert_eq!(json["method"], "dykstra");
    assert_eq!(json["certificate"]["verdict"], serde_json::json!(true));
}

#[test]
fn project_closed_form_on_non_lattice_instance_is_flagged() {
    let o = run(&["project", "--instance", &fixture("gram_offdiag.json"), "--vector", "1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    let json = trailing_json(&stdout(&o));
    assert_eq!(json["point"], serde_json::json!([1.0, 0.0]));
    assert_eq!(json["certificate"]["verdict"], serde_json::json!(false));
}

#[test]
fn project_dimension_mismatch_exits_2() {
    let o = run(&["project", "--instance", &fixture("euclid2.json"), "--vector", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));
}

#[test]
fn project_bad_literal_exits_2() {
    let o = run(&["project", "--instance", &fixture("euclid2.json"), "--vector", "1,abc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn project_non_convergence_exits_3() {
    let o = run(&[
        "project",
        "--instance",
        &fixture("gram_offdiag.json"),
        "--vector",
        "1,-1",
        "--method",
        "dykstra",
        "--tol",
        "1e-30",
        "--max-iter",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_instance_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"dimension\": 2,\n  \"gram\": [[1, 0], [0, 1]\n}\n").unwrap();
    let o = run(&["project", "--instance", path.to_str().unwrap(), "--vector", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn indefinite_gram_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("indef.json");
    std::fs::write(&path, r#"{"dimension": 2, "gram": [[1, 2], [2, 1]]}"#).unwrap();
    let o = run(&["project", "--instance", path.to_str().unwrap(), "--vector", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_classify_euclidean_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("classify.json");
    let o = run(&[
        "verify",
        "--instance",
        &fixture("euclid2.json"),
        "--suite",
        "classify",
        "--trials",
        "10000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("CONSISTENT (lattice side)"));
    let c: Classification = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(c.exact.is_lattice);
}

#[test]
fn verify_lattice_norm_offdiag_fails_at_trial_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "--instance",
        &fixture("gram_offdiag.json"),
        "--suite",
        "lattice-norm",
        "--trials",
        "100",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.violations > 0);
    assert_eq!(r.first_witness.as_ref().unwrap().trial, 0);
}

#[test]
fn verify_expect_fail_inverts_exit_code() {
    let base = [
        "verify",
        "--instance",
        &fixture("gram_offdiag.json"),
        "--suite",
        "lattice-norm",
        "--trials",
        "100",
        "--seed",
        "7",
    ];
    let mut args = base.to_vec();
    args.push("--expect-fail");
    assert_eq!(run(&args).status.code(), Some(0));

    let pass = run(&[
        "verify",
        "--instance",
        &fixture("euclid2.json"),
        "--suite",
        "lattice-norm",
        "--trials",
        "100",
        "--expect-fail",
    ]);
    assert_eq!(pass.status.code(), Some(1));
}

#[test]
fn verify_positive_pairs_euclidean_passes() {
    let o = run(&[
        "verify",
        "--instance",
        &fixture("euclid2.json"),
        "--suite",
        "positive-pairs",
        "--trials",
        "10000",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_every_suite_runs_on_euclidean_instance() {
    for suite in ["lattice-norm", "isotone", "subadditive", "positive-pairs", "identities", "moreau"] {
        let o = run(&[
            "verify",
            "--instance",
            &fixture("euclid2.json"),
            "--suite",
            suite,
            "--trials",
            "500",
        ]);
        assert_eq!(o.status.code(), Some(0), "suite {suite}");
    }
}

#[test]
fn verify_unknown_suite_exits_2() {
    let o = run(&["verify", "--instance", &fixture("euclid2.json"), "--suite", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "verify",
        "--instance",
        &fixture("gram_offdiag.json"),
        "--suite",
        "isotone",
        "--trials",
        "300",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    let text = std::fs::read_to_string(&out).unwrap();
    let r: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(r, r.canonical());
    let again = latproj::numfmt::to_canonical_json(&r).unwrap();
    assert_eq!(again, text);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "verify",
        "--instance",
        &fixture("gram_offdiag.json"),
        "--suite",
        "classify",
        "--trials",
        "2000",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());

    let c1 = run(&["demo", "cauchy", "--n-max", "8", "--quadrature-nodes", "1025"]);
    let c2 = run(&["demo", "cauchy", "--n-max", "8", "--quadrature-nodes", "1025"]);
    assert_eq!(c1.stdout, c2.stdout);
}

#[test]
fn demo_cauchy_table_within_threshold() {
    let o = run(&["demo", "cauchy", "--n-max", "64", "--quadrature-nodes", "4096"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,m,measured_D2,exact_D2,abs_error"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for (k, row) in rows.iter().enumerate() {
        let n = (1usize << k) as f64;
        assert_eq!(row[0], n);
        assert_eq!(row[1], 2.0 * n);
        assert!((row[3] - 1.0 / (12.0 * n)).abs() <= 1e-12);
        assert!(row[4] <= 1e-4);
    }
}

#[test]
fn demo_cauchy_rejects_zero_n_max() {
    assert_eq!(run(&["demo", "cauchy", "--n-max", "0"]).status.code(), Some(2));
}

#[test]
fn demo_weighted_eval_geometric_sum() {
    let o = run(&["demo", "weighted-eval", "--terms", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    let expected = 2.0 - 2f64.powi(-15);
    assert_eq!(row[0], 16.0);
    assert!(((row[1] - expected) / expected).abs() <= 1e-12);
    assert_eq!(run(&["demo", "weighted-eval", "--terms", "0"]).status.code(), Some(2));
}
