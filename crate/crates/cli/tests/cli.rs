use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ctlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctlab")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_of(out: &Output) -> (i32, Value) {
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(err["message"].is_string());
    (out.status.code().unwrap(), err)
}

const TWO_MODES: &str = r#"{"A": [[-1, 0], [0, -2]], "B": [[1], [1]]}"#;
const NESTED: &str = r#"{"A": [[-2.9, -1.225], [0, -0.45]], "B": [[1], [1]]}"#;

#[test]
fn factors_report_evenness() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", r#"{"A": [[-2.9, 0], [0, -0.75]], "B": [[1], [1]]}"#);
    let report = json_stdout(&ctlab(&["factors", "--system", s(&sys)]));
    assert!((report["F1"].as_f64().unwrap() - 0.5891).abs() < 5e-4);
    assert_eq!(report["F2"].as_array().unwrap().len(), 2);
}

#[test]
fn analytic_volume() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", TWO_MODES);
    let report = json_stdout(&ctlab(&["volume", "--system", s(&sys), "--mode", "analytic"]));
    assert!((report["volume"].as_f64().unwrap() - 0.66667).abs() < 1e-5);
}

#[test]
fn jordan_blocks_from_file() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", r#"{"A": [[-2, 1], [0, -2]], "B": [[0.7], [1]], "jordan_blocks": [[-2, 2]]}"#);
    let report = json_stdout(&ctlab(&["volume", "--system", s(&sys)]));
    assert!((report["volume"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(report["structure"], "jordan");
}

#[test]
fn finite_volume_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", TWO_MODES);
    let args = ["volume", "--system", s(&sys), "--mode", "finite", "--T", "5"];
    let first = ctlab(&args);
    let second = ctlab(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let report: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(report["delta"].as_f64(), Some(0.005));
    assert_eq!(report["generators"].as_u64(), Some(1000));
}

#[test]
fn boundary_svg_and_csv() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", NESTED);
    let svg = dir.path().join("out.svg");
    let out = ctlab(&["boundary", "--system", s(&sys), "--T", "6", "--svg", s(&svg), "--directions", "256"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("viewBox="));
    assert_eq!(text.matches("<path").count(), 1);
    assert!(text.contains(" Z\""));

    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x1,x2");
    assert_eq!(lines.len(), 257);
    assert!(!csv.contains('\r'));
    let rows: Vec<Vec<f64>> = lines[1..].iter().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    for (k, (p, q)) in rows[..128].iter().zip(&rows[128..]).enumerate() {
        assert!(p.iter().zip(q).all(|(a, b)| (a + b).abs() < 1e-12), "row {k}");
    }
}

#[test]
fn nested_horizons_plot() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", NESTED);
    let svg = dir.path().join("nested.svg");
    let csv = dir.path().join("points.csv");
    let out = ctlab(&["boundary", "--system", s(&sys), "--T", "1,1.5,3,4.5,6", "--svg", s(&svg), "--csv", s(&csv)]);
    let report = json_stdout(&out);
    assert_eq!(report["curves"].as_array().unwrap().len(), 5);
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<path").count(), 5);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("T,x1,x2\n"));
    assert_eq!(table.lines().count(), 1 + 5 * 64);
}

#[test]
fn exit_codes_for_bad_inputs() {
    let dir = TempDir::new().unwrap();
    let malformed = write(&dir, "bad.json", r#"{"A": [[1, 2]"#);
    let non_square = write(&dir, "ns.json", r#"{"A": [[1, 2]], "B": [[1]]}"#);
    let unstable = write(&dir, "unstable.json", r#"{"A": [[0.5, 0], [0, -1]], "B": [[1], [1]]}"#);
    let good = write(&dir, "good.json", TWO_MODES);
    let missing = dir.path().join("missing.json");

    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["factors", "--system", s(&malformed)], 2, "invalid_input"),
        (vec!["factors", "--system", s(&missing)], 2, "invalid_input"),
        (vec!["analyze", "--system", s(&non_square)], 2, "dimension"),
        (vec!["volume", "--system", s(&good), "--mode", "finite", "--T", "-1"], 2, "usage"),
        (vec!["volume", "--system", s(&good), "--mode", "finite"], 2, "usage"),
        (vec!["no-such-command"], 2, "usage"),
        (vec!["volume", "--system", s(&unstable), "--mode", "analytic"], 3, "unsupported_spectrum"),
        (vec!["gramian", "--system", s(&unstable)], 3, "divergence"),
        (vec!["mintime", "--system", s(&good), "--x0", "5,5"], 1, "unreachable"),
    ];
    for (args, code, kind) in cases {
        let (got, err) = error_of(&ctlab(&args));
        assert_eq!(got, code, "{args:?}");
        assert_eq!(err["error"], kind, "{args:?}");
    }
    let (_, err) = error_of(&ctlab(&["volume", "--system", s(&unstable), "--mode", "analytic"]));
    assert!(err["message"].as_str().unwrap().contains("eigenvalue"));
}

#[test]
fn mintime_scalar() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", r#"{"A": [[-1]], "B": [[1]]}"#);
    let report = json_stdout(&ctlab(&["mintime", "--system", s(&sys), "--x0", "0.5"]));
    assert!((report["time"].as_f64().unwrap() - 2f64.ln()).abs() <= 1e-3);
    let report = json_stdout(&ctlab(&["mintime", "--system", s(&sys), "--x0", "-0.5"]));
    assert!((report["time"].as_f64().unwrap() - 2f64.ln()).abs() <= 1e-3);
}

#[test]
fn gramian_report_and_out_file() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", TWO_MODES);
    let out_path = dir.path().join("g.json");
    let out = ctlab(&["gramian", "--system", s(&sys), "--T", "20", "--out", s(&out_path)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let g = &report["G"];
    assert!((g[0][1].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
    for key in ["det", "lambda_min", "ellipsoid_volume"] {
        assert!(report[key].is_number(), "{key}");
    }
}

#[test]
fn optimize_angle_problem() {
    let dir = TempDir::new().unwrap();
    let prob = write(
        &dir,
        "prob.json",
        r#"{"A": [[-1, 0], [0, -2]], "param": {"kind": "unit_angles"}, "objective": "infinite_volume", "budget": 300, "seed": 4}"#,
    );
    let report = json_stdout(&ctlab(&["optimize", "--problem", s(&prob)]));
    assert!((report["theta"][0].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 0.01);
    assert!((report["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-6);
    assert!(report["evals"].as_u64().unwrap() <= 300);
}

#[test]
fn compare_and_theorem() {
    let dir = TempDir::new().unwrap();
    let s1 = write(&dir, "s1.json", TWO_MODES);
    let s2 = write(&dir, "s2.json", r#"{"A": [[-1, 0], [0, -2]], "B": [[1.5], [1.5]]}"#);
    let report = json_stdout(&ctlab(&["compare", "--system1", s(&s1), "--system2", s(&s2), "--T", "2"]));
    assert_eq!(report["conclusion"], "system2_stronger");
    let report = json_stdout(&ctlab(&[
        "verify-theorem1", "--system1", s(&s1), "--system2", s(&s2), "--T", "1", "--samples", "4",
    ]));
    assert_eq!(report["passes"], true);
    assert_eq!(report["states"].as_array().unwrap().len(), 4);
    let (code, err) = error_of(&ctlab(&["verify-theorem1", "--system1", s(&s2), "--system2", s(&s1), "--T", "1"]));
    assert_eq!((code, err["error"].as_str().unwrap()), (1, "hypothesis"));
}

#[test]
fn analyze_summary() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", NESTED);
    let report = json_stdout(&ctlab(&["analyze", "--system", s(&sys)]));
    assert_eq!(report["controllable"], true);
    assert_eq!(report["hurwitz"], true);
    assert!(report["analytic_volume"].as_f64().unwrap() > 0.0);
}
