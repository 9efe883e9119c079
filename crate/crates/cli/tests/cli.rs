use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn diml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diml")).args(args).output().unwrap()
}

fn with_config(config: &str, args: &[&str]) -> Output {
    let path = configs().join(config);
    let mut all = vec!["--config", path.to_str().unwrap()];
    all.extend_from_slice(args);
    diml(&all)
}

/// Writes `json` to a temporary config and runs the CLI on it.
fn with_inline(json: &str, args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, json).unwrap();
    let mut all = vec!["--config", path.to_str().unwrap()];
    all.extend_from_slice(args);
    diml(&all)
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_column<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap()).collect()
}

const EXP_TEMPLATE: &str = r#"{"loss": {"family": "exponential", "rate": 1.0},
 "distortion": {"family": "identity"}, "theta": 0.25, "wealth": WEALTH}"#;

#[test]
fn solve_json_matches_golden() {
    assert_eq!(stdout(&with_config("exponential.json", &["solve"])), golden("solve_exponential.json"));
}

#[test]
fn solve_csv_matches_golden() {
    let out = stdout(&with_config("exponential.json", &["--format", "csv", "solve"]));
    assert_eq!(out, golden("solve_exponential.csv"));
}

#[test]
fn premium_csv_matches_golden() {
    let out = stdout(&with_config("exponential.json", &["--format", "csv", "premium", "--d", "1", "--m", "2"]));
    assert_eq!(out, golden("premium_exponential.csv"));
}

#[test]
fn theta_sweep_matches_golden_and_flips_at_unit_loading() {
    let args = ["--format", "csv", "sweep", "--param", "theta", "--from", "0", "--to", "2", "--steps", "5"];
    let out = stdout(&with_config("atom_scaled.json", &args));
    assert_eq!(out, golden("sweep_atom_theta.csv"));
    let cases = csv_column(&out, "case");
    assert_eq!(&cases[..3], ["zero_deductible"; 3]);
    assert_ne!(cases[3], "zero_deductible");
}

#[test]
fn wealth_sweep_crosses_from_no_insurance_to_positive_deductible() {
    // d_s = ln 1.25 ≈ 0.223
    let args = ["--format", "csv", "sweep", "--param", "wealth", "--from", "0.1", "--to", "0.4", "--steps", "7"];
    let out = stdout(&with_config("exponential.json", &args));
    let wealth: Vec<f64> = csv_column(&out, "param").iter().map(|v| v.parse().unwrap()).collect();
    let cases = csv_column(&out, "case");
    assert_eq!(cases.len(), 7);
    assert!(wealth.windows(2).all(|w| w[0] < w[1]));
    for (w, case) in wealth.iter().zip(&cases) {
        let expected = if *w <= 1.25f64.ln() { "no_insurance" } else { "positive_deductible" };
        assert_eq!(*case, expected, "w = {w}");
    }
}

#[test]
fn sweep_with_two_steps_has_two_rows() {
    let args = ["sweep", "--param", "wealth", "--from", "0.3", "--to", "0.9", "--steps", "2"];
    let doc: Value = serde_json::from_str(&stdout(&with_config("exponential.json", &args))).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 2);
    assert_eq!(doc[0]["param"], 0.3);
}

#[test]
fn safe_level_document_has_zero_ruin_and_maximal_limit() {
    let out = stdout(&with_inline(&EXP_TEMPLATE.replace("WEALTH", "2.0"), &["solve"]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["case"], "safe_level");
    assert_eq!(doc["m"], "max");
    assert_eq!(doc["ruin_prob"], 0.0);
}

#[test]
fn premium_examples() {
    let out = stdout(&with_config("exponential.json", &["premium", "--d", "0", "--m", "max"]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    let pi_i = doc["pi_i"].as_f64().unwrap();
    assert!((pi_i - 1.25).abs() <= 1e-12);
    assert!(doc["pi_r"].as_f64().unwrap().abs() <= 1e-12);
    for key in ["pi_i", "pi_r", "pi_x", "truncation_error_bound"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let none = stdout(&with_config("exponential.json", &["premium", "--d", "0.5", "--m", "0.5"]));
    let doc: Value = serde_json::from_str(&none).unwrap();
    assert_eq!(doc["pi_i"], 0.0);
}

#[test]
fn malformed_json_exits_2_with_position() {
    let out = with_inline("{\"loss\": {\"family\": \"exponential\", \"rate\": 1.0},\n \"theta\": ", &["solve"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
}

#[test]
fn invalid_parameters_exit_2() {
    let negative = EXP_TEMPLATE.replace("\"rate\": 1.0", "\"rate\": -1.0").replace("WEALTH", "0.5");
    assert_eq!(with_inline(&negative, &["solve"]).status.code(), Some(2));
    let unknown = EXP_TEMPLATE.replace("WEALTH", "0.5").replace("\"theta\"", "\"thetta\"");
    assert_eq!(with_inline(&unknown, &["solve"]).status.code(), Some(2));
    assert_eq!(diml(&["solve"]).status.code(), Some(2));
    let bad_limit = with_config("exponential.json", &["premium", "--d", "1", "--m", "inf"]);
    assert_eq!(bad_limit.status.code(), Some(2));
}

#[test]
fn divergent_premium_exits_3() {
    let heavy = r#"{"loss": {"family": "pareto", "shape": 1.5, "scale": 1.0},
        "distortion": {"family": "proportional_hazard", "c": 0.5}, "theta": 0.1, "wealth": 0.5}"#;
    let out = with_inline(heavy, &["solve"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn out_flag_writes_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solution.json");
    let out = with_config("exponential.json", &["--out", path.to_str().unwrap(), "solve"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), golden("solve_exponential.json"));
}

#[test]
fn verify_passes_on_the_exponential_market() {
    let args = ["verify", "--grid", "128", "--samples", "500", "--cells", "256"];
    let out = with_config("exponential.json", &args);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["passed"], true);
    for key in ["grid_oracle", "random_oracle", "var_duality", "solution"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS"));
}

#[test]
fn simulate_is_reproducible_and_within_four_standard_errors() {
    let args = ["simulate", "--paths", "200000", "--seed", "3"];
    let first = stdout(&with_config("exponential.json", &args));
    assert_eq!(first, stdout(&with_config("exponential.json", &args)));
    let doc: Value = serde_json::from_str(&first).unwrap();
    assert!(doc["z_score"].as_f64().unwrap().abs() <= 4.0);
    assert_eq!(doc["paths"], 200000);
}
