use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(name)
}

fn guardivp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guardivp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn record(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON record")
}

fn le(a: &str, b: &str) -> bool {
    a.parse::<f64>().unwrap() <= b.parse::<f64>().unwrap()
}

#[test]
fn benchmark_brackets_the_reference_crossing_time() {
    let path = problem("damped_oscillator.toml");
    let out = guardivp(&[
        "--problem",
        path.to_str().unwrap(),
        "--bits",
        "20",
        "--digits",
        "10",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = record(&out);
    assert_eq!(r["status"], "BRACKETED");
    let (lo, hi) = (r["t_lo"].as_str().unwrap(), r["t_hi"].as_str().unwrap());
    assert!(
        le(lo, "73.5422061995") && le("73.5422061995", hi),
        "[{lo}, {hi}]"
    );
    assert_eq!(r["state_lo"].as_array().unwrap().len(), 2);
    let stats = &r["stats"];
    for key in ["n", "p", "b", "s", "l_max", "time"] {
        assert!(stats.get(key).is_some(), "missing stats.{key}");
    }
    assert_eq!(stats["n"], 20);
}

#[test]
fn unreachable_guard_with_small_budget_is_left_only() {
    let path = problem("stationary.toml");
    let out = guardivp(&[
        "--problem",
        path.to_str().unwrap(),
        "--bits",
        "10",
        "--max-big-steps",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = record(&out);
    assert_eq!(r["status"], "LEFT_ONLY");
    assert!(r.get("t_hi").is_none());
    assert!(r["t_lo"].as_str().unwrap().parse::<f64>().unwrap() > 0.0);
    assert_eq!(r["stats"]["b"], 5);
}

#[test]
fn missing_problem_flag_is_a_usage_error() {
    let out = guardivp(&["--bits", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--problem"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_bits_flag_is_a_usage_error() {
    let path = problem("blow_up.toml");
    let out = guardivp(&["--problem", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_problem_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(problem("damped_oscillator.toml"))
        .unwrap()
        .replace("x = [1, 0]", "x = [1, 0, 0]");
    std::fs::write(&path, text).unwrap();
    let out = guardivp(&["--problem", path.to_str().unwrap(), "--bits", "20"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("flow[1].terms[0].x"), "{err}");

    let missing = dir.path().join("absent.toml");
    let out = guardivp(&["--problem", missing.to_str().unwrap(), "--bits", "20"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_overrides_are_input_errors() {
    let path = problem("blow_up.toml");
    let p = path.to_str().unwrap();
    for args in [
        vec!["--problem", p, "--bits", "20", "--delta", "-1"],
        vec!["--problem", p, "--bits", "20", "--epsilon", "abc"],
        vec!["--problem", p, "--bits", "0"],
    ] {
        assert_eq!(guardivp(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn trajectory_export_has_a_header_and_increasing_times() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("trajectory.csv");
    let path = problem("sine_at_ten.toml");
    let out = guardivp(&[
        "--problem",
        path.to_str().unwrap(),
        "--bits",
        "16",
        "--trajectory",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["t", "y1", "y2"]);
    let mut last = f64::NEG_INFINITY;
    let mut rows = 0;
    for row in reader.records() {
        let row = row.unwrap();
        assert_eq!(row.len(), 3);
        let t: f64 = row[0].parse().unwrap();
        let (y1, y2): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!(t > last);
        assert!(
            (y1 - t.sin()).abs() < 1e-6 && (y2 - t.cos()).abs() < 1e-6,
            "t = {t}"
        );
        last = t;
        rows += 1;
    }
    assert!(rows > 1);
    assert!(last <= 10.0);
}

#[test]
fn stats_flag_prints_the_table_row() {
    let path = problem("blow_up.toml");
    let out = guardivp(&[
        "--problem",
        path.to_str().unwrap(),
        "--bits",
        "20",
        "--stats",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    let mut lines = err.lines();
    assert_eq!(lines.next(), Some("n\tp\tb\ts\tl_max\ttime"));
    let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(row.len(), 6);
    assert_eq!(row[0], "20");
}

#[test]
fn flag_overrides_take_precedence_over_file_options() {
    // stationary.toml sets max_big_steps = 50.
    let path = problem("stationary.toml");
    let p = path.to_str().unwrap();
    let from_file = record(&guardivp(&["--problem", p, "--bits", "10"]));
    assert_eq!(from_file["stats"]["b"], 50);
    let overridden = record(&guardivp(&[
        "--problem",
        p,
        "--bits",
        "10",
        "--max-big-steps",
        "3",
    ]));
    assert_eq!(overridden["stats"]["b"], 3);
}

#[test]
fn printed_digits_follow_the_digits_flag() {
    let path = problem("blow_up.toml");
    let out = guardivp(&[
        "--problem",
        path.to_str().unwrap(),
        "--bits",
        "30",
        "--digits",
        "4",
    ]);
    let r = record(&out);
    assert_eq!(r["t_lo"], "0.4999");
    assert_eq!(r["t_hi"], "0.5001");
}

#[test]
fn ball_contact_example_brackets_three_minus_inverse_root_two() {
    let path = problem("ball_contact.toml");
    let out = guardivp(&["--problem", path.to_str().unwrap(), "--bits", "24"]);
    assert_eq!(out.status.code(), Some(0));
    let r = record(&out);
    let t = 3.0 - 0.5f64.sqrt();
    let lo: f64 = r["t_lo"].as_str().unwrap().parse().unwrap();
    let hi: f64 = r["t_hi"].as_str().unwrap().parse().unwrap();
    assert!(lo <= t && t <= hi, "[{lo}, {hi}]");
}

#[test]
fn help_exits_successfully() {
    let out = guardivp(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--trajectory"));
}
