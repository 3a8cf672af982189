use std::path::Path;
use std::process::{Command, Output};

fn pmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmt"))
        .current_dir(dir)
        .env_remove("PMT_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const E2_SPACE: &str = r#"{"oracle": "E2-open-interval", "K": 2, "n": 1,
  "domain": [[0.0, 1.0, true, true]], "class": "PartialBMetric", "hausdorff": false}"#;

const UNIT_METRIC: &str = r#"{"oracle": "abs_diff", "K": 1, "n": 1,
  "domain": [[0.0, 1.0, false, false]], "class": "Metric", "hausdorff": true, "complete": true}"#;

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e2.json"), E2_SPACE).unwrap();
    std::fs::write(dir.path().join("unit.json"), UNIT_METRIC).unwrap();
    dir
}

#[test]
fn fixture_run_succeeds_and_writes_outputs() {
    let dir = workdir();
    let out = pmt(dir.path(), &["fixtures", "run", "E3-kannan-family", "--seed", "7", "--out", "res"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/E3-kannan-family.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["command"], "fixtures run");
    let trace = std::fs::read_to_string(dir.path().join("res/E3-kannan-family.trace.csv")).unwrap();
    assert!(trace.starts_with("n,x,step_dist"));
}

#[test]
fn fixtures_list_names_every_fixture() {
    let dir = workdir();
    let out = pmt(dir.path(), &["fixtures", "list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in pmt::fixtures::FIXTURE_NAMES {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn check_partial_metric_axioms() {
    let dir = workdir();
    let out = pmt(dir.path(), &["check", "--space", "e2.json", "--report-out", "r.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["report"]["pm4"], "pass");
    // D1 fails on this space, so the full suite reports a failed check.
    let out = pmt(dir.path(), &["check", "--space", "e2.json", "--axioms", "all"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_contraction_constant_is_an_input_error() {
    let dir = workdir();
    std::fs::write(dir.path().join("bad.json"), r#"{"k": 1.5, "t1": {"divide_by": 2}, "t2": {"divide_by": 2}}"#).unwrap();
    let out = pmt(dir.path(), &["solve", "--space", "unit.json", "--scheme", "banach-pair", "--config", "bad.json", "--x0", "1"]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("k = 1.5"));
}

#[test]
fn violated_hypothesis_exits_two() {
    let dir = workdir();
    std::fs::write(dir.path().join("c.json"), r#"{"k": 0.3333333333333333, "t1": {"divide_by": 3}, "t2": {"divide_by": 5}}"#).unwrap();
    let out = pmt(dir.path(), &["solve", "--space", "unit.json", "--scheme", "banach-pair", "--config", "c.json", "--x0", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_writes_trace_and_report() {
    let dir = workdir();
    std::fs::write(dir.path().join("ok.json"), r#"{"k": 0.5, "t1": {"divide_by": 2}, "t2": {"divide_by": 2}}"#).unwrap();
    let out = pmt(
        dir.path(),
        &[
            "solve", "--space", "unit.json", "--scheme", "banach-pair", "--config", "ok.json", "--x0", "1",
            "--trace-out", "t.csv", "--report-out", "r.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(trace.lines().nth(2).unwrap().split(',').nth(1), Some("0.5"));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["report"]["solver"], "banach-pair");
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = workdir();
    std::fs::write(dir.path().join("x.json"), r#"{"k": 0.5, "t1": "identity", "t2": "identity", "bogus": 1}"#).unwrap();
    let out = pmt(dir.path(), &["solve", "--space", "unit.json", "--scheme", "banach-pair", "--config", "x.json", "--x0", "0.5"]);
    assert_eq!(code(&out), 65);
}

#[test]
fn parse_errors_exit_64() {
    let dir = workdir();
    assert_eq!(code(&pmt(dir.path(), &["frobnicate"])), 64);
    assert_eq!(code(&pmt(dir.path(), &["check"])), 64);
    assert_eq!(code(&pmt(dir.path(), &["--help"])), 0);
}

#[test]
fn unknown_fixture_and_missing_file_are_input_errors() {
    let dir = workdir();
    let out = pmt(dir.path(), &["fixtures", "run", "E9"]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("E1-maxpow"));
    assert_eq!(code(&pmt(dir.path(), &["check", "--space", "missing.json"])), 65);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = workdir();
    let out = Command::new(env!("CARGO_BIN_EXE_pmt"))
        .current_dir(dir.path())
        .env("PMT_SEED", "42")
        .args(["check", "--space", "e2.json", "--report-out", "r.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["seed"], 42);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = workdir();
    for out in ["a", "b"] {
        let o = pmt(dir.path(), &["fixtures", "run", "E5-chatterjea-family", "--seed", "3", "--out", out]);
        assert_eq!(code(&o), 0);
        let o = pmt(dir.path(), &["check", "--space", "e2.json", "--seed", "3", "--report-out", &format!("{out}.json")]);
        assert_eq!(code(&o), 0);
    }
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/E5-chatterjea-family.json"), read("b/E5-chatterjea-family.json"));
    assert_eq!(read("a/E5-chatterjea-family.trace.csv"), read("b/E5-chatterjea-family.trace.csv"));
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn series_from_rate_file() {
    let dir = workdir();
    let rates: String = std::iter::once("a_i".to_string())
        .chain((1..=200).map(|i| format!("{}", 0.5f64.powi(i))))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(dir.path().join("rates.csv"), rates).unwrap();
    let out = pmt(dir.path(), &["series", "--rates", "rates.csv", "--report-out", "s.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(r["assumptions"]["complete"], false);
}
