use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn skago(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skago"))
        .args(args)
        .env_remove("SKAGO_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn strip_runtime(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.contains("runtime-seconds"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skago-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn envelope_fields() {
    let v = json_of(&skago(&["stats", "--example1", "0.25", "0.125"]));
    for key in ["tool", "version", "command", "config-hash", "inputs", "result", "runtime-seconds"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config-hash"].as_str().unwrap().len(), 64);
    let i = v["result"]["stats"]["mutual_info"].as_f64().unwrap();
    assert!((i - 0.35246).abs() < 1e-4);
}

#[test]
fn beta_identical_pmfs() {
    let v = json_of(&skago(&["beta", "--p", "0.2,0.3,0.5", "--q", "0.2,0.3,0.5", "--eps", "0.3"]));
    assert!((v["result"]["beta"].as_f64().unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn mixed_capacity_exceeds_noninteractive() {
    let v = json_of(&skago(&["mixed", "--p1", "0.05", "--p2", "0.15", "--q", "0.1"]));
    let r = &v["result"]["closed-form"];
    assert!(r["capacity"].as_f64().unwrap() > r["noninteractive"].as_f64().unwrap());
}

#[test]
fn single_n_gives_single_row() {
    let out = skago(&["bounds", "--n", "10000", "--eps-plus-delta", "0.05", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2, "{text}");
    assert!(rows[0].starts_with("n,lower_bits"));
    assert!(text.contains("seed=0x0"));
}

#[test]
fn default_bounds_writes_three_curves() {
    let dir = scratch("curves");
    let out = skago(&["bounds", "--format", "csv", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 3, "{names:?}");
    for name in names {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
        assert!(text.lines().last().unwrap().starts_with("# runtime-seconds="));
    }
}

#[test]
fn simulate_is_byte_identical() {
    let args = ["simulate", "--n", "6", "--trials", "300", "--gamma", "3", "--seed", "0xbeef"];
    let a = skago(&args);
    let b = skago(&args);
    assert!(a.status.success());
    assert_eq!(strip_runtime(&a.stdout), strip_runtime(&b.stdout));
    let c = skago(&["simulate", "--n", "6", "--trials", "300", "--gamma", "3", "--seed", "0xbeee"]);
    assert_ne!(strip_runtime(&a.stdout), strip_runtime(&c.stdout));
}

#[test]
fn seed_env_fallback() {
    let base = ["simulate", "--n", "4", "--trials", "50"];
    let flag = Command::new(env!("CARGO_BIN_EXE_skago"))
        .args(base)
        .args(["--seed", "2a"])
        .output()
        .unwrap();
    let env = Command::new(env!("CARGO_BIN_EXE_skago"))
        .args(base)
        .env("SKAGO_SEED", "2a")
        .output()
        .unwrap();
    assert_eq!(strip_runtime(&flag.stdout), strip_runtime(&env.stdout));
    assert_eq!(json_of(&env)["seed"], "0x2a");
}

#[test]
fn perfectly_correlated_source_is_reliable() {
    let dir = scratch("source");
    let path = dir.join("same.json");
    std::fs::write(&path, r#"{"nx": 2, "ny": 2, "p": [0.5, 0, 0, 0.5]}"#).unwrap();
    let v = json_of(&skago(&[
        "simulate", "--source", path.to_str().unwrap(), "--n", "6", "--trials", "500",
        "--lambda-max", "1", "--gamma", "3",
    ]));
    assert_eq!(v["result"]["report"]["reliability"].as_f64().unwrap(), 1.0);
}

#[test]
fn simulate_failure_within_theorem_bound() {
    let v = json_of(&skago(&[
        "simulate", "--n", "8", "--trials", "10000", "--gamma", "10", "--lambda-max", "25",
    ]));
    let r = &v["result"];
    let rate = r["report"]["failure_rate"].as_f64().unwrap();
    let sigma = r["report"]["failure_sigma"].as_f64().unwrap();
    let eps = r["theorem-bounds"]["bounds"]["eps"].as_f64().unwrap();
    assert!(eps < 1.0, "bound should be informative: {eps}");
    assert!(rate <= eps + 3.0 * sigma, "{rate} vs {eps}");
}

#[test]
fn trace_file_has_one_summary_per_session() {
    let dir = scratch("trace");
    let path = dir.join("t.jsonl");
    let out = skago(&["simulate", "--n", "4", "--trials", "20", "--trace", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    let summaries = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v.get("summary").is_some())
        .count();
    assert_eq!(summaries, 20);
}

#[test]
fn exact_reports_bounds_side_by_side() {
    let v = json_of(&skago(&[
        "exact", "--n", "3", "--gamma", "6", "--lambda-max", "10", "--samples", "10000",
    ]));
    let r = &v["result"];
    assert!(r["exact"]["eps"].is_number());
    assert!(r["theorem-bounds"]["bounds"]["delta"].is_number());
    assert_eq!(r["bounds-dominate"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(skago(&["beta", "--p", "0.5,0.6", "--q", "1", "--eps", "0.1"]).status.code(), Some(2));
    assert_eq!(skago(&["bounds", "--Delta", "-1"]).status.code(), Some(2));
    assert_eq!(skago(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(skago(&["exact", "--n", "8", "--cap", "1000"]).status.code(), Some(3));
    assert_eq!(skago(&["mixed", "--p1", "0.3", "--p2", "0.1"]).status.code(), Some(2));
}
