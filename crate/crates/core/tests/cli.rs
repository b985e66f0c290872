use std::process::Command as Process;

use clap::Parser;
use rllforge::cli::{main_with, run, Cli, Command, RunConfig};
use serde_json::Value;
use tempfile::TempDir;

fn cli(args: &[&str]) -> Cli {
    let mut full = vec!["rllforge"];
    full.extend_from_slice(args);
    Cli::try_parse_from(full).unwrap()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn passing_run_writes_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let code = main_with(cli(&["check-r", "--seed", "7", "--quiet", "--out", out.to_str().unwrap()]), None);
    assert_eq!(code, 0);
    let v = read_json(&out);
    assert_eq!(v["seed"], 7);
    assert!(v["timestamp"].is_u64());
    assert!(!v["checks"].as_array().unwrap().is_empty());
}

#[test]
fn injected_fault_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fault.json", r#"{"inject_fault": "invert_k1k2_ratio", "samples": {"count": 5}}"#);
    assert_eq!(main_with(cli(&["verify-rll", "--config", &cfg, "--seed", "3", "--quiet"]), None), 1);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(&dir, "bad.json", r#"{"samples": {"count": "many"}}"#);
    assert_eq!(main_with(cli(&["check-r", "--config", &bad, "--seed", "1", "--quiet"]), None), 2);
    assert_eq!(main_with(cli(&["check-r", "--quiet"]), None), 2);
    assert_eq!(main_with(cli(&["check-r", "--config", "/nonexistent/x.json", "--quiet"]), Some("1".into())), 2);
    assert_eq!(main_with(cli(&["check-r", "--seed", "1", "--tol=-1", "--quiet"]), None), 2);
}

#[test]
fn seed_sources_take_precedence_in_order() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "seeded.json", r#"{"seed": 42, "samples": {"count": 4}}"#);
    let out = dir.path().join("r.json");
    let o = out.to_str().unwrap();
    assert_eq!(main_with(cli(&["currents", "--quiet", "--out", o]), Some("9".into())), 0);
    assert_eq!(read_json(&out)["seed"], 9);
    assert_eq!(main_with(cli(&["currents", "--config", &cfg, "--quiet", "--out", o]), Some("9".into())), 0);
    assert_eq!(read_json(&out)["seed"], 42);
    assert_eq!(main_with(cli(&["currents", "--config", &cfg, "--seed", "5", "--quiet", "--out", o]), None), 0);
    assert_eq!(read_json(&out)["seed"], 5);
}

#[test]
fn output_path_from_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from_cfg.json");
    let body = format!(r#"{{"output": {:?}, "samples": {{"count": 4}}}}"#, out.to_str().unwrap());
    let cfg = write_config(&dir, "out.json", &body);
    assert_eq!(main_with(cli(&["orbit", "--config", &cfg, "--seed", "2", "--quiet"]), None), 0);
    assert!(out.exists());
}

#[test]
fn every_command_passes_on_defaults() {
    let mut cfg = RunConfig::default();
    cfg.samples.count = 6;
    cfg.samples.triples = 6;
    cfg.samples.tag_pairs = 4;
    for cmd in [Command::CheckR, Command::Orbit, Command::Currents, Command::VerifyRll, Command::VerifyEf, Command::Transfer] {
        let out = run(cmd, &cfg, 13, cfg.tolerance).unwrap();
        assert!(out.passed(), "{}: {}", cmd.name(), out.report.to_json());
        assert_eq!(out.deterministic_json(), run(cmd, &cfg, 13, cfg.tolerance).unwrap().deterministic_json());
    }
}

#[test]
fn rational_table_config() {
    let body = r#"{
        "r_matrix": {"entries": {
            "a": {"num": [1], "den": [1]},
            "b": {"num": [0, 1], "den": [0.3, 1]},
            "c": {"num": [0, 1], "den": [0.3, 1]},
            "d": {"num": [1], "den": [1]},
            "s": {"num": [0.3], "den": [0.3, 1]},
            "t": {"num": [0.3], "den": [0.3, 1]}
        }, "hbar": 0.3},
        "samples": {"count": 5, "triples": 5}
    }"#;
    let cfg = RunConfig::from_json(body).unwrap();
    assert!(run(Command::CheckR, &cfg, 1, 1e-10).unwrap().passed());
    let text = serde_json::to_string(&cfg.to_value()).unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
}

#[test]
fn binary_runs_end_to_end() {
    let out = Process::new(env!("CARGO_BIN_EXE_rllforge"))
        .args(["check-r", "--quiet"])
        .env("RLLFORGE_SEED", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = Process::new(env!("CARGO_BIN_EXE_rllforge")).args(["check-r"]).env_remove("RLLFORGE_SEED").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
