use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.lpv"))
}

fn lpvident(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpvident")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = lpvident(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn path(name: &str) -> String {
    model(name).to_string_lossy().into_owned()
}

#[test]
fn analyze_json() {
    let v = json(&["analyze", &path("nonidentifiable"), "--format", "json"]);
    assert_eq!(v["verdict"]["model"], "non_identifiable");
    let params = v["verdict"]["parameters"].as_array().unwrap();
    assert_eq!(params.len(), 3);
    assert_eq!(params[0]["status"], "global");
    assert_eq!(v["verdict"]["order"], 2);
    for key in ["model", "config", "trace", "verdict", "verifier", "timings"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn analyze_is_deterministic() {
    let args = ["analyze", &path("henon"), "--format", "json", "--method", "both", "--seed", "3"];
    assert_eq!(lpvident(&args).stdout, lpvident(&args).stdout);
}

#[test]
fn analyze_text() {
    let out = lpvident(&["analyze", &path("ahu")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("global"), "{text}");
}

#[test]
fn local_subcommand() {
    let v = json(&["local", &path("burgers"), "--format", "json"]);
    assert_eq!(v["verdict"]["model"], "local");
    assert_eq!(v["verdict"]["method"], "jacobian");
}

#[test]
fn iop_subcommand() {
    let v = json(&["iop", &path("nonidentifiable"), "--order", "2", "--format", "json"]);
    assert_eq!(v["psi"].as_array().unwrap().len(), 1);
    assert_eq!(v["summary"].as_array().unwrap().len(), 4);
    let v = json(&["iop", &path("nonidentifiable"), "--order", "1", "--format", "json"]);
    assert_eq!(v["notice"], "null-space empty");
}

#[test]
fn verify_subcommand() {
    let v = json(&["verify", &path("henon"), "--format", "json"]);
    assert_eq!(v["verifier"]["backsubstitution"], true);
    assert_eq!(v["verifier"]["trajectories"].as_array().unwrap().len(), 3);
}

#[test]
fn budget_exit_code() {
    let out = lpvident(&["analyze", &path("nonidentifiable"), "--max-columns", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_carry_locations() {
    let dir = std::env::temp_dir().join(format!("lpvident-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.lpv");
    std::fs::write(&bad, "time: continuous\nstates: x1\noutputs: y\nparams: theta1\nA: [x1*theta1]\nC: [1]\n").unwrap();
    let out = lpvident(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.lpv:5:"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_file_and_bad_flags() {
    assert_eq!(lpvident(&["analyze", "/nonexistent/model.lpv"]).status.code(), Some(1));
    assert!(!lpvident(&["analyze", &path("decay"), "--trials", "0"]).status.success());
    assert!(!lpvident(&["analyze", &path("decay"), "--method", "taylor"]).status.success());
}
