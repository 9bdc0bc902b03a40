use std::process::{Command, Output};

use matchsim::circuit::parse_circuit;
use matchsim::oracle::run_exact;

const BIN: &str = env!("CARGO_BIN_EXE_matchsim");

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn prob_reports_the_oracle_value() {
    let c = parse_circuit(&std::fs::read_to_string(data("adaptive.json")).unwrap()).unwrap();
    let want = run_exact(&c).unwrap().prob(&[("y", 1), ("a", 1)]);
    for backend in ["pfaffian", "oracle", "auto"] {
        let out = run(&["prob", &data("adaptive.json"), "11***", "--backend", backend, "--json"]);
        assert_eq!(out.status.code(), Some(0), "{backend}");
        let got = json(&out)["probability"].as_f64().unwrap();
        assert!((got - want).abs() < 1e-10, "{backend}: {got} vs {want}");
    }
}

#[test]
fn sample_prints_one_string_per_shot() {
    let out = run(&["sample", &data("adaptive.json"), "--shots", "40", "--seed", "3", "--json"]);
    assert!(out.status.success());
    let samples = json(&out)["samples"].as_array().unwrap().clone();
    assert_eq!(samples.len(), 40);
    assert!(samples.iter().all(|s| s.as_str().unwrap().len() == 5));
}

#[test]
fn xcheck_passes_on_swap_circuit() {
    let out = run(&["xcheck", &data("swap.json"), "--shots", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn gadget_expand_writes_a_parseable_circuit() {
    let path = format!("{}/expanded.json", env!("CARGO_TARGET_TMPDIR"));
    let out = run(&["gadget", "expand", &data("swap.json"), "-o", &path, "--json"]);
    assert!(out.status.success());
    let c = parse_circuit(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!c.has_macros());
    assert_eq!(c.input().magic_count(), 1);
    assert_eq!(json(&out)["counters"]["magic_states"], 1);
}

#[test]
fn exit_codes() {
    let bad = format!("{}/bad.json", env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(&bad, "{\"n\": 2, \"input\": [").unwrap();
    assert_eq!(run(&["prob", &bad, "0"]).status.code(), Some(2));
    assert_eq!(run(&["prob", &data("adaptive.json"), "0"]).status.code(), Some(2));
    let capped = run(&["prob", &data("adaptive.json"), "*1***", "--backend", "heisenberg", "--max-adaptive", "0"]);
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(run(&["sample", "/nonexistent.json"]).status.code(), Some(2));
}
