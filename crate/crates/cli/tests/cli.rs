use std::fs;
use std::path::PathBuf;
use std::process::Command;

use qex_cli::corpus::load_corpus;
use serde_json::Value;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn qex(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["qex"];
    argv.extend_from_slice(args);
    let code = qex_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = qex(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn path(name: &str) -> String {
    corpus().join(name).display().to_string()
}

#[test]
fn analyze_fig1() {
    let v = json(&["analyze", &path("fig1.wl"), "--var", "z"]);
    let d = v["distribution"].as_object().unwrap();
    assert_eq!(d.len(), 8);
    assert_eq!(d["1"]["num"], 5);
    assert_eq!(d["8"]["num"], 13);
    assert_eq!(d["8"]["den"], 64);
    assert_eq!(v["report"]["over_rate_pct"], 100.0);
    assert_eq!(v["report"]["under_rate_pct"], 0.0);
}

#[test]
fn estimate_uses_closed_forms() {
    let v = json(&["estimate", &path("fig1.wl"), "-n", "64"]);
    let n: u128 = 64;
    // Two additions and one comparison, one branch.
    let gates = 3 * (3 * n * (n + 1) / 2) + 9 * n * (n + 1) + 1;
    let depth = 3 * (5 * n - 2) + 10 * n - 3;
    assert_eq!(v["estimate"]["model"]["gates"], gates.to_string());
    assert_eq!(v["estimate"]["model"]["depth"], depth.to_string());
    assert_eq!(v["estimate"]["measured"]["qubits"], 34);
}

#[test]
fn check_reports_pointer_statements() {
    let (code, out, _) = qex(&["check", &path("list2.wl"), "--backend", "quantum"]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 2);
    let (code, _, _) = qex(&["check", &path("list2.wl"), "--backend", "classical"]);
    assert_eq!(code, 0);
}

#[test]
fn exit_codes() {
    assert_eq!(qex(&["frobnicate"]).0, 1);
    assert_eq!(qex(&["analyze"]).0, 1);
    assert_eq!(qex(&["analyze", &path("fig1.wl"), "--width", "x"]).0, 1);
    assert_eq!(qex(&["--help"]).0, 0);
    assert_eq!(qex(&["analyze", "/nonexistent.wl"]).0, 2);
    assert_eq!(qex(&["run", &path("fig1.wl"), "--cap", "10"]).0, 2);
    assert_eq!(qex(&["search", &path("fig1.wl"), "--target", "q == 1"]).0, 2);
    assert_eq!(qex(&["synth", &path("fig1.wl"), "--opt", "bogus"]).0, 2);
}

#[test]
fn binary_honours_cap_env() {
    let bin = env!("CARGO_BIN_EXE_qex");
    let ok = Command::new(bin).args(["run", &path("fig1.wl")]).output().unwrap();
    assert!(ok.status.success());
    let capped = Command::new(bin).args(["run", &path("fig1.wl")]).env("QEX_CAP", "10").output().unwrap();
    assert_eq!(capped.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("error"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    for args in [
        vec!["run", "SRC", "--seed", "9", "--shots", "300"],
        vec!["search", "SRC", "--target", "z >= 6", "--seed", "4"],
    ] {
        let args: Vec<String> = args.iter().map(|a| if *a == "SRC" { path("fig1.wl") } else { a.to_string() }).collect();
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(qex(&a).1, qex(&a).1);
    }
}

#[test]
fn analyze_matches_oracle_on_corpus() {
    for e in load_corpus(&corpus()).unwrap() {
        if e.program.body.iter().any(|s| s.contains_pointer_stmt()) {
            continue;
        }
        let f = e.path.display().to_string();
        let a = json(&["analyze", &f]);
        let o = json(&["oracle", &f]);
        let keys = |v: &Value| v["distribution"].as_object().unwrap().keys().cloned().collect::<Vec<_>>();
        assert_eq!(keys(&a), keys(&o), "{}", e.name());
        for (k, d) in a["distribution"].as_object().unwrap() {
            let (n1, d1) = (d["num"].as_u64().unwrap(), d["den"].as_u64().unwrap());
            let (n2, d2) = (o["distribution"][k]["num"].as_u64().unwrap(), o["total"].as_u64().unwrap());
            assert_eq!(n1 * d2, n2 * d1, "{} value {k}", e.name());
        }
    }
}

#[test]
fn table_format_renders_same_data() {
    let (code, out, _) = qex(&["synth", &path("fig1.wl"), "--format", "table"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("qubits") && l.trim_end().ends_with("34")));
}

#[test]
fn synth_qasm_and_hybrid() {
    let (code, out, _) = qex(&["synth", &path("fig1.wl"), "--qasm"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("qubits 34;"));
    let v = json(&["hybrid", &path("list2.wl")]);
    assert_eq!(v["split_line"], 7);
    assert_eq!(v["report"]["over_rate_pct"], 100.0);
    let v = json(&["hybrid", &path("list2.wl"), "--prefix", "interval"]);
    assert!(v["report"]["over_rate_pct"].as_f64().unwrap() > 100.0);
    assert_eq!(v["report"]["under_rate_pct"], 0.0);
    assert_eq!(qex(&["hybrid", &path("list2.wl"), "--split", "1"]).0, 2);
}

#[test]
fn hybrid_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, r#"{"split": 3, "prefix_backend": "interval", "delta": 0.2, "target": "return == 27"}"#).unwrap();
    let v = json(&["hybrid", &path("list2.wl"), "--plan", plan.to_str().unwrap()]);
    assert_eq!(v["plan"]["prefix_backend"], "interval");
    assert!(v["search"]["p_final"].as_f64().unwrap() >= 1.0 - 0.04 - 1e-9);
}

#[test]
fn corpus_loader() {
    let entries = load_corpus(&corpus()).unwrap();
    assert!(entries.len() >= 10);
    let files: Vec<&PathBuf> = entries.iter().map(|e| &e.path).collect();
    let mut sorted = files.clone();
    sorted.sort();
    assert_eq!(files, sorted);

    let dir = tempfile::tempdir().unwrap();
    assert!(load_corpus(dir.path()).unwrap().is_empty());
    let (code, out, _) = qex(&["analyze", dir.path().to_str().unwrap()]);
    assert_eq!((code, out.trim()), (0, "[]"));

    fs::write(dir.path().join("a.wl"), "int f(int x) { return x; }").unwrap();
    fs::write(dir.path().join("b.wl"), "int f(int y) { return y; }").unwrap();
    fs::write(dir.path().join("c.wl"), "int g(int x) { return x }").unwrap();
    let err = load_corpus(dir.path()).unwrap_err();
    assert_eq!(err.failures.len(), 2);
    assert!(err.failures[0].0.ends_with("b.wl") && err.failures[0].1.contains("duplicate"));
    assert!(err.failures[1].0.ends_with("c.wl") && err.failures[1].1.contains("syntax error"));
}
