use std::path::PathBuf;
use std::process::Command;

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name).display().to_string()
}

fn wmfair(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wmfair")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn litmus_exit_codes_follow_expectations() {
    let (code, out, _) = wmfair(&["litmus", &corpus("loadbuffer.lit"), "--model", "ARMv8"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("reachable ok"));
    let (code, out, _) = wmfair(&["litmus", &corpus("sb.lit"), "--model", "SC", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["kind"], "litmus");
    assert_eq!(v["model"], "SC");
    assert!(v.get("wallMs").is_none());
}

#[test]
fn check_reports_verdicts_and_witnesses() {
    let spec = corpus("specs/loadbuffer-never-both.json");
    let (code, out, _) = wmfair(&["check", &corpus("loadbuffer.lit"), "--model", "TSO", "--spec", &spec]);
    assert_eq!(code, 0, "{out}");
    assert!(out.ends_with("ACCEPTED\n"));
    let (code, out, _) = wmfair(&["check", &corpus("loadbuffer.lit"), "--model", "POWER", "--spec", &spec, "--json"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["accepted"], false);
    let w = &v["result"]["witnesses"];
    assert!(w.as_array().unwrap().iter().any(|w| w["states"] == serde_json::json!(["bad"])));
}

#[test]
fn exact_bound_and_dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let (code, out, _) = wmfair(&[
        "check",
        &corpus("memfair.lit"),
        "--model",
        "SC",
        "--spec",
        &corpus("specs/termination.json"),
        "--bound",
        "4",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("exact"));
    let text = std::fs::read_to_string(dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("R = {"));
}

#[test]
fn quant_brackets_the_coin() {
    let (code, out, _) = wmfair(&[
        "quant",
        &corpus("coin.lit"),
        "--model",
        "PSO",
        "--spec",
        &corpus("specs/coin-heads.json"),
        "--json",
        "--timing",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let b = &v["result"]["bracket"];
    assert!(b["lo"].as_f64().unwrap() <= 0.5 && b["hi"].as_f64().unwrap() >= 0.5);
    assert!(v["wallMs"].is_u64());
}

#[test]
fn usage_errors_exit_with_two() {
    let spec = corpus("specs/termination.json");
    let lit = corpus("transfair.lit");
    for args in [
        vec!["quant", &lit, "--model", "SC", "--spec", &spec, "--eps", "0"],
        vec!["check", &lit, "--model", "SC", "--spec", &spec, "--unfair"],
        vec!["check", &lit, "--model", "Alpha", "--spec", &spec],
        vec!["litmus", "/nonexistent.lit", "--model", "SC"],
        vec!["check", &lit, "--model", "SC", "--spec", &lit],
    ] {
        let (code, _, err) = wmfair(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn resource_caps_exit_with_three() {
    let (code, _, err) = wmfair(&[
        "check",
        &corpus("transfair.lit"),
        "--model",
        "SRA",
        "--spec",
        &corpus("specs/termination.json"),
        "--max-bound",
        "4",
    ]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = wmfair(&["litmus", &corpus("iriw.lit"), "--model", "POWER", "--max-states", "50"]);
    assert_eq!(code, 3);
}

#[test]
fn sampling_is_reproducible() {
    let args = ["sample", &corpus("memfair.lit"), "--model", "TSO", "--runs", "8", "--seed", "42", "--json"];
    let (code, a, _) = wmfair(&args);
    assert_eq!(code, 0);
    let (_, b, _) = wmfair(&args);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["result"]["runs"].as_array().unwrap().len(), 8);
    assert_eq!(v["result"]["runs"][0]["seed"], 42);
}
