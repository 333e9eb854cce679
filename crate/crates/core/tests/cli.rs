//! End-to-end tests of the command-line binary: flag handling, environment
//! overrides, output formats, determinism, and the 0/1/2 exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_invariant-towers"));
    c.env_clear();
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn group_info_lists_all_generator_rows_for_13_2() {
    let out = run(&["group-info", "--n", "13", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("order exponent: nu_2(13!) = 10"), "{text}");
    assert!(text.contains("2^10 = 1024"), "{text}");
    assert!(text.contains("orientation subgroup index: 2"), "{text}");
    for label in ["s_{0,1}", "s_{0,6}", "s_{1,1}", "s_{1,3}", "s_{2,1}"] {
        assert!(text.contains(label), "missing {label} in {text}");
    }
    let rows = text.lines().filter(|l| l.trim_start().starts_with("s_{")).count();
    assert_eq!(rows, 10);
}

#[test]
fn group_info_reports_the_trivial_group() {
    let out = run(&["group-info", "--n", "2", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("trivial group"));
}

#[test]
fn group_info_json_reports_order_exponent() {
    let out = run(&["group-info", "--n", "9", "--p", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(value["order_exponent"], 4);
    assert_eq!(value["order"], "3^4");
    assert_eq!(value["order_value"], 81);
    assert_eq!(value["orientation_index"], 3);
    assert_eq!(value["trivial"], false);
}

#[test]
fn group_info_dot_draws_one_cluster_per_generator() {
    let out = run(&["group-info", "--n", "8", "--p", "2", "--format", "dot"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("digraph generators {"), "{text}");
    let clusters = text.matches("subgraph cluster_g").count();
    assert_eq!(clusters, 7); // nu_2(8!) = 7 generators
    assert!(text.contains("dir=both"), "transpositions drawn double-headed: {text}");
}

#[test]
fn build_then_verify_roundtrip_exits_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cert = dir.path().join("p2n8.json");
    let built = run(&["build", "--case", "p2", "--n", "8", "--out", cert.to_str().unwrap()]);
    assert_eq!(built.status.code(), Some(0), "{}", stderr(&built));

    let verified = run(&["verify", cert.to_str().unwrap(), "--format", "json"]);
    assert_eq!(verified.status.code(), Some(0), "{}", stderr(&verified));
    let report: serde_json::Value = serde_json::from_str(&stdout(&verified)).expect("json report");
    assert_eq!(report["ok"], true);
    assert_eq!(report["case"], "p2-n8");
    let checks = report["checks"].as_array().expect("checks array");
    assert_eq!(checks.len(), 10);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn verify_reports_kernel_and_discriminant_cases() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cases: [(&[&str], &str); 2] = [
        (&["build", "--case", "kernel", "--n", "2", "--p", "3"], "kernel-n2-p3"),
        (&["build", "--case", "discriminant"], "discriminant"),
    ];
    for (args, case) in cases {
        let path = dir.path().join(format!("{case}.json"));
        let built = bin()
            .args(args)
            .args(["--out", path.to_str().unwrap()])
            .output()
            .expect("spawn");
        assert_eq!(built.status.code(), Some(0), "{}", stderr(&built));
        let verified = run(&["verify", path.to_str().unwrap()]);
        assert_eq!(verified.status.code(), Some(0), "{}", stderr(&verified));
        assert!(stdout(&verified).contains("result: PASS"));
    }
}

#[test]
fn corrupted_certificate_fails_with_witness_and_exit_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cert = dir.path().join("p2n4.json");
    let built = run(&["build", "--case", "p2", "--n", "4", "--out", cert.to_str().unwrap()]);
    assert_eq!(built.status.code(), Some(0));

    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    value["budget"] = serde_json::json!(5);
    let corrupt = dir.path().join("corrupt.json");
    std::fs::write(&corrupt, serde_json::to_string_pretty(&value).unwrap()).unwrap();

    let verified = run(&["verify", corrupt.to_str().unwrap()]);
    assert_eq!(verified.status.code(), Some(1));
    let text = stdout(&verified);
    assert!(text.contains("FAIL"), "{text}");
    assert!(text.contains("budget"), "witness names the bad field: {text}");
}

#[test]
fn usage_and_resource_errors_exit_two() {
    let missing = run(&["verify", "/nonexistent/cert.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let not_prime = run(&["group-info", "--n", "4", "--p", "6"]);
    assert_eq!(not_prime.status.code(), Some(2));
    assert!(stderr(&not_prime).contains("not prime"));

    let missing_flag = run(&["build", "--case", "p2"]);
    assert_eq!(missing_flag.status.code(), Some(2));

    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let garbage = tempfile::NamedTempFile::new().expect("tempfile");
    std::fs::write(garbage.path(), "{ not json").unwrap();
    let parse = run(&["verify", garbage.path().to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
}

#[test]
fn build_output_is_byte_deterministic() {
    let a = run(&["build", "--case", "cyclic", "--p", "3"]);
    let b = run(&["build", "--case", "cyclic", "--p", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());

    let c = run(&["build", "--case", "podd", "--n", "6", "--p", "3"]);
    let d = run(&["build", "--case", "podd", "--n", "6", "--p", "3"]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn environment_variables_override_missing_flags() {
    let out = bin()
        .args(["group-info"])
        .env("NT_N", "13")
        .env("NT_P", "2")
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("s_{2,1}"));

    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("disc.json");
    let built = bin()
        .args(["build"])
        .env("NT_CASE", "discriminant")
        .env("NT_OUT", path.to_str().unwrap())
        .output()
        .expect("spawn");
    assert_eq!(built.status.code(), Some(0), "{}", stderr(&built));
    assert!(Path::new(&path).exists());
    let verified = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(verified.status.code(), Some(0));
}
