//! CLI-level acceptance: determinism of the JSON reports (criterion 12)
//! and the exit-code contract, exercised against the real binary.

use std::process::Command;
use std::time::Instant;

fn vrx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vrx"))
}

#[test]
fn criterion_12_byte_identical_reports() {
    let start = Instant::now();
    let run = || {
        let out = vrx()
            .args([
                "verify",
                "--instance",
                "dsum(comm:zmod:3,virasoro:zmod:3:1)",
                "--max-weight",
                "5",
                "--grid-weight",
                "3",
                "--json",
                "--seed",
                "7",
            ])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run();
    let second = run();
    let pass = first == second && !first.is_empty();
    println!(
        "ACCEPTANCE 12: {} — two consecutive full-suite runs produce byte-identical JSON ({:.2?})",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed()
    );
    assert!(pass);
}

#[test]
fn exit_codes() {
    // 0: all checks pass
    let ok = vrx()
        .args(["verify", "--instance", "comm:zmod:7", "--suite", "vacuum,jacobi"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));

    // 1: a check fails (corrupted fixture)
    let fail = vrx()
        .args([
            "verify",
            "--instance",
            "comm:zmod:7",
            "--suite",
            "vacuum",
            "--corrupt-fixture",
        ])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let text = String::from_utf8_lossy(&fail.stdout);
    assert!(text.contains("FAIL"), "witness missing: {text}");

    // 2: parse/build errors
    let parse = vrx().args(["verify", "--instance", "bogus:1"]).output().unwrap();
    assert_eq!(parse.status.code(), Some(2));
    let build = vrx()
        .args(["verify", "--instance", "dsum(comm:zmod:2,comm:zmod:3)"])
        .output()
        .unwrap();
    assert_eq!(build.status.code(), Some(2));
}

#[test]
fn binom_subcommand() {
    let out = vrx().args(["binom", "--", "-2", "3"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "-4");
    let out = vrx()
        .args(["binom", "--check-identities", "--range", "8", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["identities"].as_array().unwrap().len(), 4);
    for id in v["identities"].as_array().unwrap() {
        assert_eq!(id["pass"], serde_json::json!(true));
    }
}

#[test]
fn pierce_subcommand_json_shape() {
    let out = vrx()
        .args(["pierce", "--instance", "comm:zmod:60", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["idempotentCount"], serde_json::json!(8));
    assert_eq!(v["stonePoints"], serde_json::json!(3));
    assert_eq!(v["vnr"]["verdict"], serde_json::json!(false));
    assert_eq!(v["vnr"]["witness"], serde_json::json!("2*1"));
    assert_eq!(v["globalSectionsIso"], serde_json::json!(true));
    let descriptors: Vec<&str> = v["stalks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["descriptor"].as_str().unwrap())
        .collect();
    let mut sorted = descriptors.clone();
    sorted.sort();
    assert_eq!(sorted, vec!["zmod:3", "zmod:4", "zmod:5"]);
}

#[test]
fn out_flag_writes_identical_json() {
    let dir = std::env::temp_dir().join("vrx-out-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = vrx()
        .args([
            "verify",
            "--instance",
            "comm:zmod:30",
            "--suite",
            "vacuum",
            "--json",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let file = std::fs::read(&path).unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.trim(), String::from_utf8_lossy(&file).trim());
}
