//! End-to-end checks of the command-line interface: exit codes, output
//! formats, and cap overrides.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_gradedkap")
}

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(format!("{name}.json"))
        .canonicalize()
        .unwrap()
}

#[test]
fn check_passes_on_valid_input() {
    let out = Command::new(exe())
        .args(["check", "-i", spec("heisenberg3").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("homological check: PASS"));
}

#[test]
fn check_fails_with_exit_one_on_violator() {
    let out = Command::new(exe())
        .args(["check", "-i", spec("jacobi_violation").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"));
    assert!(text.contains("[Q,Q]"), "witness must be shown: {text}");
}

#[test]
fn parse_errors_exit_two() {
    let dir = std::env::temp_dir().join("gradedkap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\"").unwrap();
    let out = Command::new(exe())
        .args(["check", "-i", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown files too
    let out = Command::new(exe())
        .args(["check", "-i", dir.join("missing.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_suite_json_and_threads_env() {
    let out = Command::new(exe())
        .env("GRADEDKAP_THREADS", "2")
        .args([
            "verify",
            "-i",
            spec("nonabelian2").to_str().unwrap(),
            "--suite",
            "pbw",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["suite"], "pbw");
    assert_eq!(report["passed"], true);
    assert!(report["suites"][0]["checks"].as_array().unwrap().len() >= 4);
    // timing stays out of the payload
    assert!(!String::from_utf8_lossy(&out.stdout).contains("elapsed"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("elapsed"));
}

#[test]
fn verify_rejects_unknown_suite() {
    let out = Command::new(exe())
        .args([
            "verify",
            "-i",
            spec("nonabelian2").to_str().unwrap(),
            "--suite",
            "nonsense",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn brackets_emits_tower_and_honours_max_arity() {
    let out = Command::new(exe())
        .args([
            "brackets",
            "-i",
            spec("ternary_q3").to_str().unwrap(),
            "--max-arity",
            "3",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tower"]["recursion_matches_extraction"], true);
    let arities = report["tower"]["arities"].as_array().unwrap();
    assert_eq!(arities.len(), 2); // arities 2 and 3
    // the ternary bracket feeds both layers: weight-one coefficients at
    // arity 2, constants at arity 3
    assert_eq!(arities[0]["arity"], 2);
    assert_eq!(arities[0]["entries"].as_array().unwrap().len(), 3);
    assert_eq!(arities[1]["arity"], 3);
    assert!(!arities[1]["entries"].as_array().unwrap().is_empty());
}

#[test]
fn atiyah_reports_cocycle_and_class() {
    let out = Command::new(exe())
        .args([
            "atiyah",
            "-i",
            spec("dgvec").to_str().unwrap(),
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["atiyah"]["cocycle_is_zero"], true);
    assert_eq!(report["atiyah"]["class_is_zero"], true);
}

#[test]
fn cohomology_requires_cap_over_even_generators() {
    // dgvec carries a weight cap in its document, so stripping the cap via
    // a rewritten file must fail cleanly
    let dir = std::env::temp_dir().join("gradedkap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let original = std::fs::read_to_string(spec("dgvec")).unwrap();
    let stripped = original.replace(",\n  \"truncation\": {\"weight\": 6, \"arity\": 4}", "");
    assert_ne!(original, stripped, "fixture must contain the truncation line");
    let path = dir.join("dgvec_nocap.json");
    std::fs::write(&path, stripped).unwrap();
    let out = Command::new(exe())
        .args([
            "cohomology",
            "-i",
            path.to_str().unwrap(),
            "--module",
            "adjoint",
            "--degree",
            "0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    // with an explicit cap it works and is flagged approximate
    let out = Command::new(exe())
        .args([
            "cohomology",
            "-i",
            path.to_str().unwrap(),
            "--module",
            "adjoint",
            "--degree",
            "0",
            "--weight",
            "4",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["cohomology"]["approximate"], true);
}

#[test]
fn output_file_flag_writes_report() {
    let dir = std::env::temp_dir().join("gradedkap-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let _ = std::fs::remove_file(&path);
    let out = Command::new(exe())
        .args([
            "check",
            "-i",
            spec("abelian2").to_str().unwrap(),
            "--format",
            "json",
            "-o",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["spec"]["name"], "abelian2");
}
