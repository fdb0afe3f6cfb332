use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affine-cs"))
        .args(args)
        .env_remove("AFFINE_CS_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn finite_cs_passes() {
    let out = run(&["verify", "finite-cs", "--spec", "A2", "--labels", "1,1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("pass finite-cs A2"));
}

#[test]
fn header_on_stderr() {
    let out = run(&["exponents", "--spec", "E8", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("# affine-cs "), "{err}");
    assert!(err.contains("spec=E8 spec_hash="));
    assert!(err.contains("seed=7"));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[1, 7, 11, 13, 17, 19, 23, 29]");
}

#[test]
fn report_json_schema() {
    let out = run(&["verify", "finite-cs", "--spec", "A1", "--labels", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    for key in ["check", "spec", "params", "verdict", "ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["spec"], "A1");
}

#[test]
fn affine_cs_with_direct_and_reciprocal_correction() {
    let direct = run(&["verify", "affine-cs", "--spec", "A1!", "--labels", "0,1", "--depth", "6"]);
    assert_eq!(code(&direct), 1);
    let reciprocal =
        run(&["verify", "affine-cs", "--spec", "A1!", "--labels", "0,1", "--depth", "6", "--correction", "reciprocal"]);
    assert_eq!(code(&reciprocal), 0, "{}", String::from_utf8_lossy(&reciprocal.stdout));
}

#[test]
fn rational_q_is_exact() {
    let out = run(&[
        "verify", "affine-cs", "--spec", "A1!", "--labels", "1,1", "--depth", "4", "--correction", "reciprocal", "--q",
        "5/2", "--q", "3", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["params"]["q"], serde_json::json!(["5/2", "3"]));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["roots", "--spec", "B3"][..],
        &["verify", "finite-cs", "--spec", "A2"],
        &["verify", "finite-cs", "--spec", "A2", "--labels", "1"],
        &["verify", "finite-cs", "--spec", "A2", "--labels", "-1,0"],
        &["character", "--spec", "A1", "--labels", "1", "--margin", "0"],
        &["verify", "affine-cs", "--spec", "A1!", "--labels", "0,1", "--q", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&run(args)), 64, "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn layer_cap_exceeded_is_unstabilized() {
    let out = run(&["whittaker", "--spec", "A2!", "--labels", "1,1,1", "--depth", "6", "--layer-cap", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn character_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for depth in 0..=8 {
        let d = depth.to_string();
        let out = run(&["character", "--spec", "A1!", "--labels", "0,1", "--depth", &d, "--format", "json"]);
        assert_eq!(code(&out), 0);
        let golden = std::fs::read(dir.join(format!("character-A1-affine-0-1-depth{depth}.json"))).unwrap();
        assert_eq!(out.stdout, golden, "depth {depth}");
    }
}

#[test]
fn json_is_byte_identical_without_timing() {
    let args = [
        "verify", "hecke-relations", "--spec", "A2!", "--count", "20", "--seed", "3", "--format", "json", "--no-timing",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn weyl_layers_and_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().to_str().unwrap();
    let args = ["weyl", "--spec", "A1!", "--max-length", "5", "--format", "json", "--cache-dir", cache];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout_json(&first)["sizes"], serde_json::json!([1, 2, 2, 2, 2, 2]));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 1);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn recursion_single_pair_and_range() {
    let single = run(&["verify", "recursion", "--spec", "A2", "--labels", "1,1", "--word", "1", "--generator", "2"]);
    assert_eq!(code(&single), 0);
    let range = run(&["verify", "recursion", "--spec", "A1!", "--labels", "1,1", "--max-length", "3"]);
    assert_eq!(code(&range), 0);
    let bad = run(&["verify", "recursion", "--spec", "A2", "--labels", "1,1", "--word", "1", "--generator", "1"]);
    assert_eq!(code(&bad), 64);
}

#[test]
fn smaller_checks() {
    for args in [
        &["verify", "denominator-identity", "--spec", "A1!", "--depth", "6"][..],
        &["verify", "polynomiality", "--spec", "A1!", "--labels", "1,1", "--depth", "4"],
        &["verify", "gk-limit", "--spec", "A2", "--nu", "1,1", "--depth", "4"],
        &["verify", "symmetrizer", "--spec", "A1!", "--labels", "0,1", "--depth", "5", "--buffer", "3"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn roots_catalogue() {
    let out = run(&["roots", "--spec", "A1!", "--depth", "4", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let roots = stdout_json(&out);
    let coords: Vec<Value> = roots.as_array().unwrap().iter().map(|r| r["coords"].clone()).collect();
    let expected: Vec<Value> = [[1, 0], [0, 1], [1, 1], [2, 1], [1, 2], [2, 2]]
        .iter()
        .map(|c| serde_json::json!(c))
        .collect();
    assert_eq!(coords.len(), expected.len());
    for c in expected {
        assert!(coords.contains(&c), "{c}");
    }
}
