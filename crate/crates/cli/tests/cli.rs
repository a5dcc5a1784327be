use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anticyc")).args(args).env_remove("ANTICYC_SEED").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn classgroup_of_disc_minus_23() {
    let out = run(&["classgroup", "--disc", "-23"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["size"], 3);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["command"]["classgroup"]["field"], -23);
}

#[test]
fn ring_class_group_matches_formula() {
    let r = report(&run(&["classgroup", "--field", "-7", "--p", "11", "--n", "1"]));
    assert_eq!(r["result"]["size"], 10);
    assert_eq!(r["result"]["class_number_formula"], 10);
}

#[test]
fn domain_errors_exit_one() {
    // 5 is inert in Q(√−7)
    let out = run(&["classgroup", "--field", "-7", "--p", "5", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["name"], "NonSplitPrime");
    let out = run(&["classgroup", "--field", "-12"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["classgroup", "--nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_anticyc"))
        .args(["measure-selftest", "--p", "3", "--samples", "1"])
        .env("ANTICYC_SEED", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_inputs_are_reported() {
    let dir = std::env::temp_dir().join(format!("anticyc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"level": 11, "weight": 2}"#).unwrap();
    let out = run(&["hecke", "--form", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["name"], "SchemaError");
    let out = run(&["hecke", "--form", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_passes_and_records_seed() {
    let out = run(&["measure-selftest", "--p", "3", "--prec", "8", "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["passed"], true);
    assert_eq!(r["config"]["seed"], 20240101);
}

#[test]
fn reports_are_byte_stable() {
    let form = data("level11.json");
    let args = ["euler-check", "--form", &form, "--char", &data("chi_q2_unramified.txt"), "--p", "3", "--trunc", "800", "--digits", "30"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert!(r["result"]["rel_err"].as_f64().unwrap() < 1e-15);
}

#[test]
fn out_flag_writes_the_report() {
    let path = std::env::temp_dir().join(format!("anticyc-out-{}.json", std::process::id()));
    let out = run(&["chars", "--char", &data("chi_q7_p11.txt"), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(r["result"]["class_values"].as_array().unwrap().len(), 10);
}

#[test]
fn hecke_reports_depletion() {
    let r = report(&run(&["hecke", "--form", &data("level11.json"), "--p", "3", "--trunc", "300"]));
    assert_eq!(r["result"]["coefficients"][1], "-2");
    assert_eq!(r["result"]["depletion"]["vanishes_on_multiples"], true);
}
