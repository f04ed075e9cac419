use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mnw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mnw")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

const EX1: &str = r#"{"agents":2,"goods":2,"valuations":[[1,0],[1,0]]}"#;

#[test]
fn solve_small_example() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "ex1.json", EX1);
    let o = mnw(&["solve", s(&inst), "--rule", "mnw-tie"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["allocation"]["assignment"]["g0"], 0);
    assert_eq!(v["allocation"]["assignment"]["g1"], Value::Null);
    assert_eq!(v["utilities"], serde_json::json!([1, 0]));
}

#[test]
fn solve_fractional() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"agents":2,"goods":1,"valuations":[[1],[1]]}"#);
    let o = mnw(&["solve", s(&inst), "--rule", "frac-mnw"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["utilities"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(v["allocation"]["shares"][1]["g0"], "1/2");
}

#[test]
fn check_reports_envy_witness() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"agents":2,"goods":1,"valuations":[[1],[1]]}"#);
    let alloc = write(&dir, "a.json", r#"{"agents":2,"goods":1,"assignment":{"g0":0}}"#);
    let o = mnw(&["check", s(&inst), s(&alloc), "--property", "ef"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json_out(&o);
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["witness"]["kind"], "envy");
    assert_eq!(v["witness"]["envier"], 1);

    for prop in ["ef1", "efx", "po", "mnw", "minimally-complete", "rounded"] {
        let o = mnw(&["check", s(&inst), s(&alloc), "--property", prop]);
        assert_eq!(o.status.code(), Some(0), "{prop}");
        assert_eq!(json_out(&o)["verdict"], "holds");
    }
}

#[test]
fn check_fractional_certificate() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"agents":2,"goods":1,"valuations":[[1],[1]]}"#);
    let good = write(&dir, "f.json", r#"{"agents":2,"goods":1,"shares":[{"g0":"1/2"},{"g0":"2/4"}]}"#);
    assert_eq!(mnw(&["check", s(&inst), s(&good), "--property", "frac-mnw"]).status.code(), Some(0));
    let bad = write(&dir, "g.json", r#"{"agents":2,"goods":1,"shares":[{"g0":"1"},{}]}"#);
    let o = mnw(&["check", s(&inst), s(&bad), "--property", "frac-mnw"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_out(&o)["witness"]["kind"], "fractional_transfer");
}

#[test]
fn fuzz_exhaustive_is_clean() {
    let o = mnw(&["fuzz", "--rule", "mnw-tie", "--agents", "2", "--goods", "2", "--exhaustive", "--coalition-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["profiles_checked"], 16);
    assert_eq!(v["witness"], Value::Null);
}

#[test]
fn fuzz_finds_manipulation_of_full_allocation_variant() {
    let o = mnw(&[
        "fuzz", "--rule", "full-allocation-mnw", "--agents", "2", "--goods", "4", "--exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_out(&o)["witness"]["coalition"], serde_json::json!([0]));
}

#[test]
fn fuzz_random_is_reproducible() {
    let args = ["fuzz", "--rule", "frac-mnw", "--agents", "3", "--goods", "3", "--random", "40", "--seed", "5"];
    let a = mnw(&args);
    let b = mnw(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_out(&a)["seed"], 5);
}

#[test]
fn fuzz_refuses_oversized_exhaustive_run() {
    let o = mnw(&["fuzz", "--rule", "mnw-tie", "--agents", "4", "--goods", "6", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lottery_and_sample_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"agents":3,"goods":2,"valuations":[[1,1],[1,1],[1,1]]}"#);
    let a = mnw(&["lottery", s(&inst), "--sample", "--seed", "7"]);
    let b = mnw(&["lottery", s(&inst), "--sample", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json_out(&a);
    assert_eq!(v["lottery"]["support"].as_array().unwrap().len(), 3);
    assert_eq!(v["expected_utilities"], serde_json::json!(["2/3", "2/3", "2/3"]));
    assert!(v["sample"]["allocation"]["assignment"].is_object());
}

#[test]
fn oracle_lists_sets() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"agents":2,"goods":2,"valuations":[[1,1],[1,1]]}"#);
    let o = mnw(&["oracle", s(&inst)]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["mnw_set"].as_array().unwrap().len(), 2);
    assert_eq!(v["leximin_set"], v["mnw_set"]);
    assert_eq!(v["leximin_profile"], serde_json::json!([1, 1]));
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"agents":1,"goods":1,"valuations":[[2]]}"#);
    let o = mnw(&["solve", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("valuations[0][0]"));

    let broken = write(&dir, "broken.json", "{");
    assert_eq!(mnw(&["solve", s(&broken)]).status.code(), Some(2));
    assert_eq!(mnw(&["solve", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(mnw(&["frobnicate"]).status.code(), Some(2));

    let inst = write(&dir, "i.json", EX1);
    let wrong = write(&dir, "a.json", r#"{"agents":3,"goods":2,"assignment":{"g0":0,"g1":null}}"#);
    assert_eq!(mnw(&["check", s(&inst), s(&wrong), "--property", "ef"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let o = mnw(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("solve"));
}
