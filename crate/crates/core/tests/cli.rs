use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_operadforge"))
        .args(args)
        .env_remove("OPERADFORGE_FIELD")
        .env_remove("OPERADFORGE_FORMAT")
        .env("OPERADFORGE_CACHE_DIR", cache)
        .output()
        .expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn lie_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["lie", "--max-arity", "4"]);
    assert!(o.status.success());
    let rows: Vec<Vec<String>> = stdout(&o).lines().skip(2).map(|l| l.split_whitespace().map(String::from).collect()).collect();
    for row in [["1", "0", "1"], ["2", "1", "1"], ["4", "3", "6"]] {
        assert!(rows.iter().any(|r| r == &row), "missing {row:?}");
    }
}

#[test]
fn json_carries_schema_version_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_operadforge"))
        .args(["tq", "--algebra", "zero:0"])
        .env("OPERADFORGE_CACHE_DIR", dir.path())
        .env("OPERADFORGE_FIELD", "f2")
        .env("OPERADFORGE_FORMAT", "json")
        .env("OPERADFORGE_MAX_ARITY", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["field"], "f2");
    assert_eq!(v["result"]["max_weight"], 3);
    assert_eq!(v["result"]["homology_by_weight"]["1"]["0"], 1);
}

#[test]
fn verify_examples_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "prop-7.3", "--max-n", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS skeleton-iso"));

    let o = run(dir.path(), &["verify", "thm-8.9", "--n-max", "3", "--degree-bound", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("bar layer") && text.contains("sphere layer"), "{text}");
    assert_eq!(text.matches("squares commute true").count(), 3);

    let o = run(dir.path(), &["verify", "cor-8.10", "--n", "2", "--k", "2", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["result"]["pass"], true);
    assert_eq!(v["result"]["id"], "sphere-layers");
    assert_eq!(v["result"]["witness"][0]["stable"]["1"], 1);
}

#[test]
fn verify_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["verify", "lemma-99"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["tq", "--algebra", "cubic:0"]).status.code(), Some(2));
    let o = run(dir.path(), &["verify", "--list"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("filtration-comparison  thm-8.9"));
}

#[test]
fn other_verbs_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["tensor", "--space", "set:2", "--power", "2", "--format", "json"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["result"]["fat_diagonal_quotient"]["0"], 2);

    let o = run(dir.path(), &["filtration", "--module", "bar", "--direction", "up", "--algebra", "free:0", "--max-n", "3"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("false"));
    let o = run(dir.path(), &["filtration", "--module", "tensor:s1", "--direction", "down", "--algebra", "zero:0", "--max-n", "2"]);
    assert!(o.status.success());

    let o = run(dir.path(), &["compare", "--n-max", "2", "--degree-bound", "3", "--algebra", "zero:0", "--format", "json"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["result"]["holds"], true);

    let o = run(dir.path(), &["stable-tq", "--algebra", "free:0", "--degree-bound", "2", "--max-k", "3", "--max-arity", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("stable at k ="));
}

#[test]
fn cache_round_trip_field_miss_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path();
    assert!(run(cache, &["lie", "--max-arity", "3"]).status.success());
    let listed = json(&run(cache, &["cache", "list", "--format", "json"]));
    let entries = listed["result"]["entries"].as_array().unwrap().clone();
    assert_eq!(entries.len(), 3);
    let key = entries.iter().find(|e| e["params"]["n"] == 3).unwrap()["key"].as_str().unwrap().to_string();
    let path = cache.join(format!("{key}.json"));
    let first = std::fs::read(&path).unwrap();

    // a second run reads the entry and leaves it untouched
    let o = run(cache, &["lie", "--max-arity", "3"]);
    assert!(o.stderr.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), first);

    // another field is a different key
    assert!(run(cache, &["lie", "--max-arity", "3", "--field", "f2"]).status.success());
    assert_eq!(json(&run(cache, &["cache", "--format", "json"]))["result"]["entries"].as_array().unwrap().len(), 6);

    // tampering is detected, reported and repaired
    let mut entry: Value = serde_json::from_slice(&first).unwrap();
    entry["payload"]["complex"]["differential"]["entries"] = serde_json::json!([]);
    std::fs::write(&path, serde_json::to_vec(&entry).unwrap()).unwrap();
    let o = run(cache, &["lie", "--max-arity", "3"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: cache entry for lie(3) rejected"));
    assert!(stdout(&o).contains("3  2       2"));
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let o = run(cache, &["cache", "clear"]);
    assert!(stdout(&o).contains("removed 6"));
}
