mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use common::data_path;
use serde_json::Value;

fn eshed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eshed"))
        .args(args)
        .env_remove("ESHED_THREADS")
        .output()
        .expect("binary runs")
}

fn scenario(level: &str) -> String {
    data_path(&format!("scenario_{level}.json")).display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

/// A copy of a bundled scenario with edits, written next to absolute data paths.
fn edited_scenario(dir: &Path, level: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v = read_json(&data_path(&format!("scenario_{level}.json")));
    v["case_file"] = data_path("case39.m").display().to_string().into();
    v["profiles_file"] = data_path("profiles39.csv").display().to_string().into();
    edit(&mut v);
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn validate_bundled_scenarios() {
    for level in ["low", "medium", "high"] {
        let out = tempfile::tempdir().unwrap();
        let o = eshed(&["validate", "--scenario", &scenario(level), "--out", out.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let manifest = read_json(&out.path().join("manifest.json"));
        assert_eq!(manifest["exit_code"], 0);
        assert_eq!(manifest["inputs"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn missing_scenario_is_input_error() {
    let out = tempfile::tempdir().unwrap();
    let o = eshed(&["validate", "--scenario", "/nonexistent/scenario.json", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn disconnected_partition_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_scenario(dir.path(), "low", |v| {
        v["partition"][0] = serde_json::json!([1, 20]);
    });
    let out = dir.path().join("out");
    let o = eshed(&["validate", "--scenario", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["exit_code"], 2);
}

#[test]
fn unreachable_requirement_is_infeasible() {
    let out = tempfile::tempdir().unwrap();
    let o = eshed(&["solve-p1", "--scenario", &scenario("medium"), "--x-min", "5", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(read_json(&out.path().join("result.json"))["feasible"], false);
}

#[test]
fn no_budget_baseline_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_scenario(dir.path(), "medium", |v| {
        v["cap_plus"] = serde_json::json!({ "default": 0.0, "buses": {} });
    });
    let out = dir.path().join("out");
    let o = eshed(&["design-p2", "--scenario", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_p1_outputs_and_formats() {
    let csv_dir = tempfile::tempdir().unwrap();
    let o = eshed(&["solve-p1", "--scenario", &scenario("medium"), "--x-min", "0.8", "--out", csv_dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(csv_dir.path().join("report.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(report.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert_eq!(&headers[0], "bus");
    let ratio_col = headers.iter().position(|h| h == "ratio").unwrap();
    let records: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 39);
    assert!(records.iter().all(|r| r[ratio_col].parse::<f64>().unwrap() >= 0.8 - 1e-6));

    let json_dir = tempfile::tempdir().unwrap();
    let o = eshed(&[
        "solve-p1", "--scenario", &scenario("medium"), "--x-min", "0.8", "--format", "json", "--out",
        json_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = files(json_dir.path()).into_keys().collect();
    assert_eq!(names, ["manifest.json", "result.json"]);
    let a = read_json(&csv_dir.path().join("result.json"));
    let b = read_json(&json_dir.path().join("result.json"));
    assert_eq!(a, b);
    assert!(a["objective"].as_f64().unwrap() > 0.0);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = || {
        let o = eshed(&["design-p2", "--scenario", &scenario("high"), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut all = files(&out);
        let mut manifest: Value = serde_json::from_slice(&all["manifest.json"]).unwrap();
        manifest.as_object_mut().unwrap().remove("timestamp_unix");
        all.insert("manifest.json".into(), serde_json::to_vec(&manifest).unwrap());
        std::fs::remove_dir_all(&out).unwrap();
        all
    };
    let first = run();
    assert!(first.contains_key("trace.csv") && first.contains_key("report.csv"));
    assert!(first == run(), "outputs differ between runs");
}

#[test]
fn analyze_writes_curves() {
    let out = tempfile::tempdir().unwrap();
    let o = eshed(&["analyze", "--scenario", &scenario("low"), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.path().join("capacity_curves.csv")).unwrap();
    assert!(text.starts_with("shed,budget,budget_total,max_ratio,mode"));
    assert!(text.lines().count() > 21);
}

#[test]
fn bad_zeta_is_input_error() {
    let out = tempfile::tempdir().unwrap();
    let o = eshed(&["design-p4", "--scenario", &scenario("low"), "--zeta", "-1", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
