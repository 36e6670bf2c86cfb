//! End-to-end runs of the `mf` binary: exit-code contract, JSON shapes,
//! and the gen -> check pipelines.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn mf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("mf-cli-test-{}-{}", std::process::id(), name));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({}): {}",
            e,
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn validate_semiring_exit_codes() {
    let valid = write_temp(
        "valid.json",
        r#"{"universe":{"finite":2},"semiring":"power_set","measure":{"point_mass":{"0":"1","1":"1"}}}"#,
    );
    let out = mf(&["validate-semiring", valid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let doc = stdout_json(&out);
    assert_eq!(doc["is_semiring"], Value::Bool(true));
    assert_eq!(doc["is_sigma_algebra"], Value::Bool(true));

    let invalid = write_temp(
        "invalid.json",
        r#"{"universe":{"finite":3},
            "semiring":{"explicit":[[],[0,1],[1,2]]},
            "measure":{"tabulated":[[[],"0"],[[0,1],"1"],[[1,2],"1"]]}}"#,
    );
    let out = mf(&["validate-semiring", invalid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["is_semiring"], Value::Bool(false));

    let garbage = write_temp("garbage.json", "not json");
    let out = mf(&["validate-semiring", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outer_measure_output_shape() {
    let line = write_temp(
        "line.json",
        r#"{"universe":"interval","semiring":"interval","measure":"length"}"#,
    );
    let out = mf(&[
        "outer",
        line.to_str().unwrap(),
        "--target",
        r#"[["0","1"],["2","5/2"]]"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["value"], Value::String("3/2".into()));
    assert_eq!(doc["exactness"], Value::String("exact".into()));
    assert!(doc["witness"].is_array());

    // non-canonical rationals are parse errors
    let out = mf(&["outer", line.to_str().unwrap(), "--target", r#"[["2/4","1"]]"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_certify_pipeline() {
    let out = mf(&["gen", "guillotine_partition", "--seed", "11", "--pieces", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let inst = write_temp("guillotine.json", &String::from_utf8_lossy(&out.stdout));

    let out = mf(&["certify-product", inst.to_str().unwrap(), "--t", "15/16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["product"], Value::String("1/1".into()));
    assert_eq!(doc["full_sum_equals_product"], Value::Bool(true));

    // default t also certifies
    let out = mf(&["certify-product", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    // t at the product is a precondition error
    let out = mf(&["certify-product", inst.to_str().unwrap(), "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_staircase_certifies() {
    let out = mf(&["gen", "dyadic_staircase", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let inst = write_temp("staircase.json", &String::from_utf8_lossy(&out.stdout));
    let out = mf(&["certify-product", inst.to_str().unwrap(), "--t", "1023/1024"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["tail_supremum"], Value::String("1/1".into()));
}

#[test]
fn extract_witness_pipeline() {
    let out = mf(&["gen", "random_rect_family", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let raw: Value = stdout_json(&out);
    let inst = write_temp("witness.json", &serde_json::to_string(&raw).unwrap());
    let r = raw["r"].as_str().unwrap();
    let s = raw["s"].as_str().unwrap();
    let out = mf(&[
        "extract-witness",
        inst.to_str().unwrap(),
        "--r",
        r,
        "--s",
        s,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert!(doc["f_indices"].as_array().is_some());

    // an impossible mass threshold is a precondition error
    let out = mf(&[
        "extract-witness",
        inst.to_str().unwrap(),
        "--r",
        r,
        "--s",
        "1000000",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn null_section_directions() {
    let inst = write_temp(
        "null.json",
        r#"{
            "space_x": {"universe":{"finite":2},"semiring":"power_set",
                        "measure":{"point_mass":{"0":"0","1":"1"}}},
            "space_y": {"universe":{"finite":2},"semiring":"power_set",
                        "measure":{"point_mass":{"0":"1","1":"1"}}},
            "d": {"rects":[{"base":[0],"side":[0,1]}]}
        }"#,
    );
    let out = mf(&["null-section", inst.to_str().unwrap(), "--direction", "both"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["forward"]["holds"], Value::Bool(true));
    assert_eq!(doc["converse"]["holds"], Value::Bool(true));

    // positive-mass D: forward preconditions fail in both directions
    let bad = write_temp(
        "null-bad.json",
        r#"{
            "space_x": {"universe":{"finite":2},"semiring":"power_set",
                        "measure":{"point_mass":{"0":"1","1":"1"}}},
            "space_y": {"universe":{"finite":2},"semiring":"power_set",
                        "measure":{"point_mass":{"0":"1","1":"1"}}},
            "d": {"rects":[{"base":[0],"side":[0]}]}
        }"#,
    );
    let out = mf(&["null-section", bad.to_str().unwrap(), "--direction", "both"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_streams_reports() {
    let config = write_temp(
        "config.json",
        r#"{"seed": 3, "suites": [{"kind": "product_exactness", "count": 5}]}"#,
    );
    let out = mf(&["suite", "--config", config.to_str().unwrap(), "--canonical"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    // five report lines plus the summary
    assert_eq!(lines.len(), 6, "{}", text);
    for line in &lines[..5] {
        let report: Value = serde_json::from_str(line).unwrap();
        assert_eq!(report["pass"], Value::Bool(true));
        assert_eq!(report["wall_time_ms"], Value::from(0u64));
    }
    let summary: Value = serde_json::from_str(lines[5]).unwrap();
    assert_eq!(summary["summary"][0]["instances"], Value::from(5u64));

    // canonical reruns are byte-identical
    let again = mf(&["suite", "--config", config.to_str().unwrap(), "--canonical"]);
    assert_eq!(out.stdout, again.stdout);

    // empty suite list: no reports, success
    let empty = write_temp("empty-config.json", r#"{"seed": 3, "suites": []}"#);
    let out = mf(&["suite", "--config", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 1); // just the summary
}

#[test]
fn gen_is_deterministic() {
    let a = mf(&["gen", "random_finite_space", "--seed", "21"]);
    let b = mf(&["gen", "random_finite_space", "--seed", "21"]);
    assert_eq!(a.stdout, b.stdout);
    let c = mf(&["gen", "random_finite_space", "--seed", "22"]);
    assert_ne!(a.stdout, c.stdout);
}
