use std::process::{Command, Output};

use serde_json::Value;

fn multibase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multibase")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = multibase(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn count_of_six_is_three() {
    let out = multibase(&["count", "--bases", "2,3", "--digits", "2", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn non_coprime_bases_exit_with_domain_code() {
    let out = multibase(&["count", "--bases", "2,4", "--digits", "2", "--n", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonCoprimeBases"));
}

#[test]
fn seq_json_lists_smooth_numbers() {
    let out = multibase(&["seq", "--bases", "2,3", "--limit", "10", "--format", "json"]);
    assert_eq!(stdout(&out), "[1,2,3,4,6,8,9]\n");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(multibase(&["count", "--n", "abc"]).status.code(), Some(1));
    assert_eq!(multibase(&["count"]).status.code(), Some(1));
    assert_eq!(multibase(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn resource_limit_exits_four() {
    let out = Command::new(env!("CARGO_BIN_EXE_multibase"))
        .args(["count", "--n", "1e4"])
        .env("MULTIBASE_MAX_TABLE_BYTES", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OutOfMemory"));
}

#[test]
fn scientific_notation_is_floored() {
    let a = json(&["count", "--n", "1.5e2"]);
    let b = json(&["count", "--n", "150"]);
    assert_eq!(a, b);
}

#[test]
fn bignums_are_decimal_strings() {
    let v = json(&["count", "--n", "1e4"]);
    let count = v["count"].as_str().expect("count is a string");
    assert!(count.len() > 11 && count.bytes().all(|c| c.is_ascii_digit()));
}

#[test]
fn count_methods_agree() {
    let table = |method: &str| json(&["count", "--table", "200", "--method", method]);
    let dp = table("dp");
    assert_eq!(dp, table("brute"));
    assert_eq!(dp, table("power"));
    assert_eq!(dp.as_array().unwrap().len(), 201);
}

#[test]
fn json_output_round_trips() {
    let invocations: &[&[&str]] = &[
        &["seq", "--limit", "100"],
        &["count", "--table", "20"],
        &["asym", "--theorem", "1", "--bases", "2,3,5", "--n", "1e3", "--exact"],
        &["asym", "--theorem", "mahler", "--n", "1e3", "--exact"],
        &["saddle", "--n", "1e3", "--series", "g", "--u", "0.5"],
        &["saddle", "--n", "1e3", "--moments", "sum", "--exact"],
        &["stats", "--n", "500", "--exact"],
        &["sample", "--n", "50", "--count", "5", "--seed", "9"],
        &["fluct", "--max", "2000"],
        &["tails", "--r", "1e-2", "--y-resolution", "32"],
    ];
    for args in invocations {
        let mut full = args.to_vec();
        full.extend(["--format", "json"]);
        let out = multibase(&full);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&parsed).unwrap() + "\n", text, "{args:?}");
    }
}

#[test]
fn identical_seeds_give_identical_json() {
    let args = ["sample", "--n", "500", "--count", "20", "--seed", "42", "--format", "json"];
    let a = multibase(&args);
    let b = multibase(&args);
    assert_eq!(a.stdout, b.stdout);
    let other = multibase(&["sample", "--n", "500", "--count", "20", "--seed", "43", "--format", "json"]);
    assert_ne!(a.stdout, other.stdout);

    let stats = ["stats", "--n", "2000", "--samples", "500", "--seed", "5", "--format", "json"];
    assert_eq!(multibase(&stats).stdout, multibase(&stats).stdout);
}

#[test]
fn samples_represent_n() {
    let v = json(&["sample", "--bases", "3,4,5", "--digits", "3", "--n", "400", "--count", "50", "--seed", "1"]);
    for s in v["samples"].as_array().unwrap() {
        let total: u64 = s["terms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t[0].as_u64().unwrap() * t[1].as_u64().unwrap())
            .sum();
        assert_eq!(total, 400);
    }
}

#[test]
fn csv_has_header_and_one_row_per_n() {
    let out = multibase(&["count", "--table", "5", "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,count");
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[6], "5,2");

    let out = multibase(&["fluct", "--max", "1500", "--format", "csv"]);
    let text = stdout(&out);
    assert!(text.starts_with("n,"));
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn invalid_statistic_digit_is_domain_error() {
    let out = multibase(&["stats", "--n", "100", "--statistic", "digit:3", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quick_report_bundle_passes() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/bundles/quick.json");
    let v = json(&["report", "--config", config]);
    assert_eq!(v["passed"], Value::Bool(true), "{v}");
    assert_eq!(v["failures"], 0);
}

#[test]
fn failing_report_exits_three() {
    let dir = std::env::temp_dir().join(format!("multibase-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bundle.json");
    std::fs::write(
        &path,
        r#"{"bundles":[{"name":"b","runs":[
            {"name":"wrong","args":["count","--n","6"],"expect":[{"path":"/count","equals":"4"}]},
            {"name":"right","args":["count","--n","6"],"expect":[{"path":"/count","value":3,"tolerance":0}]}
        ]}]}"#,
    )
    .unwrap();
    let out = multibase(&["report", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["failures"], 1);
    assert_eq!(v["checks"][1]["pass"], Value::Bool(true));
    std::fs::remove_dir_all(&dir).unwrap();
}
