use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hchoquet");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("HCHOQUET_BIND").output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

const PAIR: &str = r#"{
  "schema_version": 1,
  "name": "dominance-pair",
  "hierarchy": { "name": "root", "children": [
    { "name": "g1", "direction": "increasing" },
    { "name": "g2", "direction": "decreasing" }
  ] },
  "table": { "path": "pair.csv" }
}"#;

fn pair_problem(dir: &Path) -> String {
    fs::write(dir.join("pair.json"), PAIR).unwrap();
    fs::write(dir.join("pair.csv"), "id,g1,g2\ngood,5,1\nbad,3,2\n").unwrap();
    dir.join("pair.json").to_string_lossy().into_owned()
}

#[test]
fn case_study_is_consistent() {
    let v = json_stdout(&run(&["consistency"]));
    assert_eq!(v["feasible"], true);
    assert!(v["eps_star"].as_f64().unwrap() > 0.0);
    let v = json_stdout(&run(&["validate", "--problem", "case-study"]));
    assert_eq!(v["alternatives"], 51);
    assert_eq!(v["internal_nodes"].as_array().unwrap().len(), 4);
}

#[test]
fn seeded_sampling_is_byte_identical() {
    let args = ["smaa", "--seed", "7", "--samples", "1000", "--burn-in", "200"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["sample_count"], 1000);
}

#[test]
fn dominated_pair_is_necessary() {
    let dir = tempfile::tempdir().unwrap();
    let problem = pair_problem(dir.path());
    let v = json_stdout(&run(&["nap", "--problem", &problem]));
    assert_eq!(v[0]["necessary"], serde_json::json!([[true, true], [false, true]]));
    assert_eq!(v[0]["possible"], serde_json::json!([[true, true], [false, true]]));
    let d = json_stdout(&run(&["dominance", "--problem", &problem]));
    assert_eq!(d["pairs"], serde_json::json!([["good", "bad"]]));
}

#[test]
fn failures_print_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("broken.json"), "{ \"schema_version\": 1 ").unwrap();
    let e = error_record(&run(&["validate", "--problem", &dir.path().join("broken.json").to_string_lossy()]));
    assert_eq!(e["error"]["code"], "bad-request");

    let e = error_record(&run(&["nap", "--node", "OH"]));
    assert_eq!(e["error"]["code"], "bad-request");
    let e = error_record(&run(&["nap", "--node", "Nowhere"]));
    assert_eq!(e["error"]["code"], "not-found");
    let e = error_record(&run(&["smaa", "--samples", "10", "--eps-mode", "fixed:0.5"]));
    assert_eq!(e["error"]["code"], "unprocessable");
    let out = run(&["smaa", "--samples", "many"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["code"], "bad-request");
}

#[test]
fn exported_case_study_loads_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    json_stdout(&run(&["case-study", "--out", &dir.path().to_string_lossy()]));
    let problem = dir.path().join("case_study.json");
    let from_disk = json_stdout(&run(&["consistency", "--problem", &problem.to_string_lossy()]));
    assert_eq!(from_disk, json_stdout(&run(&["consistency"])));
    let with_table = run(&[
        "validate",
        "--problem",
        "case-study",
        "--table",
        &dir.path().join("case_study_table.csv").to_string_lossy(),
    ]);
    assert!(with_table.status.success());
}

#[test]
fn report_reuses_a_previous_run_and_exports_tables() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("smaa");
    let out = results.to_string_lossy();
    let sampler = ["--samples", "800", "--burn-in", "100", "--seed", "3"];
    let mut args = vec!["smaa", "--out", &out];
    args.extend(sampler);
    json_stdout(&run(&args));
    let saved = results.join("results.json");
    let saved = saved.to_string_lossy();

    let reused = run(&["report", "--from", &saved]);
    let mut fresh_args = vec!["report"];
    fresh_args.extend(sampler);
    assert_eq!(json_stdout(&reused), json_stdout(&run(&fresh_args)));

    let tables = dir.path().join("tables");
    let tables = tables.to_string_lossy();
    json_stdout(&run(&["report", "--from", &saved, "--out", &tables, "--format", "csv"]));
    for name in ["summary_Sustainability.csv", "rai_Ec.csv", "pwi_So.csv", "ranking_En.csv", "barycenter.csv"] {
        assert!(dir.path().join("tables").join(name).exists(), "missing {name}");
    }
}

/// Spawns `serve`, reads the announced address and stops the process.
fn announced_address(args: &[&str], env: Option<&str>) -> String {
    let mut cmd = Command::new(BIN);
    cmd.arg("serve").args(args).stderr(Stdio::piped()).stdout(Stdio::null());
    match env {
        Some(v) => cmd.env("HCHOQUET_BIND", v),
        None => cmd.env_remove("HCHOQUET_BIND"),
    };
    let mut child = cmd.spawn().unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    line
}

#[test]
fn bind_flag_wins_over_environment() {
    let line = announced_address(&["--bind", "127.0.0.1:0"], Some("256.0.0.1:1"));
    assert!(line.starts_with("listening on http://127.0.0.1:"), "{line}");
    let line = announced_address(&[], Some("127.0.0.1:0"));
    assert!(line.starts_with("listening on http://127.0.0.1:"), "{line}");
}
