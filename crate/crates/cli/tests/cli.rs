use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn pecbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pecbound")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = pecbound(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bound_of_the_two_subchannel_channel() {
    let v = ok_json(&["bound", path(&data("two_subchannel.json"))]);
    assert_eq!(v["value"]["exact"], "18/25");
    assert_eq!(v["value"]["decimal"], 0.72);
    assert_eq!(v["manifest"]["command"], "bound");
    assert_eq!(v["manifest"]["mode"], "exact");
    assert_eq!(v["manifest"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(v["witness"].as_object().unwrap().contains_key("R[1]"));
    assert!(v.get("lp").is_none());
}

#[test]
fn bound_of_a_single_destination_is_one_minus_eps() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "k1.json", r#"{"k": 1, "subchannels": [{"model": "independent", "eps": ["0.35"]}]}"#);
    assert_eq!(ok_json(&["bound", &f])["value"]["exact"], "13/20");
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", "{\"k\": 2,\n \"subchannels\": [");
    let out = pecbound(&["bound", &f]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn weighted_objectives_and_float_mode() {
    let ch = data("two_subchannel.json");
    let v = ok_json(&["bound", path(&ch), "--objective", "1,0"]);
    assert_eq!(v["value"]["exact"], "3/5");
    let f = ok_json(&["--mode", "float", "bound", path(&ch)]);
    assert!((f["value"]["decimal"].as_f64().unwrap() - 0.72).abs() < 1e-9);
    assert_eq!(f["manifest"]["mode"], "float");
    let out = pecbound(&["bound", path(&ch), "--objective", "1,2,3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gap_reports_all_three_values() {
    let v = ok_json(&["gap", path(&data("two_subchannel.json"))]);
    assert_eq!(v["outer"]["exact"], "18/25");
    assert_eq!(v["inner"]["exact"], "7/10");
    assert_eq!(v["gap"]["exact"], "1/50");
}

#[test]
fn gap_vanishes_when_the_second_subchannel_is_dead() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "dead.json",
        r#"{"k": 2, "subchannels": [{"model": "independent", "eps": ["1/2", "1/2"]}, {"model": "identical", "eps": "1"}]}"#,
    );
    assert_eq!(ok_json(&["gap", &f])["gap"]["exact"], "0");
}

#[test]
fn capacity_sum_is_refused_beyond_three_destinations() {
    let four = data("four_destinations.json");
    let out = pecbound(&["gap", path(&four)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time-sharing"));
    let v = ok_json(&["inner", path(&four), "--region", "time-sharing"]);
    assert_eq!(v["region"], "time-sharing");
}

#[test]
fn tuple_cap_exceeded_has_its_own_exit_code() {
    let out = pecbound(&["--tuple-cap", "1", "bound", path(&data("two_subchannel.json"))]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn membership_and_constraint_dump() {
    let ch = data("two_subchannel.json");
    let inside = ok_json(&["--emit-lp", "member", path(&ch), "--rates", "0.36,0.36"]);
    assert_eq!(inside["member"], true);
    assert!(inside["lp"]["variables"].as_array().unwrap().len() > 2);
    let outside = ok_json(&["member", path(&ch), "--rates", "0.37,0.36"]);
    assert_eq!(outside["member"], false);
    assert!(outside["violated_tuple"].is_array());
}

#[test]
fn reduce_produces_the_two_subchannel_channel() {
    let v = ok_json(&["reduce", path(&data("two_relay_graph.json")), path(&data("two_relay_cut.json"))]);
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(data("two_subchannel.json")).unwrap()).unwrap();
    assert_eq!(v["channel"], expected);
    assert_eq!(v["q_mapping"]["d1"], "R1");
    assert_eq!(v["q_mapping"]["d2"], "R2");
    assert_eq!(v["sum_rate_bound"]["exact"], "18/25");
    assert_eq!(v["manifest"]["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn reduce_output_feeds_bound_and_gap() {
    let out = pecbound(&["reduce", path(&data("two_relay_graph.json")), path(&data("two_relay_cut.json"))]);
    assert!(out.status.success());
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "reduced.json", &String::from_utf8(out.stdout).unwrap());
    assert_eq!(ok_json(&["bound", &f])["value"]["exact"], "18/25");
    assert_eq!(ok_json(&["gap", &f])["gap"]["exact"], "1/50");
}

#[test]
fn reduce_of_an_empty_cut_and_of_a_chain() {
    let dir = TempDir::new().unwrap();
    let g = write(
        &dir,
        "g.json",
        r#"{"nodes": [{"id": "s", "kind": "source"}, {"id": "t1", "kind": "dest", "dest_index": 1},
                      {"id": "t2", "kind": "dest", "dest_index": 2}],
            "edges": [{"from": "t1", "to": "t2", "eps": "0"}]}"#,
    );
    let cut = write(&dir, "cut.json", r#"{"A": ["t1", "t2"], "W_A": []}"#);
    let v = ok_json(&["reduce", &g, &cut]);
    assert_eq!(v["channel"]["subchannels"].as_array().unwrap().len(), 0);
    assert_eq!(v["sum_rate_bound"]["exact"], "0");

    let chain = write(
        &dir,
        "chain.json",
        r#"{"nodes": [{"id": "s", "kind": "source"}, {"id": "a", "kind": "relay"},
                      {"id": "t1", "kind": "dest", "dest_index": 1}],
            "edges": [{"from": "s", "to": "a", "eps": "1/4"}, {"from": "a", "to": "t1", "eps": "1/2"}]}"#,
    );
    let cut = write(&dir, "chain_cut.json", r#"{"A": ["a", "t1"], "W_A": []}"#);
    let v = ok_json(&["reduce", &chain, &cut]);
    assert_eq!(v["channel"]["subchannels"].as_array().unwrap().len(), 1);
    assert_eq!(v["sum_rate_bound"]["exact"], "3/4");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = ["--seed", "5", "simulate", "--eps1", "1/2", "--eps2", "9/10", "--n", "5000", "--trials", "3"];
    let a = pecbound(&args);
    let b = pecbound(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["closed_form"], "18/25");
    assert_eq!(v["decode_failures"], 0);
    assert_eq!(v["manifest"]["seed"], 5);
    assert!(v["relative_error"].as_f64().unwrap() < 0.05);
    assert!(v.get("reports").is_none());
    let other = pecbound(&["--seed", "6", "simulate", "--eps1", "1/2", "--eps2", "9/10", "--n", "5000", "--trials", "3"]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn simulate_baseline_targets_the_inner_sum() {
    let v = ok_json(&["simulate", "--eps1", "0.5", "--eps2", "0.9", "--n", "5000", "--trials", "2", "--baseline", "--reports"]);
    assert_eq!(v["scheme"], "baseline");
    assert_eq!(v["closed_form"], "7/10");
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_rejects_the_precondition_violation() {
    let out = pecbound(&["simulate", "--eps1", "1/2", "--eps2", "1/2", "--n", "100", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps2 >= 1 - (1 - eps1) * eps1 / 2"));
}

#[test]
fn gap_sweep_tables() {
    let out = pecbound(&["gap", "--sweep", "--steps", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# manifest: "));
    assert_eq!(lines[1], "eps1,eps2,outer,inner,gap,outer_decimal,inner_decimal,gap_decimal,precondition");
    assert_eq!(lines.len(), 2 + 9);
    assert!(lines.iter().any(|l| l.starts_with("1/2,1,")));
    let v = ok_json(&["gap", "--sweep", "--steps", "10"]);
    let row = v["sweep"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["eps1"] == "1/2" && r["eps2"] == "9/10")
        .unwrap()
        .clone();
    assert_eq!(row["gap"]["exact"], "1/50");
    assert_eq!(row["precondition"], true);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let ch = data("correlated.json");
    for args in [vec!["bound", path(&ch)], vec!["--emit-lp", "gap", path(&ch)]] {
        assert_eq!(pecbound(&args).stdout, pecbound(&args).stdout);
    }
}
