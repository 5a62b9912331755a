//! End-to-end checks of the `swipt` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swipt"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("swipt-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scenario(dir: &Path, q: f64, restore: bool) -> PathBuf {
    let terminals: Vec<String> =
        (0..4).map(|_| format!(r#"{{"antennas": 2, "q_target": {q}, "distance": 1.0}}"#)).collect();
    let text = format!(
        r#"{{
  "n_t": 4,
  "terminals": [{}],
  "power": {{"p_c_tx": 1.0, "p_c_rx": 0.1, "c1": 30.0, "c2": 0.75, "p_max": 11.0}},
  "frame": {{"t_f": 0.1, "superframe_frames": 30, "t_c": 5.0, "alpha": 0.1}},
  "total_frames": 12,
  "rng_seed": 5,
  "capacity_range": [300.0, 1000.0],
  "snapshot": {{"info": [0, 1], "harvest": [2, 3], "restore": {restore}}}
}}"#,
        terminals.join(", ")
    );
    let path = dir.join(format!("scenario-{q}-{restore}.json"));
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_traces_with_provenance() {
    let dir = scratch("simulate");
    let out = run(&["simulate", "--users", "6", "--frames", "8", "--seed", "3", "--strategy", "LB-DHS", "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = [
        ("battery_trace.csv", "frame,user_id,battery"),
        ("sumrate_trace.csv", "frame,running_avg_sr,instantaneous_sr"),
        ("rate_samples.csv", "frame,user_id,rate"),
        ("harvest_trace.csv", "frame,user_id,harvested"),
        ("groups_trace.csv", "frame,user_id,role"),
    ];
    for (file, head) in expected {
        let body = fs::read_to_string(dir.join(file)).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some(head), "{file}");
        assert!(lines.next().unwrap().starts_with("# seed=3 config_hash="), "{file}");
    }
    let sumrate = fs::read_to_string(dir.join("sumrate_trace.csv")).unwrap();
    assert_eq!(sumrate.lines().count(), 2 + 8);
}

#[test]
fn same_seed_gives_identical_files() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    for dir in [&a, &b] {
        let out = run(&["simulate", "--users", "5", "--frames", "6", "--seed", "11", "--strategy", "LB-CHS", "--out", s(dir)]);
        assert!(out.status.success());
    }
    for file in ["battery_trace.csv", "rate_samples.csv", "groups_trace.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let dir = scratch("unknown");
    let out = run(&["simulate", "--users", "4", "--frames", "2", "--strategy", "best-effort", "--out", s(&dir)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_scenario_file_is_an_io_error() {
    let dir = scratch("missing");
    let out = run(&["simulate", "--scenario", s(&dir.join("absent.json")), "--out", s(&dir)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_scenario_is_a_usage_error() {
    let dir = scratch("malformed");
    let path = dir.join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    let out = run(&["simulate", "--scenario", s(&path), "--out", s(&dir)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_reports_feasible_snapshot() {
    let dir = scratch("solve");
    let out = run(&["solve", "--scenario", s(&scenario(&dir, 0.5, false)), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("solve_report.json")).unwrap()).unwrap();
    assert_eq!(report["feasible"], true);
    assert_eq!(report["seed"], 5);
}

#[test]
fn unreachable_target_exits_infeasible() {
    let dir = scratch("infeasible");
    let out = run(&["solve", "--scenario", s(&scenario(&dir, 1e6, false)), "--out", s(&dir)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn restoration_scales_targets_down() {
    let dir = scratch("restore");
    let out = run(&["solve", "--scenario", s(&scenario(&dir, 300.0, true)), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("solve_report.json")).unwrap()).unwrap();
    let beta = report["restoration_beta"].as_f64().unwrap();
    assert!(beta > 0.0 && beta < 1.0);
}

#[test]
fn rp_region_writes_surface_and_boundary() {
    let dir = scratch("rp");
    let out = run(&["rp-region", "--scenario", s(&scenario(&dir, 0.0, false)), "--grid", "4", "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let surface = fs::read_to_string(dir.join("rp_surface.csv")).unwrap();
    assert_eq!(surface.lines().next(), Some("Q_1,Q_2,SR"));
    assert_eq!(surface.lines().count(), 2 + 16);
    let boundary = fs::read_to_string(dir.join("boundary_points.csv")).unwrap();
    assert!(boundary.lines().nth(2).unwrap().starts_with("info,"));
}

#[test]
fn rp_region_without_scenario_is_a_usage_error() {
    let dir = scratch("rp-usage");
    assert_eq!(run(&["rp-region", "--out", s(&dir)]).status.code(), Some(2));
}

#[test]
fn grouping_compare_lists_each_strategy() {
    let dir = scratch("compare");
    let out = run(&["grouping-compare", "--users", "5", "--frames", "4", "--strategy", "RR,Random,no-swipt", "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(dir.join("grouping_compare.csv")).unwrap();
    let names: Vec<&str> = body.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["RR", "Random", "no-swipt"]);
}
