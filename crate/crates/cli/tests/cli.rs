//! End-to-end runs of the `flowtoll` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn two_arc(target: Value) -> Value {
    json!({
        "network": {
            "nodes": ["s", "a", "t"],
            "arcs": [
                {"id": "e", "tail": "s", "head": "a", "capacity": 2, "delay": 0},
                {"id": "f", "tail": "a", "head": "t", "capacity": 2, "delay": 1},
                {"id": "g", "tail": "a", "head": "t", "capacity": 1, "delay": 0}
            ],
            "source": "s",
            "sink": "t"
        },
        "cost": {"preset": "standard", "alpha": 1, "beta": "1/2", "gamma": 2},
        "target": target
    })
}

fn single_arc(target: Value) -> Value {
    json!({
        "network": {
            "nodes": ["s", "t"],
            "arcs": [{"id": "st", "tail": "s", "head": "t", "capacity": 1, "delay": 0}],
            "source": "s",
            "sink": "t"
        },
        "cost": {"preset": "standard", "alpha": 1, "beta": "1/2", "gamma": 2},
        "target": target
    })
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowtoll"))
        .args(args)
        .output()
        .unwrap()
}

fn run_on(cmd: &str, instance: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        cmd,
        "--instance",
        instance.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_two_arc_demand_gives_horizon_two() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"demand": "15/2"})));
    let out = dir.path().join("out");
    let o = run_on("solve", &inst, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(&out.join("summary.json"));
    assert_eq!(summary["horizon"], "2");
    assert_eq!(summary["value"], "15/2");
    assert_eq!(summary["paths"].as_array().unwrap().len(), 2);
    for f in [
        "flow.json",
        "schedule.json",
        "decomposition.json",
        "rates/0-e.csv",
        "rates/2-g.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn zero_demand_gives_empty_flow() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"demand": 0})));
    let o = run_on("solve", &inst, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let summary = read(&dir.path().join("summary.json"));
    assert_eq!(summary["primal_cost"], "0");
    let flow = read(&dir.path().join("flow.json"));
    assert!(flow["arcs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a["pieces"].as_array().unwrap().is_empty()));
}

#[test]
fn malformed_input_exits_one_and_names_the_field() {
    let dir = TempDir::new().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"network\": ").unwrap();
    let o = run_on("solve", &broken, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));

    let mut v = two_arc(json!({"demand": 1}));
    v["network"]["arcs"][1].as_object_mut().unwrap().remove("capacity");
    let inst = write(&dir, "i.json", &v);
    let o = run_on("solve", &inst, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("capacity"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let inst = write(&dir, "j.json", &two_arc(json!({"demand": 1, "horizon": 2})));
    assert_eq!(run_on("solve", &inst, dir.path(), &[]).status.code(), Some(1));
}

#[test]
fn unreachable_sink_exits_two() {
    let dir = TempDir::new().unwrap();
    let mut v = two_arc(json!({"demand": 1}));
    v["network"]["arcs"] = json!([{"id": "e", "tail": "s", "head": "a", "capacity": 2, "delay": 0}]);
    let inst = write(&dir, "i.json", &v);
    assert_eq!(run_on("solve", &inst, dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run_on("tolls", &inst, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn tolls_certify_with_zero_gap() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"horizon": 2})));
    let o = run_on("tolls", &inst, dir.path(), &["--samples", "30", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read(&dir.path().join("certificate_report.json"));
    assert_eq!(report["gap"], "0");
    assert_eq!(report["passed"], true);
    assert_eq!(report["equilibrium"]["samples"], 30);
    let csv = fs::read_to_string(dir.path().join("tolls/2-g.csv")).unwrap();
    assert!(csv.contains("-3,-1,0,1/2"), "{csv}");
    let f = fs::read_to_string(dir.path().join("tolls/1-f.csv")).unwrap();
    assert_eq!(f.trim(), "from,to,slope,intercept");
}

#[test]
fn written_artifacts_verify_without_solving() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"demand": "15/2"})));
    assert_eq!(run_on("solve", &inst, dir.path(), &[]).status.code(), Some(0));
    assert_eq!(run_on("tolls", &inst, dir.path(), &[]).status.code(), Some(0));
    let d = dir.path().to_str().unwrap();
    let o = run(&["verify", "--instance", inst.to_str().unwrap(), "--dir", d]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["gap"], "0");

    let mut flow = read(&dir.path().join("flow.json"));
    flow["arcs"][2]["pieces"] = json!([]);
    flow["arcs"][2]["points"] = json!([]);
    let bad = write(&dir, "bad_flow.json", &flow);
    let o = run(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--dir",
        d,
        "--flow",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn curve_single_arc_has_slope_inverse_beta_plus_inverse_gamma() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &single_arc(json!({"demand": 1})));
    assert_eq!(run_on("curve", &inst, dir.path(), &[]).status.code(), Some(0));
    let curve = read(&dir.path().join("curve.json"));
    let points = curve["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    // 1/β + 1/γ = 2 + 1/2
    assert_eq!(points[0]["slope_right"], "5/2");
    assert_eq!(curve["final_slope"], "5/2");
}

#[test]
fn curve_two_arc_breaks_when_second_path_activates() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"demand": 1})));
    assert_eq!(run_on("curve", &inst, dir.path(), &[]).status.code(), Some(0));
    let curve = read(&dir.path().join("curve.json"));
    let points = curve["points"].as_array().unwrap();
    let horizons: Vec<&str> = points.iter().map(|p| p["horizon"].as_str().unwrap()).collect();
    assert_eq!(horizons, ["0", "1"]);
    assert_eq!(points[1]["value"], "5/2");
    assert_eq!(curve["inverse"][1]["value"], "5/2");
}

#[test]
fn curve_without_paths_is_empty() {
    let dir = TempDir::new().unwrap();
    let mut v = single_arc(json!({"demand": 0}));
    v["network"]["arcs"] = json!([]);
    let inst = write(&dir, "i.json", &v);
    assert_eq!(run_on("curve", &inst, dir.path(), &[]).status.code(), Some(0));
    let curve = read(&dir.path().join("curve.json"));
    assert!(curve["points"].as_array().unwrap().is_empty());
}

#[test]
fn oracle_dominates_and_rejects_non_dividing_steps() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"demand": "15/2"})));
    assert_eq!(run_on("oracle", &inst, dir.path(), &[]).status.code(), Some(0));
    let report = read(&dir.path().join("oracle_report.json"));
    assert_eq!(report["dominance"], true);
    assert_eq!(report["levels"].as_array().unwrap().len(), 3);
    assert_eq!(
        run_on("oracle", &inst, dir.path(), &["--deltas", "2/3"]).status.code(),
        Some(1)
    );
}

#[test]
fn oracle_in_earliest_arrival_mode_reports_deadlines() {
    let dir = TempDir::new().unwrap();
    let mut v = two_arc(json!({"horizon": 3}));
    v["cost"] = json!({"preset": "eaf", "alpha": 1});
    let inst = write(&dir, "i.json", &v);
    let o = run_on("oracle", &inst, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read(&dir.path().join("oracle_report.json"));
    let deadlines = report["deadlines"].as_array().unwrap();
    assert_eq!(deadlines.len(), 4);
    assert!(deadlines.iter().all(|d| d["matches"] == true));
}

#[test]
fn eaf_alias_replaces_the_cost() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"horizon": 2})));
    assert_eq!(run_on("eaf", &inst, dir.path(), &[]).status.code(), Some(0));
    let summary = read(&dir.path().join("summary.json"));
    assert_eq!(summary["cost"]["plus_infinity_right"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &two_arc(json!({"demand": "15/2"})));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(run_on("solve", &inst, out, &[]).status.code(), Some(0));
        assert_eq!(run_on("tolls", &inst, out, &[]).status.code(), Some(0));
    }
    for f in [
        "flow.json",
        "schedule.json",
        "summary.json",
        "tolls.json",
        "potentials.json",
        "certificate_report.json",
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let leftovers: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}
