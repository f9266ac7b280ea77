use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dismantle")).args(args).output().expect("binary runs")
}

fn arg(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn plan_valve_has_twelve_primitives() {
    let o = run(&["plan", arg(&scenario("valve.json"))]);
    assert!(o.status.success());
    let plan: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(plan.len(), 12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hose -- valve_body"));
}

#[test]
fn empty_target_gives_empty_plan() {
    let o = run(&["plan", arg(&scenario("empty_target.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[]");
}

#[test]
fn blocked_scenario_exits_infeasible() {
    let o = run(&["plan", arg(&scenario("blocked.json"))]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sleeve") && err.contains("concentric"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn parse_and_validation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["plan", arg(&bad)]).status.code(), Some(1));

    let text = std::fs::read_to_string(scenario("single_screw.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["target"] = "ghost".into();
    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, doc.to_string()).unwrap();
    assert_eq!(run(&["plan", arg(&invalid)]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["plan", arg(&missing)]).status.code(), Some(1));
}

#[test]
fn decompose_single_screw() {
    let o = run(&["decompose", arg(&scenario("single_screw.json"))]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        ["getTool", "roughPos", "finePos", "processObj", "roughPos", "putObj", "roughPos", "putTool"]
    );
}

#[test]
fn decompose_is_byte_stable() {
    let p = scenario("valve.json");
    let a = run(&["decompose", arg(&p), "--seed", "1"]);
    let b = run(&["decompose", arg(&p), "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let first: serde_json::Value = serde_json::from_str(stdout(&a).lines().next().unwrap()).unwrap();
    assert_eq!(first["name"], "getTool");
    assert_eq!(first["tool"]["tool"], "screwdriver");
}

#[test]
fn simulate_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let faults = dir.path().join("faults.json");
    std::fs::write(&faults, r#"[{"repetition": 3, "step": 1, "kind": "tool_slip"}]"#).unwrap();
    let out = dir.path().join("sim");
    let p = scenario("valve.json");
    let before = std::fs::read(&p).unwrap();
    let o = run(&["simulate", arg(&p), "--reps", "5", "--faults", arg(&faults), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&p).unwrap(), before, "scenario file must not change");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["success_rate"], 0.8);
    assert_eq!(report["mp_count"], 12);
    assert_eq!(report["failures"][0]["error_type"], "device");
    assert!(stdout(&o).contains("t_σ,neben"));
    assert!(out.join("rep_3/ticks.csv").is_file());

    let again = dir.path().join("again");
    let r = run(&["report", arg(&out), "--out", arg(&again)]);
    assert!(r.status.success());
    assert_eq!(
        std::fs::read(out.join("report.json")).unwrap(),
        std::fs::read(again.join("report.json")).unwrap()
    );
    assert_eq!(stdout(&r), stdout(&o));
}

#[test]
fn rejects_zero_samples_and_reps() {
    let p = scenario("valve.json");
    assert!(!run(&["plan", arg(&p), "--samples", "0"]).status.success());
    assert!(!run(&["simulate", arg(&p), "--reps", "0"]).status.success());
}
