use std::path::PathBuf;

use dismantle_core::dspace::{sample_sphere, SdofValue, DirectionSet};
use dismantle_core::model::load_model;
use dismantle_core::planner::{
    invert_plan, plan_disassembly, plan_task, removable, transition, ManipulationPrimitive, MpKind,
    Phase, SymbolicState, TaskPlan,
};
use dismantle_core::{AssemblyModel, PlanError, Tool};

fn scenario(name: &str) -> AssemblyModel {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    load_model(&p).unwrap()
}

fn dirs() -> DirectionSet {
    sample_sphere(10_000, 7)
}

fn kinds(p: &dismantle_core::Plan) -> Vec<(MpKind, String)> {
    p.steps.iter().map(|m| (m.kind, m.component.clone())).collect()
}

#[test]
fn valve_plan_has_twelve_primitives() {
    let model = scenario("valve.json");
    let task = plan_task(&model, &dirs()).unwrap();
    assert_eq!(task.len(), 12);
    let dis = &task.segments[0];
    let expected = [
        (MpKind::Twist, "screw_1"),
        (MpKind::Twist, "screw_2"),
        (MpKind::Pull, "hose"),
        (MpKind::Put, "hose"),
        (MpKind::Move, "valve_body"),
        (MpKind::Put, "valve_body"),
    ];
    let got = kinds(dis);
    assert_eq!(
        got,
        expected.iter().map(|(k, c)| (*k, c.to_string())).collect::<Vec<_>>()
    );
    let asm = &task.segments[1];
    assert_eq!(asm.phase, Phase::Assembly);
    assert_eq!(asm.steps[0].component, "valve_body");
    assert_eq!(asm.steps.last().unwrap().kind, MpKind::Twist);
    assert_eq!(asm.steps.last().unwrap().component, "screw_1");
}

#[test]
fn valve_task_replays_forward_and_back() {
    let model = scenario("valve.json");
    let d = dirs();
    let task = plan_task(&model, &d).unwrap();
    let s0 = SymbolicState::initial(&model, &d);
    let s1 = task.segments[0].replay(&s0, &model, &d).unwrap();
    assert!(s1.removed.contains("valve_body"));
    let s2 = task.segments[1].replay(&s1, &model, &d).unwrap();
    assert!(s2.removed.is_empty());
    assert_eq!(s2.held, None);
    assert_eq!(s2.sdof, s0.sdof);
}

#[test]
fn valve_removability_matches_contacts() {
    let model = scenario("valve.json");
    let d = dirs();
    let s = SymbolicState::initial(&model, &d);
    assert!(!removable(&s, &model, &d, "screw_1").unwrap().0);
    assert!(!removable(&s, &model, &d, "valve_body").unwrap().0);
    let (hose, dir) = removable(&s, &model, &d, "hose").unwrap();
    assert!(hose);
    let h = nalgebra::Vector3::new(1.0, 0.0, 1.0).normalize();
    assert!(dir.unwrap().dot(&h) > 0.99);
    assert!(matches!(
        removable(&s, &model, &d, "nope"),
        Err(PlanError::UnknownComponent(_))
    ));
}

#[test]
fn valve_frees_after_blockers_leave() {
    let model = scenario("valve.json");
    let d = dirs();
    let mut s = SymbolicState::initial(&model, &d);
    for mp in [
        ManipulationPrimitive::new(MpKind::Twist, "screw_1", Tool::Screwdriver),
        ManipulationPrimitive::new(MpKind::Twist, "screw_2", Tool::Screwdriver),
        ManipulationPrimitive::new(MpKind::Pull, "hose", Tool::Gripper),
        ManipulationPrimitive::new(MpKind::Put, "hose", Tool::Gripper),
    ] {
        s = transition(&s, &mp, &model, &d).unwrap();
    }
    assert!(removable(&s, &model, &d, "valve_body").unwrap().0);
    assert_eq!(s.sdof["valve_body"].value, SdofValue::Agpp);
    assert_eq!(s.step, 4);
}

#[test]
fn twist_frees_screw_along_axis() {
    let model = scenario("single_screw.json");
    let d = dirs();
    let s = SymbolicState::initial(&model, &d);
    assert_eq!(s.sdof["screw"].value, SdofValue::Fix);
    let mp = ManipulationPrimitive::new(MpKind::Twist, "screw", Tool::Screwdriver);
    let s = transition(&s, &mp, &model, &d).unwrap();
    let label = s.extracted["screw"];
    assert_eq!(label.value, SdofValue::Lin);
    assert!(label.axis.unwrap().z.abs() > 0.999);
    assert!(!s.sdof.contains_key("screw"));
    let again = transition(&s, &mp, &model, &d);
    assert!(matches!(again, Err(PlanError::InapplicablePrimitive { .. })));
}

#[test]
fn single_screw_is_one_twist() {
    let model = scenario("single_screw.json");
    let p = plan_disassembly(&model, &dirs()).unwrap();
    assert_eq!(kinds(&p), vec![(MpKind::Twist, "screw".to_string())]);
    assert_eq!(p.steps[0].tool, Tool::Screwdriver);
    assert!(p.direction_hints[&0].z > 0.99);
}

#[test]
fn empty_target_gives_empty_plan() {
    let model = scenario("empty_target.json");
    let task = plan_task(&model, &dirs()).unwrap();
    assert!(task.is_empty());
    assert!(invert_plan(&dismantle_core::Plan::default()).is_empty());
}

#[test]
fn mutual_blocking_is_infeasible() {
    let model = scenario("blocked.json");
    match plan_disassembly(&model, &dirs()) {
        Err(PlanError::PlanInfeasible { target, blocking }) => {
            assert_eq!(target, "pin");
            assert!(blocking.iter().any(|b| b.contains("sleeve")));
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn plan_json_round_trips() {
    let model = scenario("valve.json");
    let task = plan_task(&model, &dirs()).unwrap();
    let entries: Vec<_> = serde_json::from_str(&task.to_json()).unwrap();
    let back = TaskPlan::from_entries(&entries);
    assert_eq!(back.len(), task.len());
    for (a, b) in back.segments.iter().zip(&task.segments) {
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.phase, b.phase);
        for (i, d) in &b.direction_hints {
            assert!((a.direction_hints[i].into_inner() - d.into_inner()).norm() < 1e-12);
        }
    }
}

#[test]
fn planning_is_deterministic() {
    let model = scenario("valve.json");
    let a = plan_task(&model, &sample_sphere(5_000, 3)).unwrap();
    let b = plan_task(&model, &sample_sphere(5_000, 3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(invert_plan(&invert_plan(&a.segments[0])), a.segments[0]);
}
