//! Boolean decision rules selecting the optional skill primitives.

use std::collections::BTreeSet;

use nalgebra::Point3;

use super::types::{ApName, ExecState};
use crate::control::Camera;
use crate::geometry::Pose;
use crate::model::{AssemblyModel, Tool};
use crate::planner::{Phase, PlanEntry};

/// Position tolerance of the rough-positioning rule (m).
pub const TOL_POS: f64 = 1e-3;
/// Orientation tolerance of the rough-positioning rule (rad).
pub const TOL_ROT: f64 = 1e-3;
/// Feature tolerance of the fine-positioning rule (px).
pub const TOL_FEAT: f64 = 1.0;

/// A tool must be fetched unless the required one is already mounted.
pub fn rule_get_tool(held: Option<Tool>, required: Tool) -> bool {
    held != Some(required)
}

/// The mounted tool goes back when the next primitive needs another one or
/// the plan ends.
pub fn rule_put_tool(held: Option<Tool>, tool: Tool, next: Option<&PlanEntry>) -> bool {
    held.is_some() && next.is_none_or(|n| n.tool != tool)
}

pub fn rule_rough_pos(state: &ExecState, goal: &Pose) -> bool {
    !state.at(goal, TOL_POS, TOL_ROT)
}

/// Largest pixel discrepancy between the features of `c` as believed and as
/// last seen by the camera, viewed from `camera_pose`. Infinite without a
/// camera estimate of `c`.
pub fn expected_feature_residual(
    state: &ExecState,
    model: &AssemblyModel,
    c: &str,
    camera_pose: &Pose,
    camera: &Camera,
) -> f64 {
    let (Some((seen, estimate)), Some(belief), Ok(comp)) = (
        state.vision_pose_estimate.as_ref(),
        state.object_poses.get(c),
        model.component(c),
    ) else {
        return f64::INFINITY;
    };
    if seen != c {
        return f64::INFINITY;
    }
    let project = |pose: &Pose| {
        let pts: Vec<Point3<f64>> = comp.visual_features.iter().map(|p| pose * p).collect();
        camera.project(camera_pose, &pts)
    };
    match (project(belief), project(estimate)) {
        (Some(a), Some(b)) => a.max_error(&b.pixels),
        _ => f64::INFINITY,
    }
}

/// Fine positioning runs when a visual goal exists (disassembly approach of a
/// component with features) and the believed pose may be off by more than
/// the feature tolerance.
pub fn rule_fine_pos(
    state: &ExecState,
    model: &AssemblyModel,
    c: &str,
    phase: Phase,
    camera_pose: &Pose,
    camera: &Camera,
) -> bool {
    let has_features = model.component(c).is_ok_and(|comp| comp.has_visual_features());
    phase == Phase::Disassembly
        && has_features
        && expected_feature_residual(state, model, c, camera_pose, camera) > TOL_FEAT
}

/// The carried object is set down when the next primitive handles another
/// component or the plan ends.
pub fn rule_put_obj(state: &ExecState, c: &str, next: Option<&PlanEntry>) -> bool {
    state.held_object.as_deref() == Some(c) && next.is_none_or(|n| n.component != c)
}

/// Objects are fetched from storage only while assembling.
pub fn rule_get_obj(state: &ExecState, c: &str, phase: Phase) -> bool {
    phase == Phase::Assembly && state.held_object.as_deref() != Some(c)
}

/// Evaluates every rule against the state at the start of `step`. Goals
/// that cannot be resolved count as unreached.
pub fn rule_set(
    state: &ExecState,
    step: &PlanEntry,
    next: Option<&PlanEntry>,
    model: &AssemblyModel,
) -> BTreeSet<ApName> {
    let c = step.component.as_str();
    let mut out = BTreeSet::new();
    if rule_get_tool(state.held_tool, step.tool) {
        out.insert(ApName::GetTool);
    }
    if rule_get_obj(state, c, step.phase) {
        out.insert(ApName::GetObj);
    }
    let approach = super::grammar::approach_goal(model, state, step).ok();
    if approach.is_none_or(|g| rule_rough_pos(state, &g)) {
        out.insert(ApName::RoughPos);
    }
    let camera = Camera::default();
    if let Some(goal) = approach {
        if rule_fine_pos(state, model, c, step.phase, &goal, &camera) {
            out.insert(ApName::FinePos);
        }
    }
    if rule_put_obj(state, c, next) {
        out.insert(ApName::PutObj);
    }
    if rule_put_tool(state.held_tool, step.tool, next) {
        out.insert(ApName::PutTool);
    }
    out
}
