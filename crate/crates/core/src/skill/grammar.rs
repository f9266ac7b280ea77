//! Expansion of manipulation primitives into skill primitives.
//!
//! Each primitive kind has a slot template following
//! `MP -> [getTool][getObj] move {processObj} move put [putTool]`, with
//! `move -> [roughPos][finePos]` and `put -> [putObj][move]`. Slots are
//! expanded one at a time against the current state, so a rule is always
//! evaluated after the preceding skill primitive has taken effect.

use std::collections::VecDeque;

use nalgebra::{Point3, Translation3, Vector3};

use super::rules::{
    rule_fine_pos, rule_get_obj, rule_get_tool, rule_put_obj, rule_put_tool, rule_rough_pos,
    TOL_FEAT, TOL_POS,
};
use super::types::{
    ApName, AxisMode, ExecState, HybridMove, Process, SkillPrimitive, StopCondition, StopKind,
    TaskFrame, ToolCmd, ToolCommand,
};
use crate::control::Camera;
use crate::error::DecomposeError;
use crate::geometry::{pose_to_setpoint, to_vector, translated, Pose};
use crate::model::{AssemblyModel, Tool};
use crate::planner::{MpKind, Phase, PlanEntry};

/// Camera distance above the grasp point for fine positioning (m).
pub const STANDOFF: f64 = 0.1;
/// Distance before contact at which force-guided approaches start (m).
pub const PRE_OFFSET: f64 = 0.05;
/// Vertical retreat after releasing an object (m).
pub const RELEASE_LIFT: f64 = 0.05;
pub const AP_TIMEOUT_S: f64 = 60.0;
/// Contact force while unscrewing or tightening (N).
pub const F_PROCESS: f64 = 10.0;
/// Contact force for grasping, placing and inserting (N).
pub const F_CONTACT: f64 = 5.0;
/// Pulling force on retained parts (N).
pub const F_PULL: f64 = 20.0;
/// Force band in which a pull counts as released (N).
pub const PULL_RELEASE_TOL: f64 = 1.0;
/// Relative force band for force-reached stops.
pub const FORCE_TOL_REL: f64 = 0.02;
/// Expected travel of a pull before the part lets go (m).
pub const PULL_TRAVEL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    GetTool,
    GetObj,
    Approach,
    FinePos,
    Process(Process),
    Transfer,
    PutObj,
    Release,
    PutTool,
}

fn template(phase: Phase, kind: MpKind) -> Vec<Slot> {
    use Slot::*;
    match (phase, kind) {
        (Phase::Disassembly, MpKind::Twist) => vec![
            GetTool,
            GetObj,
            Approach,
            FinePos,
            Process(super::Process::Unscrew),
            Transfer,
            PutObj,
            Release,
            PutTool,
        ],
        (Phase::Disassembly, MpKind::Pull) => vec![
            GetTool,
            GetObj,
            Approach,
            FinePos,
            Process(super::Process::Grasp),
            Process(super::Process::Pull),
            Transfer,
            PutObj,
            Release,
            PutTool,
        ],
        (Phase::Disassembly, MpKind::Move) => vec![
            GetTool,
            GetObj,
            Approach,
            FinePos,
            Process(super::Process::Grasp),
            Transfer,
            PutObj,
            Release,
            PutTool,
        ],
        (Phase::Disassembly, MpKind::Put) => vec![PutObj, Release, PutTool],
        (Phase::Assembly, MpKind::Move) => vec![GetTool, GetObj, Approach, FinePos],
        (Phase::Assembly, MpKind::Put) => {
            vec![Process(super::Process::Place), PutObj, Release, PutTool]
        }
        (Phase::Assembly, MpKind::Pull) => vec![
            GetTool,
            GetObj,
            Approach,
            FinePos,
            Process(super::Process::Insert),
            PutObj,
            Release,
            PutTool,
        ],
        (Phase::Assembly, MpKind::Twist) => vec![
            GetTool,
            GetObj,
            Approach,
            FinePos,
            Process(super::Process::Tighten),
            PutObj,
            Release,
            PutTool,
        ],
    }
}

fn unresolvable(slot: &str, c: &str, reason: impl Into<String>) -> DecomposeError {
    DecomposeError::UnresolvableGoal {
        slot: slot.to_string(),
        component: c.to_string(),
        reason: reason.into(),
    }
}

fn believed_pose(model: &AssemblyModel, state: &ExecState, c: &str, slot: &str) -> Result<Pose, DecomposeError> {
    state
        .object_poses
        .get(c)
        .copied()
        .or_else(|| model.component(c).ok().map(|comp| comp.pose))
        .ok_or_else(|| unresolvable(slot, c, "no pose known for the component"))
}

fn grasp_offset(model: &AssemblyModel, c: &str, slot: &str) -> Result<Pose, DecomposeError> {
    model
        .component(c)
        .map(|comp| comp.grasp_offset)
        .map_err(|_| unresolvable(slot, c, "component not in model"))
}

/// Pose `d` behind `pose` along its own z-axis.
fn backed_off(pose: &Pose, d: f64) -> Pose {
    pose * Translation3::new(0.0, 0.0, -d)
}

/// Grasp pose of `c` where it sits when installed.
fn install_grasp(model: &AssemblyModel, c: &str, slot: &str) -> Result<Pose, DecomposeError> {
    let comp = model
        .component(c)
        .map_err(|_| unresolvable(slot, c, "component not in model"))?;
    Ok(comp.grasp_pose())
}

/// Direction hint of the step: extraction when taking apart, insertion
/// when putting together.
fn hint_axis(step: &PlanEntry) -> Option<Vector3<f64>> {
    step.direction.map(|d| to_vector(&d).normalize())
}

/// Goal of the first `move` of a primitive: the camera standoff above the
/// grasp point (or a short pre-grasp offset without features) when taking
/// apart, the pre-install pose when putting together.
pub fn approach_goal(model: &AssemblyModel, state: &ExecState, step: &PlanEntry) -> Result<Pose, DecomposeError> {
    let c = step.component.as_str();
    match step.phase {
        Phase::Disassembly => {
            let grasp = believed_pose(model, state, c, "approach")? * grasp_offset(model, c, "approach")?;
            let features = model.component(c).is_ok_and(|comp| comp.has_visual_features());
            Ok(backed_off(&grasp, if features { STANDOFF } else { PRE_OFFSET }))
        }
        Phase::Assembly => {
            let target = install_grasp(model, c, "approach")?;
            Ok(match hint_axis(step) {
                Some(a) => translated(&target, -a * PRE_OFFSET),
                None => backed_off(&target, PRE_OFFSET),
            })
        }
    }
}

fn storage_grasp(model: &AssemblyModel, c: &str, slot: &str) -> Result<Pose, DecomposeError> {
    let comp = model
        .component(c)
        .map_err(|_| unresolvable(slot, c, "component not in model"))?;
    let put = comp
        .put_pose
        .ok_or_else(|| unresolvable(slot, c, "no put pose defined"))?;
    Ok(put * comp.grasp_offset)
}

fn tool_station(model: &AssemblyModel, tool: Tool, slot: &str, c: &str) -> Result<Pose, DecomposeError> {
    model
        .tool_stations
        .get(&tool)
        .copied()
        .ok_or_else(|| unresolvable(slot, c, format!("no station for tool {}", tool.as_str())))
}

fn pose_move(name: ApName, goal: &Pose, tool: ToolCommand, c: &str) -> SkillPrimitive {
    let setpoint = pose_to_setpoint(goal);
    SkillPrimitive {
        name,
        component: Some(c.to_string()),
        process: None,
        hm: HybridMove {
            task_frame: TaskFrame::World,
            control: vec![AxisMode::Pos; 6],
            setpoint: setpoint.clone(),
            contact_axis: None,
        },
        tool,
        stop: StopCondition {
            kind: StopKind::PoseReached,
            target: setpoint,
            tolerance: TOL_POS,
            timeout_s: AP_TIMEOUT_S,
        },
    }
}

fn force_move(
    name: ApName,
    process: Option<Process>,
    axis: Vector3<f64>,
    force: f64,
    tool: ToolCommand,
    stop: StopCondition,
    c: &str,
) -> SkillPrimitive {
    let mut control = vec![AxisMode::Pos; 6];
    control[2] = AxisMode::Ftc;
    let mut setpoint = vec![0.0; 6];
    setpoint[2] = force;
    SkillPrimitive {
        name,
        component: Some(c.to_string()),
        process,
        hm: HybridMove {
            task_frame: TaskFrame::Tool,
            control,
            setpoint,
            contact_axis: Some([axis.x, axis.y, axis.z]),
        },
        tool,
        stop,
    }
}

fn force_stop(kind: StopKind, target: f64, tolerance: f64) -> StopCondition {
    StopCondition {
        kind,
        target: vec![target],
        tolerance,
        timeout_s: AP_TIMEOUT_S,
    }
}

/// Desired image features of `c` seen from `camera_pose`, using the believed pose.
pub fn desired_features(
    model: &AssemblyModel,
    state: &ExecState,
    c: &str,
    camera_pose: &Pose,
    camera: &Camera,
) -> Option<Vec<f64>> {
    let comp = model.component(c).ok()?;
    let pose = state.object_poses.get(c).copied().unwrap_or(comp.pose);
    let pts: Vec<Point3<f64>> = comp.visual_features.iter().map(|p| pose * p).collect();
    camera.project(camera_pose, &pts).map(|f| f.pixels)
}

fn tcp_z(state: &ExecState) -> Vector3<f64> {
    state.robot_pose.rotation * Vector3::z()
}

/// A skill primitive together with the robot pose it is expected to leave
/// behind when it succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub ap: SkillPrimitive,
    pub expected_pose: Pose,
}

/// Incremental expansion of one manipulation primitive.
#[derive(Debug, Clone)]
pub struct Expansion<'a> {
    model: &'a AssemblyModel,
    step: &'a PlanEntry,
    next: Option<&'a PlanEntry>,
    slots: VecDeque<Slot>,
    put_emitted: bool,
    approach: Option<Pose>,
    camera: Camera,
}

impl<'a> Expansion<'a> {
    pub fn new(model: &'a AssemblyModel, step: &'a PlanEntry, next: Option<&'a PlanEntry>) -> Self {
        Expansion {
            model,
            step,
            next,
            slots: template(step.phase, step.kind).into(),
            put_emitted: false,
            approach: None,
            camera: Camera::default(),
        }
    }

    /// Next skill primitive whose rule holds in `state`, or `None` when the
    /// template is exhausted.
    pub fn next_ap(&mut self, state: &ExecState) -> Result<Option<Emitted>, DecomposeError> {
        while let Some(slot) = self.slots.pop_front() {
            if let Some(e) = self.expand(slot, state)? {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    fn expand(&mut self, slot: Slot, state: &ExecState) -> Result<Option<Emitted>, DecomposeError> {
        let model = self.model;
        let step = self.step;
        let c = step.component.as_str();
        let tool = step.tool;
        let emitted = match slot {
            Slot::GetTool => {
                if !rule_get_tool(state.held_tool, tool) {
                    return Ok(None);
                }
                let goal = tool_station(model, tool, "getTool", c)?;
                let cmd = ToolCommand {
                    tool: Some(tool),
                    cmd: ToolCmd::Close,
                };
                Emitted {
                    ap: pose_move(ApName::GetTool, &goal, cmd, c),
                    expected_pose: goal,
                }
            }
            Slot::GetObj => {
                if !rule_get_obj(state, c, step.phase) {
                    return Ok(None);
                }
                let goal = match state.object_poses.get(c) {
                    Some(p) => p * grasp_offset(model, c, "getObj")?,
                    None => storage_grasp(model, c, "getObj")?,
                };
                let cmd = ToolCommand {
                    tool: Some(tool),
                    cmd: ToolCmd::Close,
                };
                Emitted {
                    ap: pose_move(ApName::GetObj, &goal, cmd, c),
                    expected_pose: goal,
                }
            }
            Slot::Approach => {
                let goal = approach_goal(model, state, step)?;
                self.approach = Some(goal);
                if !rule_rough_pos(state, &goal) {
                    return Ok(None);
                }
                Emitted {
                    ap: pose_move(ApName::RoughPos, &goal, ToolCommand::IDLE, c),
                    expected_pose: goal,
                }
            }
            Slot::FinePos => {
                let Some(goal) = self.approach else {
                    return Ok(None);
                };
                if !rule_fine_pos(state, model, c, step.phase, &goal, &self.camera) {
                    return Ok(None);
                }
                let features = desired_features(model, state, c, &goal, &self.camera)
                    .ok_or_else(|| unresolvable("finePos", c, "features not visible from the standoff pose"))?;
                Emitted {
                    ap: SkillPrimitive {
                        name: ApName::FinePos,
                        component: Some(c.to_string()),
                        process: None,
                        hm: HybridMove {
                            task_frame: TaskFrame::Rgbd,
                            control: vec![AxisMode::Vsc; features.len()],
                            setpoint: features.clone(),
                            contact_axis: None,
                        },
                        tool: ToolCommand::IDLE,
                        stop: StopCondition {
                            kind: StopKind::FeatureReached,
                            target: features,
                            tolerance: TOL_FEAT,
                            timeout_s: AP_TIMEOUT_S,
                        },
                    },
                    expected_pose: goal,
                }
            }
            Slot::Process(p) => self.process(p, state)?,
            Slot::Transfer => {
                let goal = translated(&storage_grasp(model, c, "transfer")?, Vector3::z() * PRE_OFFSET);
                if !rule_rough_pos(state, &goal) {
                    return Ok(None);
                }
                Emitted {
                    ap: pose_move(ApName::RoughPos, &goal, ToolCommand::IDLE, c),
                    expected_pose: goal,
                }
            }
            Slot::PutObj => {
                if !rule_put_obj(state, c, self.next) {
                    return Ok(None);
                }
                self.put_emitted = true;
                let (axis, expected) = match step.phase {
                    Phase::Disassembly => (tcp_z(state), storage_grasp(model, c, "putObj")?),
                    Phase::Assembly => (
                        hint_axis(step).unwrap_or_else(|| tcp_z(state)),
                        install_grasp(model, c, "putObj")?,
                    ),
                };
                let cmd = ToolCommand {
                    tool: Some(tool),
                    cmd: ToolCmd::Open,
                };
                let stop = force_stop(StopKind::ForceReached, F_CONTACT, F_CONTACT * FORCE_TOL_REL);
                Emitted {
                    ap: force_move(ApName::PutObj, None, axis, F_CONTACT, cmd, stop, c),
                    expected_pose: expected,
                }
            }
            Slot::Release => {
                if !self.put_emitted {
                    return Ok(None);
                }
                let goal = translated(&state.robot_pose, Vector3::z() * RELEASE_LIFT);
                Emitted {
                    ap: pose_move(ApName::RoughPos, &goal, ToolCommand::IDLE, c),
                    expected_pose: goal,
                }
            }
            Slot::PutTool => {
                if !rule_put_tool(state.held_tool, tool, self.next) {
                    return Ok(None);
                }
                let held = state.held_tool.unwrap_or(tool);
                let goal = tool_station(model, held, "putTool", c)?;
                let cmd = ToolCommand {
                    tool: Some(held),
                    cmd: ToolCmd::Open,
                };
                Emitted {
                    ap: pose_move(ApName::PutTool, &goal, cmd, c),
                    expected_pose: goal,
                }
            }
        };
        Ok(Some(emitted))
    }

    fn process(&self, p: Process, state: &ExecState) -> Result<Emitted, DecomposeError> {
        let model = self.model;
        let step = self.step;
        let c = step.component.as_str();
        let tool = step.tool;
        let with = |cmd| ToolCommand {
            tool: Some(tool),
            cmd,
        };
        let contact = |f: f64| force_stop(StopKind::ForceReached, f, f * FORCE_TOL_REL);
        let inserting = || hint_axis(step).unwrap_or_else(|| tcp_z(state));
        let (axis, force, cmd, stop, expected) = match p {
            Process::Unscrew | Process::Grasp => {
                let grasp = believed_pose(model, state, c, "processObj")? * grasp_offset(model, c, "processObj")?;
                let (force, cmd, stop) = if p == Process::Unscrew {
                    (
                        F_PROCESS,
                        with(ToolCmd::SpinCcw),
                        force_stop(StopKind::ToolDone, F_PROCESS, F_PROCESS * FORCE_TOL_REL),
                    )
                } else {
                    (F_CONTACT, with(ToolCmd::Close), contact(F_CONTACT))
                };
                (tcp_z(state), force, cmd, stop, grasp)
            }
            Process::Pull => {
                let axis = hint_axis(step).unwrap_or_else(|| -tcp_z(state));
                let expected = translated(&state.robot_pose, axis * PULL_TRAVEL);
                let stop = force_stop(StopKind::ForceReached, 0.0, PULL_RELEASE_TOL);
                (axis, F_PULL, with(ToolCmd::Idle), stop, expected)
            }
            Process::Place | Process::Insert => {
                let target = install_grasp(model, c, "processObj")?;
                (inserting(), F_CONTACT, with(ToolCmd::Idle), contact(F_CONTACT), target)
            }
            Process::Tighten => {
                let target = install_grasp(model, c, "processObj")?;
                let stop = force_stop(StopKind::ToolDone, F_PROCESS, F_PROCESS * FORCE_TOL_REL);
                (inserting(), F_PROCESS, with(ToolCmd::SpinCw), stop, target)
            }
        };
        Ok(Emitted {
            ap: force_move(ApName::ProcessObj, Some(p), axis, force, cmd, stop, c),
            expected_pose: expected,
        })
    }
}

/// Idealized effect of a successful skill primitive on the state.
pub fn apply_nominal(state: &mut ExecState, emitted: &Emitted, model: &AssemblyModel) {
    let ap = &emitted.ap;
    let c = ap.component.clone().unwrap_or_default();
    state.robot_pose = emitted.expected_pose;
    state.current_goal = Some(emitted.expected_pose);
    match ap.name {
        ApName::GetTool => state.held_tool = ap.tool.tool,
        ApName::PutTool => state.held_tool = None,
        ApName::GetObj => state.held_object = Some(c),
        ApName::RoughPos => {}
        ApName::FinePos => {
            if let Some(p) = state.object_poses.get(&c).copied() {
                state.vision_pose_estimate = Some((c, p));
            }
        }
        ApName::ProcessObj => if let Some(Process::Unscrew | Process::Grasp) = ap.process { state.held_object = Some(c) },
        ApName::PutObj => {
            state.held_object = None;
            if let Ok(comp) = model.component(&c) {
                state
                    .object_poses
                    .insert(c, emitted.expected_pose * comp.grasp_offset.inverse());
            }
        }
    }
    // a carried object moves with the tool
    if ap.name != ApName::PutObj && state.held_object.as_deref() == Some(c_ref(ap)) {
        if let Ok(comp) = model.component(c_ref(ap)) {
            let pose = state.robot_pose * comp.grasp_offset.inverse();
            state.object_poses.insert(comp.id.clone(), pose);
        }
    }
}

fn c_ref(ap: &SkillPrimitive) -> &str {
    ap.component.as_deref().unwrap_or("")
}

/// Direction hints completed for steps that have none, taken from another
/// step on the same component in the same phase.
pub fn fill_direction_hints(entries: &[PlanEntry]) -> Vec<PlanEntry> {
    entries
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.direction.is_none() {
                e.direction = entries
                    .iter()
                    .find(|o| o.phase == e.phase && o.component == e.component && o.direction.is_some())
                    .and_then(|o| o.direction);
            }
            e
        })
        .collect()
}

/// Expands one manipulation primitive against `state`, assuming every skill
/// primitive succeeds nominally.
pub fn decompose(
    step: &PlanEntry,
    next: Option<&PlanEntry>,
    state: &ExecState,
    model: &AssemblyModel,
) -> Result<Vec<SkillPrimitive>, DecomposeError> {
    let mut s = state.clone();
    decompose_with(step, next, &mut s, model)
}

/// As [`decompose`], leaving the predicted state in `state`.
pub fn decompose_with(
    step: &PlanEntry,
    next: Option<&PlanEntry>,
    state: &mut ExecState,
    model: &AssemblyModel,
) -> Result<Vec<SkillPrimitive>, DecomposeError> {
    let mut exp = Expansion::new(model, step, next);
    let mut out = Vec::new();
    while let Some(e) = exp.next_ap(state)? {
        apply_nominal(state, &e, model);
        out.push(e.ap);
    }
    Ok(out)
}

/// Expands a whole plan with nominal effects, primitive by primitive.
pub fn decompose_plan(
    entries: &[PlanEntry],
    state: &ExecState,
    model: &AssemblyModel,
) -> Result<Vec<(usize, SkillPrimitive)>, DecomposeError> {
    let entries = fill_direction_hints(entries);
    let mut s = state.clone();
    let mut out = Vec::new();
    for (i, step) in entries.iter().enumerate() {
        for ap in decompose_with(step, entries.get(i + 1), &mut s, model)? {
            out.push((i, ap));
        }
    }
    Ok(out)
}
