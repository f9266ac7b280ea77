use std::collections::BTreeMap;

use nalgebra::{Point3, Translation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::faults::{FaultKind, FaultSpec};
use crate::control::{
    run_skill, Buckets, Contact, ControlParams, PlantState, SensorFaults, TickRecord,
    CONTACT_STIFFNESS,
};
use crate::dspace::DirectionSet;
use crate::error::{ErrorType, ExecutionFailed};
use crate::geometry::{setpoint_to_pose, to_vector, Pose};
use crate::model::{AssemblyModel, Semantic};
use crate::planner::{transition, ManipulationPrimitive, PlanEntry, SymbolicState};
use crate::skill::{
    approach_goal, interpret, ApName, ExecState, ExecTrace, Executor, Process, SkillPrimitive,
    StopKind, F_PULL, PULL_TRAVEL,
};

/// Radius of the planar error between modeled and actual poses of parts
/// that carry visual features (m).
pub const LOCALIZATION_ERROR: f64 = 0.01;
/// Holding force of retained parts (N), below the pulling force.
pub const RETENTION_FORCE: f64 = 0.75 * F_PULL;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecConfig {
    pub seed: u64,
    pub control: ControlParams,
    pub localization_error: f64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            seed: 0,
            control: ControlParams::default(),
            localization_error: LOCALIZATION_ERROR,
        }
    }
}

impl ExecConfig {
    /// Seed of one repetition (counted from 1).
    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(repetition as u64)
    }
}

/// Everything one repetition produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub repetition: usize,
    pub trace: ExecTrace,
    pub buckets: Buckets,
    pub ticks: Vec<TickRecord>,
}

impl RunOutcome {
    pub fn succeeded(&self) -> bool {
        self.trace.succeeded()
    }

    pub fn failure(&self) -> Option<&ExecutionFailed> {
        self.trace.failure.as_ref()
    }
}

/// Executes skill primitives on the simulated plant and keeps the actual
/// world, which the robot only perceives through its sensors, apart from
/// the believed one in `ExecState`.
struct PlantExecutor<'a> {
    model: &'a AssemblyModel,
    dirs: &'a DirectionSet,
    params: ControlParams,
    faults: Vec<FaultSpec>,
    repetition: usize,
    plant: PlantState,
    clock: u64,
    buckets: Buckets,
    ticks: Vec<TickRecord>,
    /// Actual object poses.
    world: BTreeMap<String, Pose>,
    /// Component physically held by the tool.
    attached: Option<String>,
    symbolic: SymbolicState,
    step: Option<PlanEntry>,
    step_index: usize,
}

impl PlantExecutor<'_> {
    fn fault(&self, pick: impl Fn(&FaultKind) -> bool) -> Option<FaultKind> {
        self.faults
            .iter()
            .find(|f| f.applies(self.repetition, self.step_index) && pick(&f.kind))
            .map(|f| f.kind)
    }

    fn failed(&self, ap: &SkillPrimitive, error_type: ErrorType, message: impl Into<String>) -> ExecutionFailed {
        ExecutionFailed {
            step: self.step_index,
            skill: ap.name.as_str().to_string(),
            error_type,
            message: message.into(),
        }
    }

    fn world_grasp(&self, c: &str) -> Pose {
        let comp = self.model.component(c).expect("plan components exist");
        self.world.get(c).copied().unwrap_or(comp.pose) * comp.grasp_offset
    }

    /// Contacts the tool meets while running `ap`.
    fn contacts_for(&self, ap: &SkillPrimitive) -> Vec<Contact> {
        let Some(axis) = ap.hm.contact_axis.map(|a| to_vector(&a).normalize()) else {
            return Vec::new();
        };
        let c = ap.component.as_deref().unwrap_or("");
        let step = self.step.as_ref().expect("primitive begun");
        let surface = |at: Pose| Contact::Plane {
            point: Point3::from(at.translation.vector),
            normal: -axis,
            stiffness: CONTACT_STIFFNESS,
        };
        let comp = self.model.component(c).expect("plan components exist");
        match (ap.name, ap.process) {
            (ApName::ProcessObj, Some(Process::Pull)) => vec![Contact::Retention {
                origin: Point3::from(self.plant.pose.translation.vector),
                axis,
                stiffness: CONTACT_STIFFNESS,
                max_force: RETENTION_FORCE,
                release_travel: PULL_TRAVEL,
                released: false,
            }],
            (ApName::ProcessObj, Some(Process::Unscrew | Process::Grasp)) => {
                vec![surface(self.world_grasp(c))]
            }
            (ApName::ProcessObj, _) => vec![surface(comp.grasp_pose())],
            (ApName::PutObj, _) => match step.phase {
                crate::planner::Phase::Disassembly => {
                    let put = comp.put_pose.unwrap_or(comp.pose);
                    vec![surface(put * comp.grasp_offset)]
                }
                crate::planner::Phase::Assembly => vec![surface(comp.grasp_pose())],
            },
            _ => Vec::new(),
        }
    }

    fn features_for(&self, ap: &SkillPrimitive) -> Vec<Point3<f64>> {
        if ap.name != ApName::FinePos {
            return Vec::new();
        }
        let c = ap.component.as_deref().unwrap_or("");
        let comp = self.model.component(c).expect("plan components exist");
        let pose = self.world.get(c).copied().unwrap_or(comp.pose);
        comp.visual_features.iter().map(|p| pose * p).collect()
    }

    fn carry(&mut self, state: &mut ExecState) {
        if let Some(c) = self.attached.clone() {
            let comp = self.model.component(&c).expect("plan components exist");
            let pose = self.plant.pose * comp.grasp_offset.inverse();
            self.world.insert(c.clone(), pose);
            if state.held_object.as_deref() == Some(c.as_str()) {
                state.object_poses.insert(c, pose);
            }
        }
    }
}

impl Executor for PlantExecutor<'_> {
    fn begin_primitive(&mut self, index: usize, step: &PlanEntry, _state: &ExecState) -> Result<(), ExecutionFailed> {
        self.step_index = index;
        self.step = Some(step.clone());
        let mp = ManipulationPrimitive::new(step.kind, step.component.clone(), step.tool);
        let mut s = self.symbolic.clone();
        s.phase = step.phase;
        match transition(&s, &mp, self.model, self.dirs) {
            Ok(next) => {
                self.symbolic = next;
                Ok(())
            }
            Err(e) => Err(ExecutionFailed {
                step: index,
                skill: "-".into(),
                error_type: ErrorType::Planning,
                message: e.to_string(),
            }),
        }
    }

    fn execute(&mut self, _index: usize, ap: &SkillPrimitive, state: &mut ExecState) -> Result<(), ExecutionFailed> {
        let c = ap.component.clone().unwrap_or_default();
        self.plant.contacts = self.contacts_for(ap);
        self.plant.features = self.features_for(ap);
        self.plant.faults.force_sigma = match self.fault(|k| matches!(k, FaultKind::ForceNoise { .. })) {
            Some(FaultKind::ForceNoise { sigma }) => sigma,
            _ => 0.0,
        };
        if ap.name == ApName::FinePos {
            if let Some(FaultKind::FeatureDropout { duration_s }) =
                self.fault(|k| matches!(k, FaultKind::FeatureDropout { .. }))
            {
                self.plant.faults.dropout_remaining_s = duration_s;
            }
        }

        let log = run_skill(ap, &mut self.plant, &self.params, self.clock);
        self.clock = log.end;
        self.buckets.merge(&log.buckets);
        self.ticks.extend(log.ticks.iter().copied());
        self.plant.faults.dropout_remaining_s = 0.0;
        state.robot_pose = self.plant.pose;
        self.carry(state);
        if let Err(e) = &log.outcome {
            return Err(self.failed(ap, ErrorType::SenseAndControl, e.to_string()));
        }

        // a force stop only counts if the contact is really there
        let target = ap.stop.target.first().copied().unwrap_or(0.0);
        if matches!(ap.stop.kind, StopKind::ForceReached | StopKind::ToolDone) && target > 0.0 {
            let axis = to_vector(&ap.hm.contact_axis.unwrap_or([0.0, 0.0, 1.0])).normalize();
            let actual = self.plant.true_wrench().force.dot(&axis);
            if actual < 0.5 * target {
                return Err(self.failed(
                    ap,
                    ErrorType::SenseAndControl,
                    format!("stop condition met at {actual:.2} N actual contact force, {target} N expected"),
                ));
            }
        }

        match ap.name {
            ApName::GetTool => state.held_tool = ap.tool.tool,
            ApName::PutTool => state.held_tool = None,
            ApName::GetObj => self.take_hold(ap, &c, state)?,
            ApName::FinePos => {
                let step = self.step.clone().expect("primitive begun");
                let goal = approach_goal(self.model, state, &step).map_err(|e| {
                    self.failed(ap, ErrorType::Planning, e.to_string())
                })?;
                if let Some(believed) = state.object_poses.get(&c).copied() {
                    let estimate = self.plant.pose * (goal.inverse() * believed);
                    state.object_poses.insert(c.clone(), estimate);
                    state.vision_pose_estimate = Some((c.clone(), estimate));
                }
            }
            ApName::ProcessObj => if let Some(Process::Unscrew | Process::Grasp) = ap.process { self.take_hold(ap, &c, state)? },
            ApName::PutObj => {
                if self.attached.as_deref() == Some(c.as_str()) {
                    self.attached = None;
                }
                state.held_object = None;
                let comp = self.model.component(&c).expect("plan components exist");
                state
                    .object_poses
                    .insert(c.clone(), self.plant.pose * comp.grasp_offset.inverse());
            }
            ApName::RoughPos => {}
        }
        if ap.stop.kind == StopKind::PoseReached {
            state.current_goal = Some(setpoint_to_pose(&ap.stop.target));
        }
        Ok(())
    }
}

impl PlantExecutor<'_> {
    fn take_hold(&mut self, ap: &SkillPrimitive, c: &str, state: &mut ExecState) -> Result<(), ExecutionFailed> {
        if self.fault(|k| *k == FaultKind::ToolSlip).is_some() {
            return Err(self.failed(
                ap,
                ErrorType::Device,
                format!("{c} is not retained by the {}", self.step.as_ref().map_or("tool", |s| s.tool.as_str())),
            ));
        }
        self.attached = Some(c.to_string());
        state.held_object = Some(c.to_string());
        self.carry(state);
        Ok(())
    }
}

/// Actual poses of one repetition: parts with visual features are displaced
/// in the horizontal plane from their modeled poses.
fn perturbed_world(model: &AssemblyModel, radius: f64, rng: &mut ChaCha8Rng) -> BTreeMap<String, Pose> {
    model
        .components
        .iter()
        .map(|comp| {
            let pose = if comp.semantic != Semantic::Base && comp.has_visual_features() && radius > 0.0 {
                let r = radius * rng.gen::<f64>().sqrt();
                let phi = rng.gen::<f64>() * std::f64::consts::TAU;
                Translation3::from(Vector3::new(r * phi.cos(), r * phi.sin(), 0.0)) * comp.pose
            } else {
                comp.pose
            };
            (comp.id.clone(), pose)
        })
        .collect()
}

/// Runs the plan once on a fresh plant. `repetition` counts from 1 and
/// selects both the seed and the faults that apply.
pub fn execute_once(
    plan: &[PlanEntry],
    model: &AssemblyModel,
    dirs: &DirectionSet,
    config: &ExecConfig,
    repetition: usize,
    faults: &[FaultSpec],
) -> RunOutcome {
    let seed = config.repetition_seed(repetition);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = perturbed_world(model, config.localization_error, &mut rng);
    let mut plant = PlantState::new(model.home);
    plant.faults = SensorFaults::new(rng.gen());
    let believed = model.components.iter().map(|c| (c.id.clone(), c.pose)).collect();
    let mut state = ExecState::new(model.home, believed);

    let mut exec = PlantExecutor {
        model,
        dirs,
        params: config.control,
        faults: faults.to_vec(),
        repetition,
        plant,
        clock: 0,
        buckets: Buckets::default(),
        ticks: Vec::new(),
        world,
        attached: None,
        symbolic: SymbolicState::initial(model, dirs),
        step: None,
        step_index: 0,
    };
    let trace = interpret(plan, &mut state, model, &mut exec);
    RunOutcome {
        repetition,
        trace,
        buckets: exec.buckets,
        ticks: exec.ticks,
    }
}
