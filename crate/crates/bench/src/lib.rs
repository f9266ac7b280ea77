//! Shared fixtures for the benchmarks in `benches/`.

use std::path::{Path, PathBuf};

use dismantle_core::dspace::{sample_sphere, DirectionSet};
use dismantle_core::model::load_model;
use dismantle_core::planner::{plan_task, PlanEntry};
use dismantle_core::skill::ExecState;
use dismantle_core::AssemblyModel;

pub fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// A bundled scenario with its direction sample and task plan.
pub struct Fixture {
    pub model: AssemblyModel,
    pub dirs: DirectionSet,
    pub plan: Vec<PlanEntry>,
}

impl Fixture {
    pub fn load(name: &str, samples: usize) -> Fixture {
        let model = load_model(scenario_path(name)).expect("bundled scenario loads");
        let dirs = sample_sphere(samples, 0);
        let plan = plan_task(&model, &dirs).expect("bundled scenario is feasible").entries();
        Fixture { model, dirs, plan }
    }

    /// Belief state at the start of execution: every component where the
    /// scenario puts it, robot at home.
    pub fn nominal_state(&self) -> ExecState {
        let poses = self.model.components.iter().map(|c| (c.id.clone(), c.pose)).collect();
        ExecState::new(self.model.home, poses)
    }
}
