//! Symbolic task planning: which component to take next, with which
//! primitive and tool, until the target is free.

mod search;
mod state;

pub use search::{plan_disassembly, plan_task, TOOL_CHANGE_PENALTY};
pub use state::{removable, transition, Phase, SymbolicState};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dspace::DirectionSet;
use crate::error::PlanError;
use crate::geometry::{to_vector, Direction};
use crate::model::{AssemblyModel, Tool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpKind {
    Move,
    Twist,
    Put,
    Pull,
}

impl MpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MpKind::Move => "move",
            MpKind::Twist => "twist",
            MpKind::Put => "put",
            MpKind::Pull => "pull",
        }
    }

    /// Role exchanged when a plan is run backwards.
    pub fn inverse(self) -> MpKind {
        match self {
            MpKind::Move => MpKind::Put,
            MpKind::Put => MpKind::Move,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManipulationPrimitive {
    pub kind: MpKind,
    pub component: String,
    pub tool: Tool,
}

impl ManipulationPrimitive {
    pub fn new(kind: MpKind, component: impl Into<String>, tool: Tool) -> Self {
        ManipulationPrimitive {
            kind,
            component: component.into(),
            tool,
        }
    }
}

impl std::fmt::Display for ManipulationPrimitive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({}, {})", self.kind.as_str(), self.tool.as_str(), self.component)
    }
}

/// Linear sequence of manipulation primitives for one phase.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub phase: Phase,
    pub steps: Vec<ManipulationPrimitive>,
    /// Extraction direction (insertion direction, negated, in assembly) per step.
    pub direction_hints: BTreeMap<usize, Direction>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replays the plan from `state`, which must already be in this plan's phase.
    pub fn replay(
        &self,
        state: &SymbolicState,
        model: &AssemblyModel,
        dirs: &DirectionSet,
    ) -> Result<SymbolicState, PlanError> {
        let mut s = state.clone();
        s.phase = self.phase;
        for mp in &self.steps {
            s = transition(&s, mp, model, dirs)?;
        }
        Ok(s)
    }
}

/// Runs a disassembly plan backwards: reversed order, move and put roles
/// exchanged, direction hints negated.
pub fn invert_plan(plan: &Plan) -> Plan {
    let n = plan.steps.len();
    Plan {
        phase: plan.phase.flipped(),
        steps: plan
            .steps
            .iter()
            .rev()
            .map(|mp| ManipulationPrimitive {
                kind: mp.kind.inverse(),
                ..mp.clone()
            })
            .collect(),
        direction_hints: plan
            .direction_hints
            .iter()
            .map(|(i, d)| (n - 1 - i, -*d))
            .collect(),
    }
}

/// Plans for the whole scenario task: the disassembly, followed by its
/// inverse when the task includes reassembly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskPlan {
    pub segments: Vec<Plan>,
}

impl TaskPlan {
    pub fn len(&self) -> usize {
        self.segments.iter().map(Plan::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every step with its phase and direction hint, in execution order.
    pub fn entries(&self) -> Vec<PlanEntry> {
        self.segments
            .iter()
            .flat_map(|p| {
                p.steps.iter().enumerate().map(move |(i, mp)| PlanEntry {
                    kind: mp.kind,
                    component: mp.component.clone(),
                    tool: mp.tool,
                    direction: p.direction_hints.get(&i).map(|d| [d.x, d.y, d.z]),
                    phase: p.phase,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries()).expect("plan entries serialize")
    }

    /// Rebuilds a task plan from its serialized entries.
    pub fn from_entries(entries: &[PlanEntry]) -> TaskPlan {
        let mut segments: Vec<Plan> = Vec::new();
        for e in entries {
            if segments.last().is_none_or(|p| p.phase != e.phase) {
                segments.push(Plan {
                    phase: e.phase,
                    ..Plan::default()
                });
            }
            let p = segments.last_mut().expect("segment pushed above");
            if let Some(d) = e.direction {
                p.direction_hints.insert(p.steps.len(), Direction::new_normalize(to_vector(&d)));
            }
            p.steps.push(ManipulationPrimitive::new(e.kind, e.component.clone(), e.tool));
        }
        TaskPlan { segments }
    }
}

/// Serialized form of one plan step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub kind: MpKind,
    pub component: String,
    pub tool: Tool,
    pub direction: Option<[f64; 3]>,
    pub phase: Phase,
}
