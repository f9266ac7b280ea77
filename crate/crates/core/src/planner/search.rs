//! Greedy disassembly sequencing.
//!
//! The planner repeatedly collects the components that can be acted on and
//! that lie on a dependency path to the target, then takes the nearest one,
//! where switching tools costs a fixed travel-equivalent penalty.

use std::collections::BTreeSet;

use nalgebra::Vector3;

use super::state::{loosened_relations, pick_direction, space_of};
use super::{invert_plan, ManipulationPrimitive, MpKind, Plan, SymbolicState, TaskPlan};
use crate::dspace::{DirectionSet, SdofValue};
use crate::error::PlanError;
use crate::model::{AssemblyModel, Semantic, TaskMode, Tool};

/// Tool changes cost as much as this much travel (meters).
pub const TOOL_CHANGE_PENALTY: f64 = 0.5;

/// Neighbor sets larger than this are not searched exhaustively for blockers.
const MAX_SUBSET_NEIGHBORS: usize = 12;

struct Ctx<'a> {
    model: &'a AssemblyModel,
    dirs: &'a DirectionSet,
}

impl Ctx<'_> {
    fn is_base(&self, c: &str) -> bool {
        self.model
            .component(c)
            .map(|comp| comp.semantic == Semantic::Base)
            .unwrap_or(false)
    }

    /// `c` can be taken out right now (unscrewing first if it is screwed in).
    fn actionable(&self, state: &SymbolicState, c: &str) -> bool {
        if self.is_base(c) || !state.is_present(c) {
            return false;
        }
        let rels = loosened_relations(state, self.model, c);
        !space_of(&rels, c, self.dirs).0.is_empty_space()
    }

    fn neighbors(&self, state: &SymbolicState, c: &str) -> Vec<String> {
        let set: BTreeSet<String> = state
            .live_relations(self.model)
            .iter()
            .filter_map(|r| r.partner(c).map(str::to_string))
            .filter(|p| !self.is_base(p))
            .collect();
        set.into_iter().collect()
    }

    /// Whether `c` becomes actionable once `gone` are removed.
    fn freed_by(&self, state: &SymbolicState, c: &str, gone: &[&String]) -> bool {
        let mut s = state.clone();
        s.removed.extend(gone.iter().map(|g| (*g).clone()));
        self.actionable(&s, c)
    }

    /// Components that can be acted on now and lead towards freeing `c`.
    /// `None` when no sequence of removals frees it.
    fn frontier(
        &self,
        state: &SymbolicState,
        c: &str,
        path: &mut BTreeSet<String>,
    ) -> Option<BTreeSet<String>> {
        if self.actionable(state, c) {
            return Some(BTreeSet::from([c.to_string()]));
        }
        if self.is_base(c) || !path.insert(c.to_string()) {
            return None;
        }
        let neighbors = self.neighbors(state, c);
        let k = neighbors.len().min(MAX_SUBSET_NEIGHBORS);
        let mut subsets: Vec<Vec<&String>> = (1u32..(1 << k))
            .map(|bits| {
                (0..k)
                    .filter(|i| bits & (1 << i) != 0)
                    .map(|i| &neighbors[i])
                    .collect()
            })
            .collect();
        // smallest blocker sets first, then lexicographic by bitmask order
        subsets.sort_by_key(|s| s.len());
        let mut result = None;
        for subset in subsets {
            if !self.freed_by(state, c, &subset) {
                continue;
            }
            let mut acc = BTreeSet::new();
            let mut ok = true;
            for b in &subset {
                match self.frontier(state, b, path) {
                    Some(f) => acc.extend(f),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                result = Some(acc);
                break;
            }
        }
        path.remove(c);
        result
    }

    fn location(&self, c: &str) -> Vector3<f64> {
        let comp = self.model.component(c).expect("planned component exists");
        comp.put_pose.unwrap_or(comp.pose).translation.vector
    }
}

/// Primitives that take `c` out in the current state, with the direction
/// hint for the extracting step.
fn extraction_steps(
    ctx: &Ctx<'_>,
    state: &SymbolicState,
    c: &str,
    tool: Tool,
) -> (Vec<ManipulationPrimitive>, Option<crate::geometry::Direction>) {
    let screws = state.screw_relations(ctx.model, c);
    let rels = loosened_relations(state, ctx.model, c);
    let (space, preds) = space_of(&rels, c, ctx.dirs);
    if let Some(&i) = screws.first() {
        let axis = ctx.model.relations[i].geometry.direction;
        let dir = pick_direction(&space, &preds, Some(axis));
        return (vec![ManipulationPrimitive::new(MpKind::Twist, c, tool)], dir);
    }
    let dir = pick_direction(&space, &preds, None);
    let kind = match state.sdof.get(c) {
        Some(l) if l.value == SdofValue::Fits => MpKind::Pull,
        _ => MpKind::Move,
    };
    (
        vec![
            ManipulationPrimitive::new(kind, c, tool),
            ManipulationPrimitive::new(MpKind::Put, c, tool),
        ],
        dir,
    )
}

/// Plans the disassembly that frees the model's target. An absent target
/// yields an empty plan.
pub fn plan_disassembly(model: &AssemblyModel, dirs: &DirectionSet) -> Result<Plan, PlanError> {
    let mut plan = Plan::default();
    let Some(target) = model.target.as_deref() else {
        return Ok(plan);
    };
    if !model.contains(target) {
        return Err(PlanError::UnknownComponent(target.to_string()));
    }
    let ctx = Ctx { model, dirs };
    let mut state = SymbolicState::initial(model, dirs);
    let mut position = model.home.translation.vector;
    let mut tool: Option<Tool> = None;

    while state.is_present(target) {
        let frontier = ctx
            .frontier(&state, target, &mut BTreeSet::new())
            .ok_or_else(|| PlanError::PlanInfeasible {
                target: target.to_string(),
                blocking: state
                    .live_relations(model)
                    .iter()
                    .filter(|r| r.involves(target))
                    .map(|r| r.describe())
                    .collect(),
            })?;

        let mut best: Option<(f64, &String, Tool)> = None;
        for c in &frontier {
            let t = model
                .tool_for(c)
                .map_err(|_| PlanError::UnknownComponent(c.clone()))?;
            let penalty = match tool {
                Some(held) if held != t => TOOL_CHANGE_PENALTY,
                _ => 0.0,
            };
            let comp_pos = model.component(c).expect("frontier ids exist").pose.translation.vector;
            let cost = (comp_pos - position).norm() + penalty;
            if best.is_none_or(|(bc, _, _)| cost < bc) {
                best = Some((cost, c, t));
            }
        }
        let (_, c, t) = best.expect("frontier is never empty");
        let (steps, dir) = extraction_steps(&ctx, &state, c, t);
        if let Some(d) = dir {
            plan.direction_hints.insert(plan.steps.len(), d);
        }
        for mp in steps {
            state = super::transition(&state, &mp, model, dirs)?;
            plan.steps.push(mp);
        }
        position = ctx.location(c);
        tool = Some(t);
    }
    Ok(plan)
}

/// Plan for the scenario's task: the disassembly, then its inverse when
/// the task asks for reassembly.
pub fn plan_task(model: &AssemblyModel, dirs: &DirectionSet) -> Result<TaskPlan, PlanError> {
    let dis = plan_disassembly(model, dirs)?;
    let mut segments = Vec::new();
    if !dis.is_empty() {
        let assembly = (model.task == TaskMode::DisassemblyAssembly).then(|| invert_plan(&dis));
        segments.push(dis);
        segments.extend(assembly);
    }
    Ok(TaskPlan { segments })
}
