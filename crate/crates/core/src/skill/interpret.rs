use super::grammar::{fill_direction_hints, Expansion};
use super::types::{ExecState, SkillPrimitive};
use crate::error::{ErrorType, ExecutionFailed};
use crate::model::AssemblyModel;
use crate::planner::PlanEntry;

/// Runs skill primitives and reports the resulting state.
pub trait Executor {
    /// Called before a manipulation primitive is expanded.
    fn begin_primitive(
        &mut self,
        _index: usize,
        _step: &PlanEntry,
        _state: &ExecState,
    ) -> Result<(), ExecutionFailed> {
        Ok(())
    }

    /// Executes `ap` and writes the observed robot and object state back.
    fn execute(
        &mut self,
        index: usize,
        ap: &SkillPrimitive,
        state: &mut ExecState,
    ) -> Result<(), ExecutionFailed>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub ap: SkillPrimitive,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecTrace {
    pub entries: Vec<TraceEntry>,
    pub failure: Option<ExecutionFailed>,
}

impl ExecTrace {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Walks the plan, expanding each manipulation primitive against the state
/// observed after every executed skill primitive. Stops at the first
/// failure.
pub fn interpret(
    plan: &[PlanEntry],
    state: &mut ExecState,
    model: &AssemblyModel,
    executor: &mut dyn Executor,
) -> ExecTrace {
    let plan = fill_direction_hints(plan);
    let mut trace = ExecTrace::default();
    for (i, step) in plan.iter().enumerate() {
        if let Err(f) = executor.begin_primitive(i, step, state) {
            trace.failure = Some(f);
            return trace;
        }
        let mut exp = Expansion::new(model, step, plan.get(i + 1));
        loop {
            let emitted = match exp.next_ap(state) {
                Ok(Some(e)) => e,
                Ok(None) => break,
                Err(e) => {
                    trace.failure = Some(ExecutionFailed {
                        step: i,
                        skill: "-".into(),
                        error_type: ErrorType::Planning,
                        message: e.to_string(),
                    });
                    return trace;
                }
            };
            trace.entries.push(TraceEntry {
                step: i,
                ap: emitted.ap.clone(),
            });
            if let Err(f) = executor.execute(i, &emitted.ap, state) {
                trace.failure = Some(f);
                return trace;
            }
        }
    }
    trace
}
