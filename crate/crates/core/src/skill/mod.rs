//! Runtime decomposition of manipulation primitives into skill primitives.

mod grammar;
mod interpret;
mod rules;
mod types;

pub use grammar::{
    apply_nominal, approach_goal, decompose, decompose_plan, decompose_with, desired_features,
    fill_direction_hints, Emitted, Expansion, AP_TIMEOUT_S, FORCE_TOL_REL, F_CONTACT, F_PROCESS,
    F_PULL, PRE_OFFSET, PULL_RELEASE_TOL, PULL_TRAVEL, RELEASE_LIFT, STANDOFF,
};
pub use interpret::{interpret, ExecTrace, Executor, TraceEntry};
pub use rules::{
    expected_feature_residual, rule_fine_pos, rule_get_obj, rule_get_tool, rule_put_obj,
    rule_put_tool, rule_rough_pos, rule_set, TOL_FEAT, TOL_POS, TOL_ROT,
};
pub use types::{
    ApName, AxisMode, ExecState, HybridMove, Process, SkillPrimitive, StopCondition, StopKind,
    TaskFrame, ToolCmd, ToolCommand,
};
