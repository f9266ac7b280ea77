use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{pose_distance, Pose};
use crate::model::Tool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskFrame {
    World,
    Tcp,
    /// Frame of the held tool, with z along the contact axis.
    Tool,
    Rgbd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisMode {
    Pos,
    Ftc,
    Vsc,
}

/// Per-axis control assignment and setpoints in a task frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridMove {
    pub task_frame: TaskFrame,
    pub control: Vec<AxisMode>,
    pub setpoint: Vec<f64>,
    /// World direction of the task-frame z-axis for force-controlled moves.
    pub contact_axis: Option<[f64; 3]>,
}

impl HybridMove {
    pub fn is_valid(&self) -> bool {
        let vsc = self.control.contains(&AxisMode::Vsc);
        let ftc = self.control.contains(&AxisMode::Ftc);
        self.control.len() == self.setpoint.len()
            && (!vsc || self.task_frame == TaskFrame::Rgbd)
            && (!ftc || self.contact_axis.is_some())
    }

    pub fn uses(&self, mode: AxisMode) -> bool {
        self.control.contains(&mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolCmd {
    Open,
    Close,
    SpinCw,
    SpinCcw,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToolCommand {
    /// `None` is the "no tool" entry.
    pub tool: Option<Tool>,
    pub cmd: ToolCmd,
}

impl ToolCommand {
    pub const IDLE: ToolCommand = ToolCommand {
        tool: None,
        cmd: ToolCmd::Idle,
    };

    pub fn is_valid(&self) -> bool {
        self.tool.is_some() || self.cmd == ToolCmd::Idle
    }

    /// Open and close are discrete actuations that take fixed time.
    pub fn is_actuation(&self) -> bool {
        matches!(self.cmd, ToolCmd::Open | ToolCmd::Close)
    }

    pub fn is_spin(&self) -> bool {
        matches!(self.cmd, ToolCmd::SpinCw | ToolCmd::SpinCcw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    PoseReached,
    FeatureReached,
    ForceReached,
    ToolDone,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    pub kind: StopKind,
    /// Goal pose setpoint, goal features, or force along the contact axis.
    pub target: Vec<f64>,
    pub tolerance: f64,
    pub timeout_s: f64,
}

impl StopCondition {
    pub fn is_valid(&self) -> bool {
        self.tolerance > 0.0 && self.timeout_s > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ApName {
    GetTool,
    PutTool,
    GetObj,
    PutObj,
    RoughPos,
    FinePos,
    ProcessObj,
}

impl ApName {
    pub fn as_str(self) -> &'static str {
        match self {
            ApName::GetTool => "getTool",
            ApName::PutTool => "putTool",
            ApName::GetObj => "getObj",
            ApName::PutObj => "putObj",
            ApName::RoughPos => "roughPos",
            ApName::FinePos => "finePos",
            ApName::ProcessObj => "processObj",
        }
    }
}

impl std::fmt::Display for ApName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Process steps available to `processObj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Unscrew,
    Tighten,
    Grasp,
    Pull,
    Place,
    Insert,
}

/// Executable skill primitive `<HM, tool, stop>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillPrimitive {
    pub name: ApName,
    pub component: Option<String>,
    pub process: Option<Process>,
    pub hm: HybridMove,
    pub tool: ToolCommand,
    pub stop: StopCondition,
}

impl SkillPrimitive {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("skill primitives serialize")
    }
}

/// Robot and object state maintained by the interpreter between skill
/// primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecState {
    pub held_tool: Option<Tool>,
    pub held_object: Option<String>,
    pub robot_pose: Pose,
    /// Latest camera-based pose estimate and the component it belongs to.
    pub vision_pose_estimate: Option<(String, Pose)>,
    /// Believed object poses.
    pub object_poses: BTreeMap<String, Pose>,
    pub current_goal: Option<Pose>,
}

impl ExecState {
    pub fn new(robot_pose: Pose, object_poses: BTreeMap<String, Pose>) -> ExecState {
        ExecState {
            held_tool: None,
            held_object: None,
            robot_pose,
            vision_pose_estimate: None,
            object_poses,
            current_goal: None,
        }
    }

    /// An object can only be carried by a mounted tool (gripper jaws or a
    /// screwdriver bit).
    pub fn is_consistent(&self) -> bool {
        self.held_object.is_none() || self.held_tool.is_some()
    }

    pub fn at(&self, goal: &Pose, tol_pos: f64, tol_rot: f64) -> bool {
        let (dp, dr) = pose_distance(&self.robot_pose, goal);
        dp <= tol_pos && dr <= tol_rot
    }
}
