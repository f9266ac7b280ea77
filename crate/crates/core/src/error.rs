use thiserror::Error;

/// Errors raised while loading or validating a scenario file.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error in {entity}: {message}")]
    Validation { entity: String, message: String },
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ModelError {
    pub(crate) fn validation(entity: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Validation {
            entity: entity.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("degenerate disassembly space{}: {members} member directions match no sdof rule", pair_suffix(.pair))]
    DegenerateSpace {
        pair: Option<(String, String)>,
        members: usize,
    },
}

fn pair_suffix(pair: &Option<(String, String)>) -> String {
    match pair {
        Some((a, b)) => format!(" for ({a}, {b})"),
        None => String::new(),
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("primitive {primitive} is not applicable: {reason}")]
    InapplicablePrimitive { primitive: String, reason: String },
    #[error("plan infeasible: target `{target}` never becomes removable; blocking relations: {}", .blocking.join(", "))]
    PlanInfeasible {
        target: String,
        blocking: Vec<String>,
    },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("no goal source for {slot} of `{component}`: {reason}")]
    UnresolvableGoal {
        slot: String,
        component: String,
        reason: String,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("feature jacobian is singular (rank-deficient feature set)")]
    SingularJacobian,
    #[error("stop condition not satisfied within {0} s")]
    Timeout(f64),
    #[error("image features lost for {0} s")]
    FeaturesLost(f64),
}

/// Failure classes of an execution attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    Planning,
    SenseAndControl,
    Device,
}

impl ErrorType {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::Planning => "planning",
            ErrorType::SenseAndControl => "sense_and_control",
            ErrorType::Device => "device",
        }
    }
}

impl std::fmt::Display for ErrorType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A classified failure that stopped plan execution.
#[derive(Debug, Error, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[error("execution failed at primitive {step} ({skill}): {error_type} error: {message}")]
pub struct ExecutionFailed {
    /// Index of the manipulation primitive in the plan.
    pub step: usize,
    /// Skill primitive that failed, or `-` when the failure precedes expansion.
    pub skill: String,
    pub error_type: ErrorType,
    pub message: String,
}
