use std::path::Path;

use serde::{Deserialize, Serialize};

/// What goes wrong.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultKind {
    /// The tool fails to retain the component it should take hold of.
    ToolSlip,
    /// Gaussian noise on the force readings (N).
    ForceNoise { sigma: f64 },
    /// The camera loses all features when fine positioning starts (s).
    FeatureDropout { duration_s: f64 },
}

/// A fault injected into one repetition while one manipulation primitive runs.
///
/// `repetition` and `step` count from 1. A fault on a step that never takes
/// hold of a component, senses force or servos visually has no effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub repetition: usize,
    pub step: usize,
    #[serde(flatten)]
    pub kind: FaultKind,
}

impl FaultSpec {
    pub fn applies(&self, repetition: usize, step_index: usize) -> bool {
        self.repetition == repetition && self.step == step_index + 1
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FaultFileError {
    #[error("cannot read fault file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid fault file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid fault: {0}")]
    Invalid(String),
}

/// Parses a JSON array of fault specs.
pub fn parse_faults(text: &str) -> Result<Vec<FaultSpec>, FaultFileError> {
    let faults: Vec<FaultSpec> = serde_json::from_str(text)?;
    for f in &faults {
        if f.repetition == 0 || f.step == 0 {
            return Err(FaultFileError::Invalid("repetition and step count from 1".into()));
        }
        match f.kind {
            FaultKind::ForceNoise { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
                return Err(FaultFileError::Invalid(format!("sigma must be positive, got {sigma}")))
            }
            FaultKind::FeatureDropout { duration_s } if !(duration_s.is_finite() && duration_s > 0.0) => {
                return Err(FaultFileError::Invalid(format!(
                    "duration_s must be positive, got {duration_s}"
                )))
            }
            _ => {}
        }
    }
    Ok(faults)
}

pub fn load_faults(path: impl AsRef<Path>) -> Result<Vec<FaultSpec>, FaultFileError> {
    parse_faults(&std::fs::read_to_string(path)?)
}
