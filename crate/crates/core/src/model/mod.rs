//! Relational assembly model: components, symbolic spatial relations (SSRs)
//! on feature geometries, tool stations and storage poses.

mod file;

pub use file::{load_model, parse_model, write_model, ScenarioDoc, FORMAT_VERSION};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::{Direction, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Plane,
    Line,
    Point,
    Cylinder,
}

/// Geometric carrier of a contact. `direction` is the plane normal pointing
/// out of the mating part, or the line/cylinder axis. World frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGeometry {
    pub kind: FeatureKind,
    pub frame: Pose,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsrKind {
    Concentric,
    Congruent,
    Screwed,
    PlaneContact,
}

impl SsrKind {
    pub fn accepts(self, feature: FeatureKind) -> bool {
        match self {
            SsrKind::Screwed | SsrKind::Concentric => {
                matches!(feature, FeatureKind::Cylinder | FeatureKind::Line)
            }
            SsrKind::Congruent | SsrKind::PlaneContact => feature == FeatureKind::Plane,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SsrKind::Concentric => "concentric",
            SsrKind::Congruent => "congruent",
            SsrKind::Screwed => "screwed",
            SsrKind::PlaneContact => "plane_contact",
        }
    }
}

/// A symbolic spatial relation between an ordered pair of components.
///
/// For planar relations the feature direction is the direction in which the
/// first component may leave the second; the second component sees the
/// antipodal half-space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ssr {
    pub kind: SsrKind,
    pub components: (String, String),
    pub geometry: FeatureGeometry,
    /// Direction of the relation in the world frame (f_SSR).
    pub feature_vector: Vector3<f64>,
}

impl Ssr {
    pub fn involves(&self, id: &str) -> bool {
        self.components.0 == id || self.components.1 == id
    }

    /// The other component of the pair, if `id` takes part in this relation.
    pub fn partner(&self, id: &str) -> Option<&str> {
        if self.components.0 == id {
            Some(&self.components.1)
        } else if self.components.1 == id {
            Some(&self.components.0)
        } else {
            None
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{}({}, {})",
            self.kind.as_str(),
            self.components.0,
            self.components.1
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantic {
    Screw,
    Hose,
    Cover,
    Plug,
    GenericGraspable,
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tool {
    Gripper,
    Screwdriver,
}

impl Tool {
    pub fn as_str(self) -> &'static str {
        match self {
            Tool::Gripper => "gripper",
            Tool::Screwdriver => "screwdriver",
        }
    }
}

/// Whether a scenario asks only for disassembly or for disassembly followed
/// by the inverse assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    Disassembly,
    #[default]
    DisassemblyAssembly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub semantic: Semantic,
    pub pose: Pose,
    /// Grasp (tool center point) pose relative to the component frame. Its
    /// z-axis is the approach direction.
    pub grasp_offset: Pose,
    /// Point features in the component frame, used for visual servoing.
    pub visual_features: Vec<Point3<f64>>,
    /// Predefined storage pose of the component.
    pub put_pose: Option<Pose>,
}

impl Component {
    pub fn grasp_pose(&self) -> Pose {
        self.pose * self.grasp_offset
    }

    pub fn has_visual_features(&self) -> bool {
        self.visual_features.len() >= 3
    }
}

pub fn default_tool_map() -> BTreeMap<Semantic, Tool> {
    use Semantic::*;
    [
        (Screw, Tool::Screwdriver),
        (Hose, Tool::Gripper),
        (Cover, Tool::Gripper),
        (Plug, Tool::Gripper),
        (GenericGraspable, Tool::Gripper),
        (Base, Tool::Gripper),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyModel {
    pub components: Vec<Component>,
    pub relations: Vec<Ssr>,
    pub tool_stations: BTreeMap<Tool, Pose>,
    pub target: Option<String>,
    /// Semantic to tool inference map; scenario entries override the defaults.
    pub tool_map: BTreeMap<Semantic, Tool>,
    pub home: Pose,
    pub task: TaskMode,
}

impl AssemblyModel {
    pub fn component(&self, id: &str) -> Result<&Component, ModelError> {
        self.components
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| ModelError::UnknownComponent(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.components.iter().any(|c| c.id == id)
    }

    pub fn base_id(&self) -> Option<&str> {
        self.components
            .iter()
            .find(|c| c.semantic == Semantic::Base)
            .map(|c| c.id.as_str())
    }

    pub fn tool_for(&self, id: &str) -> Result<Tool, ModelError> {
        let semantic = self.component(id)?.semantic;
        Ok(self.tool_map.get(&semantic).copied().unwrap_or(Tool::Gripper))
    }

    /// Checks every model invariant; names the offending entity on failure.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        for c in &self.components {
            if !ids.insert(c.id.as_str()) {
                return Err(ModelError::validation(&c.id, "duplicate component id"));
            }
            if !c.visual_features.is_empty() && !non_collinear(&c.visual_features) {
                return Err(ModelError::validation(
                    &c.id,
                    "visual_features need at least 3 non-collinear points",
                ));
            }
        }
        let bases = self
            .components
            .iter()
            .filter(|c| c.semantic == Semantic::Base)
            .count();
        if bases != 1 {
            return Err(ModelError::validation(
                "components",
                format!("exactly one base component required, found {bases}"),
            ));
        }
        for r in &self.relations {
            for id in [&r.components.0, &r.components.1] {
                if !ids.contains(id.as_str()) {
                    return Err(ModelError::validation(
                        id,
                        format!("relation {} references unknown component `{id}`", r.describe()),
                    ));
                }
            }
            if r.components.0 == r.components.1 {
                return Err(ModelError::validation(
                    r.describe(),
                    "relation must join two distinct components",
                ));
            }
            if !r.kind.accepts(r.geometry.kind) {
                return Err(ModelError::validation(
                    r.describe(),
                    format!("feature geometry {:?} incompatible with relation kind", r.geometry.kind),
                ));
            }
        }
        if let Some(t) = &self.target {
            if !ids.contains(t.as_str()) {
                return Err(ModelError::validation(t, "target references unknown component"));
            }
        }
        if !self.is_connected() {
            return Err(ModelError::validation(
                "relations",
                "relation graph is not connected",
            ));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let Some(first) = self.components.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([first.id.as_str()]);
        let mut queue = VecDeque::from([first.id.as_str()]);
        while let Some(id) = queue.pop_front() {
            for r in &self.relations {
                if let Some(p) = r.partner(id) {
                    if seen.insert(p) {
                        queue.push_back(p);
                    }
                }
            }
        }
        seen.len() == self.components.len()
    }
}

fn non_collinear(points: &[Point3<f64>]) -> bool {
    if points.len() < 3 {
        return false;
    }
    let p0 = points[0];
    points.iter().enumerate().skip(1).any(|(i, a)| {
        points.iter().skip(i + 1).any(|b| {
            let area = (a - p0).cross(&(b - p0)).norm();
            area > 1e-12
        })
    })
}

/// All relations incident to `c`, in file order.
pub fn contacts_of<'m>(model: &'m AssemblyModel, c: &str) -> Result<Vec<&'m Ssr>, ModelError> {
    if !model.contains(c) {
        return Err(ModelError::UnknownComponent(c.to_string()));
    }
    Ok(model.relations.iter().filter(|r| r.involves(c)).collect())
}
