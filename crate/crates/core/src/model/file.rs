//! Scenario file format (JSON, `format_version` 1).
//!
//! Feature geometries are written in the frame of the relation's first
//! component and transformed to the world frame on load.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Point3, Unit};
use serde::{Deserialize, Serialize};

use super::{
    default_tool_map, AssemblyModel, Component, FeatureGeometry, FeatureKind, Semantic, Ssr,
    SsrKind, TaskMode, Tool,
};
use crate::error::ModelError;
use crate::geometry::{from_vector, to_vector, vec_norm, PoseDoc, UNIT_TOLERANCE};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub format_version: u32,
    pub components: Vec<ComponentDoc>,
    pub relations: Vec<RelationDoc>,
    pub tool_stations: BTreeMap<Tool, PoseDoc>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tool_map: BTreeMap<Semantic, Tool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home: Option<PoseDoc>,
    #[serde(default)]
    pub task: TaskMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub id: String,
    pub semantic: Semantic,
    pub pose: PoseDoc,
    #[serde(default = "default_grasp")]
    pub grasp_offset: PoseDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub visual_features: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub put_pose: Option<PoseDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub kind: SsrKind,
    pub components: [String; 2],
    pub geometry: GeometryDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    pub kind: FeatureKind,
    pub frame: PoseDoc,
    pub direction: [f64; 3],
}

/// Approach from above: grasp z-axis pointing down the world z-axis.
fn default_grasp() -> PoseDoc {
    PoseDoc {
        position: [0.0, 0.0, 0.0],
        orientation: [0.0, 1.0, 0.0, 0.0],
    }
}

fn default_home() -> PoseDoc {
    PoseDoc {
        position: [0.4, 0.0, 0.5],
        orientation: [0.0, 1.0, 0.0, 0.0],
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AssemblyModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<AssemblyModel, ModelError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let model = doc.into_model()?;
    model.validate()?;
    Ok(model)
}

/// Serializes a model back to scenario JSON (pretty-printed).
pub fn write_model(model: &AssemblyModel) -> String {
    let doc = ScenarioDoc::from_model(model);
    serde_json::to_string_pretty(&doc).expect("scenario documents always serialize")
}

fn check_pose(entity: &str, field: &str, pose: &PoseDoc) -> Result<(), ModelError> {
    let n = pose.quaternion_norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(ModelError::validation(
            entity,
            format!("{field} quaternion has norm {n}, expected 1"),
        ));
    }
    if pose.position.iter().chain(pose.orientation.iter()).any(|v| !v.is_finite()) {
        return Err(ModelError::validation(entity, format!("{field} is not finite")));
    }
    Ok(())
}

impl ScenarioDoc {
    pub fn into_model(self) -> Result<AssemblyModel, ModelError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ModelError::validation(
                "format_version",
                format!(
                    "unsupported version {} (expected {FORMAT_VERSION})",
                    self.format_version
                ),
            ));
        }
        let mut components = Vec::with_capacity(self.components.len());
        for c in self.components {
            check_pose(&c.id, "pose", &c.pose)?;
            check_pose(&c.id, "grasp_offset", &c.grasp_offset)?;
            if let Some(p) = &c.put_pose {
                check_pose(&c.id, "put_pose", p)?;
            }
            components.push(Component {
                pose: c.pose.to_pose(),
                grasp_offset: c.grasp_offset.to_pose(),
                visual_features: c
                    .visual_features
                    .iter()
                    .map(|p| Point3::new(p[0], p[1], p[2]))
                    .collect(),
                put_pose: c.put_pose.map(|p| p.to_pose()),
                id: c.id,
                semantic: c.semantic,
            });
        }

        let mut relations = Vec::with_capacity(self.relations.len());
        for r in self.relations {
            let [a, b] = r.components;
            let label = format!("{}({a}, {b})", r.kind.as_str());
            let owner = components.iter().find(|c| c.id == a).ok_or_else(|| {
                ModelError::validation(&a, format!("relation {label} references unknown component `{a}`"))
            })?;
            if !components.iter().any(|c| c.id == b) {
                return Err(ModelError::validation(
                    &b,
                    format!("relation {label} references unknown component `{b}`"),
                ));
            }
            check_pose(&label, "geometry.frame", &r.geometry.frame)?;
            let n = vec_norm(&r.geometry.direction);
            if (n - 1.0).abs() > UNIT_TOLERANCE {
                return Err(ModelError::validation(
                    &label,
                    format!("geometry.direction has norm {n}, expected 1"),
                ));
            }
            let frame = owner.pose * r.geometry.frame.to_pose();
            let dir = owner.pose.rotation * to_vector(&r.geometry.direction);
            let direction = Unit::new_normalize(dir);
            relations.push(Ssr {
                kind: r.kind,
                components: (a, b),
                geometry: FeatureGeometry {
                    kind: r.geometry.kind,
                    frame,
                    direction,
                },
                feature_vector: direction.into_inner(),
            });
        }

        let mut tool_stations = BTreeMap::new();
        for (tool, pose) in &self.tool_stations {
            check_pose(tool.as_str(), "tool station", pose)?;
            tool_stations.insert(*tool, pose.to_pose());
        }
        let mut tool_map = default_tool_map();
        tool_map.extend(self.tool_map);
        let home = self.home.unwrap_or_else(default_home);
        check_pose("home", "home", &home)?;

        Ok(AssemblyModel {
            components,
            relations,
            tool_stations,
            target: self.target,
            tool_map,
            home: home.to_pose(),
            task: self.task,
        })
    }

    pub fn from_model(model: &AssemblyModel) -> Self {
        let defaults = default_tool_map();
        let components = model
            .components
            .iter()
            .map(|c| ComponentDoc {
                id: c.id.clone(),
                semantic: c.semantic,
                pose: PoseDoc::from(&c.pose),
                grasp_offset: PoseDoc::from(&c.grasp_offset),
                visual_features: c.visual_features.iter().map(|p| [p.x, p.y, p.z]).collect(),
                put_pose: c.put_pose.as_ref().map(PoseDoc::from),
            })
            .collect();
        let relations = model
            .relations
            .iter()
            .map(|r| {
                let owner = model
                    .component(&r.components.0)
                    .expect("validated model references known components");
                let inv = owner.pose.inverse();
                GeometryDoc {
                    kind: r.geometry.kind,
                    frame: PoseDoc::from(&(inv * r.geometry.frame)),
                    direction: from_vector(&(inv.rotation * r.geometry.direction.into_inner())),
                }
                .into_relation(r)
            })
            .collect();
        ScenarioDoc {
            format_version: FORMAT_VERSION,
            components,
            relations,
            tool_stations: model
                .tool_stations
                .iter()
                .map(|(t, p)| (*t, PoseDoc::from(p)))
                .collect(),
            target: model.target.clone(),
            tool_map: model
                .tool_map
                .iter()
                .filter(|(s, t)| defaults.get(*s) != Some(*t))
                .map(|(s, t)| (*s, *t))
                .collect(),
            home: Some(PoseDoc::from(&model.home)),
            task: model.task,
        }
    }
}

impl GeometryDoc {
    fn into_relation(self, r: &Ssr) -> RelationDoc {
        RelationDoc {
            kind: r.kind,
            components: [r.components.0.clone(), r.components.1.clone()],
            geometry: self,
        }
    }
}
