//! Symbolic degrees of freedom and the relational graph G_sdof.
//!
//! Classification rules (translational mask only; rotation is symbolic):
//! - empty mask: `fix`, or `rot` when a concentric relation leaves the
//!   rotation free and nothing is screwed
//! - full mask: `free`
//! - members confined to one cone cap of half-angle `EPS_CONE`: `fits(axis)`
//! - members confined to two antipodal caps: `lin(axis)`
//! - otherwise, measure at least `AGPP_MIN_FRACTION` of the sphere: `agpp`
//! - anything else is a `DegenerateSpace` error

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::space::{relative_space, EPS_CONE};
use super::DirectionSet;
use crate::error::SpaceError;
use crate::geometry::Direction;
use crate::model::{AssemblyModel, Ssr, SsrKind};

/// Single-cap versus half-space separation, as a fraction of the sphere.
pub const AGPP_MIN_FRACTION: f64 = 0.05;
/// Extra angle allowed around the estimated cap axis.
const CAP_SLACK: f64 = 1.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdofValue {
    Fix,
    Lin,
    Rot,
    Fits,
    Agpp,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdofLabel {
    pub value: SdofValue,
    /// Present iff `value` is `lin`, `rot` or `fits`.
    pub axis: Option<Direction>,
    /// Symbolic rotational freedom attached by screwed or concentric relations.
    pub rotation: Option<Direction>,
}

impl SdofLabel {
    pub fn new(value: SdofValue) -> Self {
        SdofLabel {
            value,
            axis: None,
            rotation: None,
        }
    }

    pub fn with_axis(value: SdofValue, axis: Direction) -> Self {
        SdofLabel {
            value,
            axis: Some(axis),
            rotation: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        let needs_axis = matches!(self.value, SdofValue::Lin | SdofValue::Rot | SdofValue::Fits);
        needs_axis == self.axis.is_some()
    }
}

impl std::fmt::Display for SdofLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.value {
            SdofValue::Fix => "fix",
            SdofValue::Lin => "lin",
            SdofValue::Rot => "rot",
            SdofValue::Fits => "fits",
            SdofValue::Agpp => "agpp",
            SdofValue::Free => "free",
        };
        write!(f, "{name}")?;
        if let Some(a) = self.axis {
            write!(f, "({:.3}, {:.3}, {:.3})", a.x, a.y, a.z)?;
        }
        if self.rotation.is_some() && self.value != SdofValue::Rot {
            write!(f, "+rot")?;
        }
        Ok(())
    }
}

fn rotation_axis(contacts: &[&Ssr]) -> Option<Direction> {
    contacts
        .iter()
        .find(|r| matches!(r.kind, SsrKind::Screwed | SsrKind::Concentric))
        .map(|r| r.geometry.direction)
}

/// Labels a disassembly space. `contacts` are the relations it was built from.
pub fn classify_sdof(space: &DirectionSet, contacts: &[&Ssr]) -> Result<SdofLabel, SpaceError> {
    let rotation = rotation_axis(contacts);
    let members = space.members();
    if members.is_empty() {
        let screwed = contacts.iter().any(|r| r.kind == SsrKind::Screwed);
        return Ok(match (rotation, screwed) {
            (Some(axis), false) => SdofLabel::with_axis(SdofValue::Rot, axis),
            _ => SdofLabel {
                rotation,
                ..SdofLabel::new(SdofValue::Fix)
            },
        });
    }
    if members.len() == space.len() {
        return Ok(SdofLabel {
            rotation,
            ..SdofLabel::new(SdofValue::Free)
        });
    }

    let dirs = space.directions();
    let d0 = dirs[members[0] as usize];
    let sum: Vector3<f64> = members
        .iter()
        .map(|&i| {
            let d = dirs[i as usize];
            if d.dot(&d0) < 0.0 {
                -d
            } else {
                d
            }
        })
        .sum();
    if sum.norm() > 1e-12 {
        let axis = Direction::new_normalize(sum);
        let cos_limit = (EPS_CONE + CAP_SLACK).cos();
        let confined = members
            .iter()
            .all(|&i| dirs[i as usize].dot(&axis).abs() >= cos_limit);
        if confined {
            let two_sided = members.iter().any(|&i| dirs[i as usize].dot(&axis) < 0.0);
            let value = if two_sided { SdofValue::Lin } else { SdofValue::Fits };
            return Ok(SdofLabel {
                rotation,
                ..SdofLabel::with_axis(value, axis)
            });
        }
    }

    if space.fraction() >= AGPP_MIN_FRACTION {
        return Ok(SdofLabel {
            rotation,
            ..SdofLabel::new(SdofValue::Agpp)
        });
    }
    Err(SpaceError::DegenerateSpace {
        pair: None,
        members: members.len(),
    })
}

/// Undirected relational graph with symbolic degree-of-freedom labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SdofGraph {
    pub nodes: Vec<String>,
    /// Both orientations of every edge are stored with the same label.
    pub edges: BTreeMap<(String, String), SdofLabel>,
}

impl SdofGraph {
    pub fn edge(&self, a: &str, b: &str) -> Option<&SdofLabel> {
        self.edges.get(&(a.to_string(), b.to_string()))
    }

    /// Unordered edges, each once, in sorted order.
    pub fn unique_edges(&self) -> impl Iterator<Item = (&str, &str, &SdofLabel)> {
        self.edges
            .iter()
            .filter(|((a, b), _)| a < b)
            .map(|((a, b), l)| (a.as_str(), b.as_str(), l))
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (a, b, l) in self.unique_edges() {
            out.push_str(&format!("{a} -- {b}: {l}\n"));
        }
        out
    }
}

/// Builds G_sdof: one edge per component pair joined by at least one
/// relation, labeled from the relative space of the lexicographically
/// smaller id with respect to the other.
pub fn build_graph(model: &AssemblyModel, dirs: &DirectionSet) -> Result<SdofGraph, SpaceError> {
    let mut pairs: BTreeMap<(String, String), Vec<&Ssr>> = BTreeMap::new();
    for r in &model.relations {
        let (a, b) = &r.components;
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        pairs.entry(key).or_default().push(r);
    }
    let mut edges = BTreeMap::new();
    for ((a, b), rels) in pairs {
        let space = relative_space(rels.iter().copied(), &a, dirs);
        let label = classify_sdof(&space, &rels).map_err(|e| match e {
            SpaceError::DegenerateSpace { members, .. } => SpaceError::DegenerateSpace {
                pair: Some((a.clone(), b.clone())),
                members,
            },
            other => other,
        })?;
        edges.insert((b.clone(), a.clone()), label);
        edges.insert((a, b), label);
    }
    Ok(SdofGraph {
        nodes: model.components.iter().map(|c| c.id.clone()).collect(),
        edges,
    })
}
