//! Seeded random scenarios for property tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use dismantle_core::model::parse_model;
use dismantle_core::AssemblyModel;

#[derive(Debug, Clone, Copy)]
pub enum Directions {
    /// Uniform on the sphere.
    Any,
    /// Coordinate axes, mostly up.
    Axes,
}

pub struct Shape {
    pub max_components: usize,
    /// Upper bound on relations per component.
    pub max_contacts: usize,
    pub directions: Directions,
}

const SEMANTICS: [&str; 5] = ["screw", "generic_graspable", "plug", "cover", "hose"];
const TOP_DOWN: [f64; 4] = [0.0, 1.0, 0.0, 0.0];

fn direction(rng: &mut ChaCha8Rng, mode: Directions) -> [f64; 3] {
    match mode {
        Directions::Any => loop {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        },
        Directions::Axes => *[
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ]
        .choose(rng)
        .unwrap(),
    }
}

/// Scenario document for `seed`: a base plus up to `max_components - 1`
/// parts joined by a random spanning tree and a few extra relations.
pub fn scenario_doc(seed: u64, shape: &Shape) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=shape.max_components);
    let mut semantics = vec!["base"];
    let mut components = vec![json!({"id": "c0", "semantic": "base", "pose": {"position": [0.5, 0.0, 0.0]}})];
    for i in 1..n {
        let semantic = *SEMANTICS.choose(&mut rng).unwrap();
        semantics.push(semantic);
        let fi = i as f64;
        let mut comp = json!({
            "id": format!("c{i}"),
            "semantic": semantic,
            "pose": {"position": [0.5 + 0.03 * fi, 0.02 * fi, 0.02 + 0.03 * fi]},
            "grasp_offset": {"position": [0.0, 0.0, 0.01], "orientation": TOP_DOWN},
            "put_pose": {"position": [0.2 + 0.06 * fi, -0.4, 0.02]}
        });
        if rng.gen_bool(0.5) {
            comp["visual_features"] = json!([[0.01, 0.01, 0.01], [-0.01, 0.01, 0.01], [-0.01, -0.01, 0.01], [0.01, -0.01, 0.01]]);
        }
        components.push(comp);
    }

    let mut degree = vec![0usize; n];
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i, rng.gen_range(0..i))).collect();
    for _ in 0..rng.gen_range(0..=2) {
        let a = rng.gen_range(1..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.push((a, b));
        }
    }
    let mut relations = Vec::new();
    for (a, b) in pairs {
        if degree[a] >= shape.max_contacts || degree[b] >= shape.max_contacts {
            continue;
        }
        degree[a] += 1;
        degree[b] += 1;
        let (mut kind, mut geometry) = *[("plane_contact", "plane"), ("congruent", "plane"), ("concentric", "cylinder"), ("screwed", "cylinder")]
            .choose(&mut rng)
            .unwrap();
        if kind == "screwed" && semantics[a] != "screw" {
            (kind, geometry) = ("plane_contact", "plane");
        }
        relations.push(json!({
            "kind": kind,
            "components": [format!("c{a}"), format!("c{b}")],
            "geometry": {"kind": geometry, "frame": {"position": [0.0, 0.0, 0.0]}, "direction": direction(&mut rng, shape.directions)}
        }));
    }
    let target = format!("c{}", rng.gen_range(1..n));
    json!({
        "format_version": 1,
        "components": components,
        "relations": relations,
        "tool_stations": {
            "gripper": {"position": [0.0, 0.45, 0.15], "orientation": TOP_DOWN},
            "screwdriver": {"position": [0.15, 0.45, 0.15], "orientation": TOP_DOWN}
        },
        "target": target,
        "task": "disassembly_assembly"
    })
}

/// Random model; `None` when the draw is not a valid scenario (it can be
/// disconnected after relations are dropped for exceeding the contact bound).
pub fn random_model(seed: u64, shape: &Shape) -> Option<AssemblyModel> {
    parse_model(&scenario_doc(seed, shape).to_string()).ok()
}

/// Admission of `d` by one relation, evaluated from the raw scenario fields.
pub fn brute_force_admits(kind: &str, moving_is_first: bool, dir: [f64; 3], d: &nalgebra::Vector3<f64>) -> bool {
    let dot = d.x * dir[0] + d.y * dir[1] + d.z * dir[2];
    match kind {
        "plane_contact" | "congruent" => (if moving_is_first { dot } else { -dot }) >= -1e-6,
        "concentric" => dot.abs() >= (5.0f64).to_radians().cos(),
        _ => false,
    }
}

/// Mask of `component`'s disassembly space, evaluated direction by direction
/// from the relations in `doc`.
pub fn brute_force_mask(doc: &Value, component: &str, dirs: &[nalgebra::Vector3<f64>]) -> Vec<bool> {
    let rels = doc["relations"].as_array().unwrap();
    dirs.iter()
        .map(|d| {
            rels.iter().all(|r| {
                let pair = r["components"].as_array().unwrap();
                let (a, b) = (pair[0].as_str().unwrap(), pair[1].as_str().unwrap());
                if a != component && b != component {
                    return true;
                }
                let v: Vec<f64> = r["geometry"]["direction"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
                brute_force_admits(r["kind"].as_str().unwrap(), a == component, [v[0], v[1], v[2]], d)
            })
        })
        .collect()
}

/// Part "p" resting on one plane per normal, each plane on its own
/// neighbour (the first is the base).
pub fn pressed_part(normals: &[[f64; 3]]) -> AssemblyModel {
    let mut components = vec![json!({"id": "p", "semantic": "cover", "pose": {"position": [0.5, 0.0, 0.05]},
        "grasp_offset": {"position": [0.0, 0.0, 0.0], "orientation": TOP_DOWN}})];
    let mut relations = Vec::new();
    for (i, n) in normals.iter().enumerate() {
        let id = format!("n{i}");
        let semantic = if i == 0 { "base" } else { "generic_graspable" };
        components.push(json!({"id": id, "semantic": semantic, "pose": {"position": [0.5, 0.1 * i as f64, 0.0]},
            "grasp_offset": {"position": [0.0, 0.0, 0.0], "orientation": TOP_DOWN}}));
        relations.push(json!({"kind": "plane_contact", "components": ["p", id],
            "geometry": {"kind": "plane", "frame": {"position": [0.0, 0.0, 0.0]}, "direction": n}}));
    }
    let doc = json!({
        "format_version": 1,
        "components": components,
        "relations": relations,
        "tool_stations": {
            "gripper": {"position": [0.0, 0.45, 0.15], "orientation": TOP_DOWN},
            "screwdriver": {"position": [0.15, 0.45, 0.15], "orientation": TOP_DOWN}
        },
        "target": "p",
        "task": "disassembly"
    });
    parse_model(&doc.to_string()).expect("pressed part scenario is valid")
}
