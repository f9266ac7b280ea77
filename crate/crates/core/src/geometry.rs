//! Rigid poses and their on-disk representation.
//!
//! Poses are `Isometry3<f64>` in meters. Files carry orientations as unit
//! quaternions in `[w, x, y, z]` order; angles never appear on disk.

use nalgebra::{Isometry3, Quaternion, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Pose = Isometry3<f64>;
pub type Direction = Unit<Vector3<f64>>;

pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Serialized pose: `{"position": [x, y, z], "orientation": [w, x, y, z]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseDoc {
    pub position: [f64; 3],
    #[serde(default = "identity_quat")]
    pub orientation: [f64; 4],
}

fn identity_quat() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl PoseDoc {
    pub fn quaternion_norm(&self) -> f64 {
        self.orientation.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Converts to a pose, normalizing the quaternion. Callers validate the norm first.
    pub fn to_pose(&self) -> Pose {
        let [w, x, y, z] = self.orientation;
        let rot = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
        let [px, py, pz] = self.position;
        Isometry3::from_parts(Translation3::new(px, py, pz), rot)
    }
}

impl From<&Pose> for PoseDoc {
    fn from(pose: &Pose) -> Self {
        let q = pose.rotation.quaternion();
        let t = pose.translation.vector;
        PoseDoc {
            position: [t.x, t.y, t.z],
            orientation: [q.w, q.i, q.j, q.k],
        }
    }
}

pub fn vec_norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn to_vector(v: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

pub fn from_vector(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Translation and rotation distance between two poses.
pub fn pose_distance(a: &Pose, b: &Pose) -> (f64, f64) {
    let dp = (a.translation.vector - b.translation.vector).norm();
    let dr = a.rotation.angle_to(&b.rotation);
    (dp, dr)
}

/// Pose as `[x, y, z, rx, ry, rz]` with the rotation as a scaled axis.
pub fn pose_to_setpoint(pose: &Pose) -> Vec<f64> {
    let t = pose.translation.vector;
    let r = pose.rotation.scaled_axis();
    vec![t.x, t.y, t.z, r.x, r.y, r.z]
}

pub fn setpoint_to_pose(d: &[f64]) -> Pose {
    let rot = UnitQuaternion::from_scaled_axis(Vector3::new(d[3], d[4], d[5]));
    Isometry3::from_parts(Translation3::new(d[0], d[1], d[2]), rot)
}

/// Pose translated by `offset` (world frame), orientation unchanged.
pub fn translated(pose: &Pose, offset: Vector3<f64>) -> Pose {
    Isometry3::from_parts(
        Translation3::from(pose.translation.vector + offset),
        pose.rotation,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pose_doc_round_trip() {
        let doc = PoseDoc {
            position: [0.1, -0.2, 0.3],
            orientation: [0.0, 1.0, 0.0, 0.0],
        };
        let back = PoseDoc::from(&doc.to_pose());
        for i in 0..3 {
            assert!((back.position[i] - doc.position[i]).abs() < 1e-12);
        }
        // q and -q are the same rotation
        let dot: f64 = (0..4).map(|i| back.orientation[i] * doc.orientation[i]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn setpoint_round_trip() {
        let pose = PoseDoc {
            position: [1.0, 2.0, 3.0],
            orientation: [0.9, 0.1, 0.3, -0.2],
        }
        .to_pose();
        let back = setpoint_to_pose(&pose_to_setpoint(&pose));
        let (dp, dr) = pose_distance(&pose, &back);
        assert!(dp < 1e-12 && dr < 1e-9);
    }
}
