//! Kinematic robot: integrates commanded Cartesian velocities, senses contact
//! forces from penalty springs and sees point features through the camera.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{AdmittanceState, Camera, FeatureVector, Twist, Wrench};
use crate::geometry::Pose;

/// Default environment stiffness (N/m).
pub const CONTACT_STIFFNESS: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Contact {
    /// Surface through `point`; `normal` points to the free side. The robot
    /// pushes with `stiffness * penetration` once it passes the surface.
    Plane {
        point: Point3<f64>,
        normal: Vector3<f64>,
        stiffness: f64,
    },
    /// Snap fit or friction hold resisting motion along `axis` with a spring
    /// force saturating at `max_force`, gone for good after `release_travel`.
    Retention {
        origin: Point3<f64>,
        axis: Vector3<f64>,
        stiffness: f64,
        max_force: f64,
        release_travel: f64,
        released: bool,
    },
}

impl Contact {
    /// Force the robot at `p` exerts on the environment through this contact.
    fn force(&self, p: &Point3<f64>) -> Vector3<f64> {
        match self {
            Contact::Plane {
                point,
                normal,
                stiffness,
            } => {
                let pen = (point - p).dot(normal);
                if pen > 0.0 {
                    -normal * (stiffness * pen)
                } else {
                    Vector3::zeros()
                }
            }
            Contact::Retention {
                origin,
                axis,
                stiffness,
                max_force,
                released,
                ..
            } => {
                if *released {
                    return Vector3::zeros();
                }
                let x = (p - origin).dot(axis).max(0.0);
                axis * (stiffness * x).min(*max_force)
            }
        }
    }

    fn update(&mut self, p: &Point3<f64>) {
        if let Contact::Retention {
            origin,
            axis,
            release_travel,
            released,
            ..
        } = self
        {
            if (p - *origin).dot(axis) >= *release_travel {
                *released = true;
            }
        }
    }
}

/// Injected sensor disturbances.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFaults {
    /// Standard deviation of Gaussian noise on every force component (N).
    pub force_sigma: f64,
    /// Remaining time during which image features are unavailable (s).
    pub dropout_remaining_s: f64,
    rng: ChaCha8Rng,
}

impl SensorFaults {
    pub fn new(seed: u64) -> SensorFaults {
        SensorFaults {
            force_sigma: 0.0,
            dropout_remaining_s: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Default for SensorFaults {
    fn default() -> Self {
        SensorFaults::new(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensors {
    pub wrench: Wrench,
    pub features: Option<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    /// Tool center point in the world frame; also the camera frame.
    pub pose: Pose,
    pub velocity: Twist,
    pub filter: AdmittanceState,
    pub contacts: Vec<Contact>,
    /// World positions of the features of the component being handled.
    pub features: Vec<Point3<f64>>,
    pub camera: Camera,
    pub faults: SensorFaults,
}

impl PlantState {
    pub fn new(pose: Pose) -> PlantState {
        PlantState {
            pose,
            velocity: Twist::zeros(),
            filter: AdmittanceState::default(),
            contacts: Vec::new(),
            features: Vec::new(),
            camera: Camera::default(),
            faults: SensorFaults::default(),
        }
    }

    /// Noise-free contact force.
    pub fn true_wrench(&self) -> Wrench {
        let p = Point3::from(self.pose.translation.vector);
        Wrench::from_force(self.contacts.iter().map(|c| c.force(&p)).sum())
    }

    /// Current sensor readings, with injected noise applied.
    pub fn sense(&mut self) -> Sensors {
        let mut wrench = self.true_wrench();
        if self.faults.force_sigma > 0.0 {
            let noise = Normal::new(0.0, self.faults.force_sigma).expect("finite sigma");
            for i in 0..3 {
                wrench.force[i] += noise.sample(&mut self.faults.rng);
            }
        }
        let features = if self.faults.dropout_remaining_s > 0.0 || self.features.is_empty() {
            None
        } else {
            self.camera.project(&self.pose, &self.features)
        };
        Sensors { wrench, features }
    }

    /// Integrates `u` over `dt` and returns the new readings.
    pub fn step(&mut self, u: &Twist, dt: f64) -> Sensors {
        self.pose = integrate_pose(&self.pose, u, dt);
        self.velocity = *u;
        let p = Point3::from(self.pose.translation.vector);
        for c in &mut self.contacts {
            c.update(&p);
        }
        let sensors = self.sense();
        if self.faults.dropout_remaining_s > 0.0 {
            self.faults.dropout_remaining_s = (self.faults.dropout_remaining_s - dt).max(0.0);
        }
        sensors
    }
}

/// Applies a world-frame twist for `dt`.
pub fn integrate_pose(pose: &Pose, u: &Twist, dt: f64) -> Pose {
    let v = Vector3::new(u[0], u[1], u[2]);
    let w = Vector3::new(u[3], u[4], u[5]);
    Isometry3::from_parts(
        Translation3::from(pose.translation.vector + v * dt),
        UnitQuaternion::from_scaled_axis(w * dt) * pose.rotation,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floor() -> Contact {
        Contact::Plane {
            point: Point3::origin(),
            normal: Vector3::z(),
            stiffness: CONTACT_STIFFNESS,
        }
    }

    #[test]
    fn zero_command_keeps_pose_and_readings() {
        let mut p = PlantState::new(Pose::translation(0.0, 0.0, -0.0005));
        p.contacts.push(floor());
        let before = p.sense();
        let pose = p.pose;
        let after = p.step(&Twist::zeros(), 0.02);
        assert_eq!(p.pose, pose);
        assert_eq!(before, after);
    }

    #[test]
    fn free_space_has_no_force() {
        let mut p = PlantState::new(Pose::translation(0.0, 0.0, 0.1));
        p.contacts.push(floor());
        let s = p.step(&Twist::new(0.1, 0.0, -0.05, 0.0, 0.0, 0.0), 0.02);
        assert_eq!(s.wrench.force, Vector3::zeros());
    }

    #[test]
    fn one_millimeter_is_ten_newtons() {
        let mut p = PlantState::new(Pose::translation(0.0, 0.0, -0.001));
        p.contacts.push(floor());
        let f = p.sense().wrench.force;
        assert!((f - Vector3::new(0.0, 0.0, -10.0)).norm() < 1e-9);
    }

    #[test]
    fn retention_releases_after_travel() {
        let mut p = PlantState::new(Pose::identity());
        p.contacts.push(Contact::Retention {
            origin: Point3::origin(),
            axis: Vector3::x(),
            stiffness: CONTACT_STIFFNESS,
            max_force: 15.0,
            release_travel: 0.005,
            released: false,
        });
        let s = p.step(&Twist::new(0.1, 0.0, 0.0, 0.0, 0.0, 0.0), 0.01);
        assert!((s.wrench.force.x - 10.0).abs() < 1e-9);
        let s = p.step(&Twist::new(0.1, 0.0, 0.0, 0.0, 0.0, 0.0), 0.01);
        assert!((s.wrench.force.x - 15.0).abs() < 1e-9);
        let s = p.step(&Twist::new(0.1, 0.0, 0.0, 0.0, 0.0, 0.0), 0.04);
        assert_eq!(s.wrench.force.x, 0.0);
        let s = p.step(&Twist::new(-0.2, 0.0, 0.0, 0.0, 0.0, 0.0), 0.02);
        assert_eq!(s.wrench.force.x, 0.0);
    }
}
