use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Twist;
use crate::geometry::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionParams {
    pub v_max: f64,
    pub w_max: f64,
    /// Deceleration used to ramp down before the goal (m/s^2, rad/s^2).
    pub accel: f64,
    pub ang_accel: f64,
    pub rate_hz: f64,
}

impl Default for PositionParams {
    fn default() -> Self {
        PositionParams {
            v_max: 0.1,
            w_max: 0.5,
            accel: 0.5,
            ang_accel: 2.5,
            rate_hz: 50.0,
        }
    }
}

/// Speed toward a target `dist` away: capped, ramped down near the goal and
/// never overshooting within one period.
fn ramp(dist: f64, cap: f64, accel: f64, dt: f64) -> f64 {
    cap.min((2.0 * accel * dist).sqrt()).min(dist / dt)
}

/// World-frame twist driving `current` toward `goal`. Translation and
/// rotation are commanded independently.
pub fn position_step(goal: &Pose, current: &Pose, params: &PositionParams) -> Twist {
    let dt = 1.0 / params.rate_hz;
    let dp = goal.translation.vector - current.translation.vector;
    let dist = dp.norm();
    let v = if dist > 0.0 {
        dp / dist * ramp(dist, params.v_max, params.accel, dt)
    } else {
        Vector3::zeros()
    };
    let rot_err = (goal.rotation * current.rotation.inverse()).scaled_axis();
    let angle = rot_err.norm();
    let w = if angle > 0.0 {
        rot_err / angle * ramp(angle, params.w_max, params.ang_accel, dt)
    } else {
        Vector3::zeros()
    };
    Twist::new(v.x, v.y, v.z, w.x, w.y, w.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::integrate_pose;
    use nalgebra::{Isometry3, Translation3, UnitQuaternion};

    #[test]
    fn at_goal_is_zero() {
        let p = Pose::translation(0.1, 0.2, 0.3);
        assert_eq!(position_step(&p, &p, &PositionParams::default()), Twist::zeros());
    }

    #[test]
    fn one_meter_takes_at_least_ten_seconds() {
        let params = PositionParams::default();
        let goal = Pose::translation(1.0, 0.0, 0.0);
        let mut pose = Pose::identity();
        let dt = 1.0 / params.rate_hz;
        let mut steps = 0;
        while (goal.translation.vector - pose.translation.vector).norm() > 1e-9 {
            let u = position_step(&goal, &pose, &params);
            assert!(u.fixed_rows::<3>(0).norm() <= params.v_max + 1e-12);
            pose = integrate_pose(&pose, &u, dt);
            steps += 1;
            assert!(steps < 10_000);
        }
        assert!(steps as f64 * dt >= 10.0);
    }

    #[test]
    fn orientation_error_gives_pure_rotation() {
        let goal = Isometry3::from_parts(
            Translation3::new(0.0, 0.0, 0.0),
            UnitQuaternion::from_euler_angles(0.0, 0.0, 0.3),
        );
        let u = position_step(&goal, &Pose::identity(), &PositionParams::default());
        assert_eq!(u.fixed_rows::<3>(0).norm(), 0.0);
        assert!(u[5] > 0.0);
    }
}
