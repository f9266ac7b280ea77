use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

/// Cartesian velocity command: linear (m/s) then angular (rad/s), world frame
/// unless stated otherwise.
pub type Twist = Vector6<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmittanceParams {
    pub mass: [f64; 6],
    pub damping: [f64; 6],
    pub stiffness: [f64; 6],
    pub rate_hz: f64,
}

impl Default for AdmittanceParams {
    fn default() -> Self {
        AdmittanceParams {
            mass: [5.0; 6],
            damping: [250.0; 6],
            stiffness: [500.0; 6],
            rate_hz: 50.0,
        }
    }
}

impl AdmittanceParams {
    pub fn is_valid(&self) -> bool {
        self.rate_hz > 0.0
            && self
                .mass
                .iter()
                .chain(&self.damping)
                .chain(&self.stiffness)
                .all(|v| *v > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn from_force(force: Vector3<f64>) -> Wrench {
        Wrench {
            force,
            torque: Vector3::zeros(),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        let (f, t) = (self.force, self.torque);
        [f.x, f.y, f.z, t.x, t.y, t.z]
    }

    fn stacked(&self) -> Vector6<f64> {
        Vector6::from_row_slice(&self.to_array())
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Internal state `(u, du/dt)` of the admittance filter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdmittanceState {
    pub u: Vector6<f64>,
    pub du: Vector6<f64>,
}

/// Advances `M u'' + D u' + C u = F_des - F_act` by one explicit Euler step
/// of `1 / rate_hz` and returns the new velocity command `u`.
pub fn admittance_step(
    params: &AdmittanceParams,
    f_des: &Wrench,
    f_act: &Wrench,
    state: &AdmittanceState,
) -> (Twist, AdmittanceState) {
    let dt = 1.0 / params.rate_hz;
    let e = f_des.stacked() - f_act.stacked();
    let mut next = *state;
    for i in 0..6 {
        let ddu = (e[i] - params.damping[i] * state.du[i] - params.stiffness[i] * state.u[i])
            / params.mass[i];
        next.u[i] = state.u[i] + dt * state.du[i];
        next.du[i] = state.du[i] + dt * ddu;
    }
    (next.u, next)
}
