//! Switching Cartesian velocity controller and the simulated plant it drives.
//!
//! Time is simulated in integer base ticks of 1/100 s. Position and force
//! loops run every 2 base ticks (50 Hz), the visual loop every 5 (20 Hz),
//! so every duration is an exact integer and the time buckets add up
//! without rounding.

mod admittance;
mod ibvs;
mod plant;
mod position;

pub use admittance::{admittance_step, AdmittanceParams, AdmittanceState, Twist, Wrench};
pub use ibvs::{feature_jacobian, ibvs_step, Camera, FeatureVector, IbvsParams};
pub use plant::{integrate_pose, Contact, PlantState, SensorFaults, Sensors, CONTACT_STIFFNESS};
pub use position::{position_step, PositionParams};

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::ControlError;
use crate::geometry::{pose_distance, setpoint_to_pose, to_vector};
use crate::skill::{ApName, AxisMode, SkillPrimitive, StopKind};

/// Base ticks per simulated second.
pub const BASE_HZ: u64 = 100;
/// Base ticks per position or force control period.
pub const POS_PERIOD: u64 = 2;
/// Base ticks per visual servoing period.
pub const VSC_PERIOD: u64 = 5;
/// Features may vanish for at most this long before fine positioning gives up (s).
pub const MAX_FEATURE_LOSS_S: f64 = 0.5;

pub fn ticks_to_seconds(ticks: u64) -> f64 {
    ticks as f64 / BASE_HZ as f64
}

/// Formats a tick count as seconds with exactly two decimals.
pub fn format_ticks(ticks: u64) -> String {
    format!("{}.{:02}", ticks / BASE_HZ, ticks % BASE_HZ)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    Pos,
    Ftc,
    Vsc,
    /// Tool actuation without robot motion.
    Tool,
}

impl Controller {
    pub fn as_str(self) -> &'static str {
        match self {
            Controller::Pos => "pos",
            Controller::Ftc => "ftc",
            Controller::Vsc => "vsc",
            Controller::Tool => "tool",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    /// End of the tick, in base ticks since the start of the run.
    pub t: u64,
    pub controller: Controller,
    pub u: [f64; 6],
    pub wrench: [f64; 6],
    pub feat_err_px: f64,
}

impl TickRecord {
    pub const CSV_HEADER: &'static str =
        "t,controller,ux,uy,uz,wx,wy,wz,Fx,Fy,Fz,Tx,Ty,Tz,feat_err_px";

    pub fn to_csv(&self) -> String {
        let mut row = format!("{},{}", format_ticks(self.t), self.controller.as_str());
        for v in self.u.iter().chain(&self.wrench) {
            row.push_str(&format!(",{v}"));
        }
        row.push_str(&format!(",{}", self.feat_err_px));
        row
    }
}

/// Time per controller, in base ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Buckets {
    pub path: u64,
    pub vsc: u64,
    pub ftc: u64,
    pub n: u64,
}

impl Buckets {
    pub fn total(&self) -> u64 {
        self.path + self.vsc + self.ftc + self.n
    }

    pub fn add(&mut self, controller: Controller, ticks: u64) {
        match controller {
            Controller::Pos => self.path += ticks,
            Controller::Vsc => self.vsc += ticks,
            Controller::Ftc => self.ftc += ticks,
            Controller::Tool => self.n += ticks,
        }
    }

    pub fn merge(&mut self, other: &Buckets) {
        self.path += other.path;
        self.vsc += other.vsc;
        self.ftc += other.ftc;
        self.n += other.n;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub admittance: AdmittanceParams,
    pub ibvs: IbvsParams,
    pub position: PositionParams,
    /// Duration of a tool open or close (s).
    pub tool_time_s: f64,
    /// Spinning time in contact needed to loosen or tighten a screw (s).
    pub spin_time_s: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            admittance: AdmittanceParams::default(),
            ibvs: IbvsParams::default(),
            position: PositionParams::default(),
            tool_time_s: 1.0,
            spin_time_s: 3.0,
        }
    }
}

/// Record of one skill primitive run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub name: ApName,
    pub start: u64,
    pub end: u64,
    pub ticks: Vec<TickRecord>,
    pub buckets: Buckets,
    pub outcome: Result<(), ControlError>,
    pub terminal_wrench: Wrench,
    pub terminal_feat_err: f64,
}

impl StepLog {
    pub fn duration_s(&self) -> f64 {
        ticks_to_seconds(self.end - self.start)
    }
}

fn controller_for(ap: &SkillPrimitive) -> Controller {
    if ap.hm.uses(AxisMode::Vsc) {
        Controller::Vsc
    } else if ap.hm.uses(AxisMode::Ftc) {
        Controller::Ftc
    } else {
        Controller::Pos
    }
}

struct StopTracker {
    armed: bool,
    spin_s: f64,
}

impl StopTracker {
    fn satisfied(&mut self, ap: &SkillPrimitive, plant: &PlantState, sensors: &Sensors, axis: &Vector3<f64>, spin_time: f64) -> bool {
        let stop = &ap.stop;
        match stop.kind {
            StopKind::PoseReached => {
                let goal = setpoint_to_pose(&stop.target);
                let (dp, dr) = pose_distance(&plant.pose, &goal);
                dp <= stop.tolerance && dr <= stop.tolerance
            }
            StopKind::FeatureReached => sensors
                .features
                .as_ref()
                .is_some_and(|f| f.max_error(&stop.target) <= stop.tolerance),
            StopKind::ForceReached => {
                let f = sensors.wrench.force.dot(axis);
                let target = stop.target.first().copied().unwrap_or(0.0);
                if target == 0.0 {
                    // release detection: the force must rise before it counts as dropped
                    if f.abs() > stop.tolerance {
                        self.armed = true;
                    }
                    self.armed && f.abs() <= stop.tolerance
                } else {
                    (f - target).abs() <= stop.tolerance
                }
            }
            StopKind::ToolDone => self.spin_s >= spin_time - 1e-9,
            StopKind::Timeout => false,
        }
    }
}

/// Runs one skill primitive on the plant, starting at base tick `start`.
///
/// The controller is chosen from the hybrid move: visual servoing if any
/// axis is `vsc`, the force/position hybrid if any axis is `ftc`, position
/// control otherwise. Open and close tool commands run after the motion and
/// count as non-productive time; spinning runs during the motion.
pub fn run_skill(ap: &SkillPrimitive, plant: &mut PlantState, params: &ControlParams, start: u64) -> StepLog {
    let controller = controller_for(ap);
    let period = if controller == Controller::Vsc {
        VSC_PERIOD
    } else {
        POS_PERIOD
    };
    let dt = period as f64 / BASE_HZ as f64;
    let limit = (ap.stop.timeout_s * BASE_HZ as f64).round() as u64;
    let axis = ap
        .hm
        .contact_axis
        .map(|a| to_vector(&a).normalize())
        .unwrap_or_else(|| plant.pose.rotation * Vector3::z());
    let f_des = ap.hm.setpoint.get(2).copied().unwrap_or(0.0);
    let hold = plant.pose;
    plant.filter = AdmittanceState::default();

    let mut log = StepLog {
        name: ap.name,
        start,
        end: start,
        ticks: Vec::new(),
        buckets: Buckets::default(),
        outcome: Ok(()),
        terminal_wrench: Wrench::default(),
        terminal_feat_err: 0.0,
    };
    let mut tracker = StopTracker {
        armed: false,
        spin_s: 0.0,
    };
    let mut sensors = plant.sense();
    let mut elapsed = 0u64;
    let mut lost_s = 0.0;
    let feat_err = |s: &Sensors| {
        if controller == Controller::Vsc {
            s.features.as_ref().map_or(f64::NAN, |f| f.max_error(&ap.hm.setpoint))
        } else {
            0.0
        }
    };

    let mut done = tracker.satisfied(ap, plant, &sensors, &axis, params.spin_time_s);
    while !done {
        if elapsed >= limit {
            if ap.stop.kind != StopKind::Timeout {
                log.outcome = Err(ControlError::Timeout(ap.stop.timeout_s));
            }
            break;
        }
        let u = match controller {
            Controller::Pos => {
                position_step(&setpoint_to_pose(&ap.hm.setpoint), &plant.pose, &params.position)
            }
            Controller::Ftc => {
                let f_act = sensors.wrench.force.dot(&axis);
                let des = Wrench::from_force(Vector3::new(0.0, 0.0, f_des));
                let act = Wrench::from_force(Vector3::new(0.0, 0.0, f_act));
                let (uf, filter) = admittance_step(&params.admittance, &des, &act, &plant.filter);
                plant.filter = filter;
                let u_hold = position_step(&hold, &plant.pose, &params.position);
                let lin: Vector3<f64> = u_hold.fixed_rows::<3>(0).into();
                let lin = lin - axis * lin.dot(&axis) + axis * uf[2];
                Vector6::new(lin.x, lin.y, lin.z, u_hold[3], u_hold[4], u_hold[5])
            }
            Controller::Vsc => match &sensors.features {
                None => {
                    lost_s += dt;
                    if lost_s > MAX_FEATURE_LOSS_S + 1e-9 {
                        log.outcome = Err(ControlError::FeaturesLost(lost_s));
                        break;
                    }
                    Twist::zeros()
                }
                Some(f) => {
                    lost_s = 0.0;
                    match ibvs_step(&params.ibvs, &ap.hm.setpoint, f) {
                        Ok(cam) => {
                            let r = plant.pose.rotation;
                            let v = r * Vector3::new(cam[0], cam[1], cam[2]);
                            let w = r * Vector3::new(cam[3], cam[4], cam[5]);
                            Vector6::new(v.x, v.y, v.z, w.x, w.y, w.z)
                        }
                        Err(e) => {
                            log.outcome = Err(e);
                            break;
                        }
                    }
                }
            },
            Controller::Tool => unreachable!("tool time is not a motion controller"),
        };
        sensors = plant.step(&u, dt);
        elapsed += period;
        if ap.tool.is_spin() && sensors.wrench.force.dot(&axis) >= 0.5 * f_des {
            tracker.spin_s += dt;
        }
        log.buckets.add(controller, period);
        log.ticks.push(TickRecord {
            t: start + elapsed,
            controller,
            u: u.into(),
            wrench: sensors.wrench.to_array(),
            feat_err_px: feat_err(&sensors),
        });
        done = tracker.satisfied(ap, plant, &sensors, &axis, params.spin_time_s);
    }

    if log.outcome.is_ok() && ap.tool.is_actuation() {
        let n = (params.tool_time_s * BASE_HZ as f64).round() as u64 / POS_PERIOD;
        plant.velocity = Twist::zeros();
        for _ in 0..n {
            elapsed += POS_PERIOD;
            sensors = plant.sense();
            log.buckets.add(Controller::Tool, POS_PERIOD);
            log.ticks.push(TickRecord {
                t: start + elapsed,
                controller: Controller::Tool,
                u: [0.0; 6],
                wrench: sensors.wrench.to_array(),
                feat_err_px: 0.0,
            });
        }
    }
    log.end = start + elapsed;
    log.terminal_wrench = sensors.wrench;
    log.terminal_feat_err = feat_err(&sensors);
    log
}
