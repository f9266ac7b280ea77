use nalgebra::{DVector, Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

use dismantle_core::control::{
    admittance_step, feature_jacobian, ibvs_step, run_skill, AdmittanceParams, AdmittanceState,
    Camera, Contact, ControlParams, FeatureVector, IbvsParams, PlantState, Wrench,
    CONTACT_STIFFNESS,
};
use dismantle_core::geometry::Pose;
use dismantle_core::skill::{
    ApName, AxisMode, HybridMove, SkillPrimitive, StopCondition, StopKind, TaskFrame, ToolCommand,
};

fn top_down(x: f64, y: f64, z: f64) -> Pose {
    Isometry3::from_parts(
        Translation3::new(x, y, z),
        UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI),
    )
}

fn square(center: Point3<f64>, half: f64) -> Vec<Point3<f64>> {
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|(a, b)| center + Vector3::new(a * half, b * half, 0.0))
        .collect()
}

/// Pushes down on a floor spring with the admittance filter closing the loop.
/// Returns (sensed force, commanded speed) per control tick.
fn press(f_des: f64, seconds: f64) -> Vec<(f64, f64)> {
    let params = AdmittanceParams::default();
    let dt = 1.0 / params.rate_hz;
    let mut plant = PlantState::new(top_down(0.0, 0.0, 0.0));
    plant.contacts.push(Contact::Plane {
        point: Point3::origin(),
        normal: Vector3::z(),
        stiffness: CONTACT_STIFFNESS,
    });
    let axis = -Vector3::z();
    let mut filter = AdmittanceState::default();
    let mut out = Vec::new();
    for _ in 0..(seconds / dt).round() as usize {
        let f_act = plant.sense().wrench.force.dot(&axis);
        let des = Wrench::from_force(Vector3::new(0.0, 0.0, f_des));
        let act = Wrench::from_force(Vector3::new(0.0, 0.0, f_act));
        let (u, next) = admittance_step(&params, &des, &act, &filter);
        filter = next;
        let v = axis * u[2];
        plant.step(&nalgebra::Vector6::new(v.x, v.y, v.z, 0.0, 0.0, 0.0), dt);
        out.push((plant.sense().wrench.force.dot(&axis), u[2].abs()));
    }
    out
}

#[test]
fn admittance_tracks_force_against_spring() {
    force_tracking().unwrap();
}

/// Presses for 10 s at 10, 20 and 30 N; the force must be within 2% and
/// the commanded speed below 1e-4 m/s at the end.
pub fn force_tracking() -> Result<(), String> {
    for f_des in [10.0, 20.0, 30.0] {
        let trace = press(f_des, 10.0);
        let (f, v) = *trace.last().unwrap();
        if (f - f_des).abs() > 0.02 * f_des {
            return Err(format!("F_des {f_des}: settled at {f}"));
        }
        if v >= 1e-4 {
            return Err(format!("F_des {f_des}: still moving at {v}"));
        }
    }
    Ok(())
}

#[test]
fn admittance_dc_gain() {
    dc_gain().unwrap();
}

pub fn dc_gain() -> Result<(), String> {
    let params = AdmittanceParams::default();
    let zero = Wrench::default();
    for axis in 0..3 {
        let mut f = Vector3::zeros();
        f[axis] = 10.0;
        let des = Wrench::from_force(f);
        let mut s = AdmittanceState::default();
        for _ in 0..(5.0 * params.rate_hz) as usize {
            s = admittance_step(&params, &des, &zero, &s).1;
        }
        let gain = s.u[axis] / 10.0;
        if (gain - 1.0 / 500.0).abs() > 0.01 / 500.0 {
            return Err(format!("axis {axis}: gain {gain}"));
        }
    }
    Ok(())
}

fn fine_pos(f_des: Vec<f64>) -> SkillPrimitive {
    SkillPrimitive {
        name: ApName::FinePos,
        component: Some("part".into()),
        process: None,
        hm: HybridMove {
            task_frame: TaskFrame::Rgbd,
            control: vec![AxisMode::Vsc; f_des.len()],
            setpoint: f_des.clone(),
            contact_axis: None,
        },
        tool: ToolCommand::IDLE,
        stop: StopCondition {
            kind: StopKind::FeatureReached,
            target: f_des,
            tolerance: 1.0,
            timeout_s: 60.0,
        },
    }
}

#[test]
fn visual_servoing_converges_from_offsets() {
    assert_eq!(servo_from_offsets().unwrap(), 5);
}

/// Servos back to the goal from five 5 cm offsets; returns the number of runs.
pub fn servo_from_offsets() -> Result<usize, String> {
    let features = square(Point3::new(0.5, 0.0, 0.04), 0.025);
    let goal = top_down(0.5, 0.0, 0.14);
    let cam = Camera::default();
    let f_des = cam.project(&goal, &features).unwrap().pixels;
    let offsets = [
        Vector3::new(0.05, 0.0, 0.0),
        Vector3::new(-0.05, 0.0, 0.0),
        Vector3::new(0.0, 0.05, 0.0),
        Vector3::new(0.0, -0.05, 0.0),
        Vector3::new(0.0, 0.0, 0.05),
    ];
    for off in offsets {
        let mut plant = PlantState::new(Isometry3::from_parts(
            Translation3::from(goal.translation.vector + off),
            goal.rotation,
        ));
        plant.features = features.clone();
        let log = run_skill(&fine_pos(f_des.clone()), &mut plant, &ControlParams::default(), 0);
        if let Err(e) = &log.outcome {
            return Err(format!("{off:?}: {e}"));
        }
        let err = (plant.pose.translation.vector - goal.translation.vector).norm();
        if err > 0.0012 {
            return Err(format!("{off:?}: final error {err}"));
        }
        if log.buckets.vsc != log.end - log.start {
            return Err(format!("{off:?}: time outside the visual servoing bucket"));
        }
    }
    Ok(offsets.len())
}

#[test]
fn ideal_plant_error_decays_exponentially() {
    exponential_decay().unwrap();
}

/// Integrates the feature dynamics exactly and compares the error norm
/// against exp(-0.125 t) over 10 s, within 5%.
pub fn exponential_decay() -> Result<(), String> {
    let params = IbvsParams::default();
    let cam = params.camera;
    let features = square(Point3::new(0.0, 0.0, 0.0), 0.025);
    let goal = top_down(0.0, 0.0, 0.1);
    let des = cam.project(&goal, &features).unwrap();
    let start = Isometry3::from_parts(Translation3::new(0.003, -0.002, 0.1), goal.rotation);
    let mut f = cam.project(&start, &features).unwrap();
    let e0 = err_norm(&des, &f);
    let dt = 1.0 / params.rate_hz;
    for k in 1..=(10.0 * params.rate_hz) as usize {
        let u = ibvs_step(&params, &des.pixels, &f).unwrap();
        let j = feature_jacobian(&f, &cam);
        let df = j * DVector::from_iterator(6, u.iter().copied()) * dt;
        for (p, d) in f.pixels.iter_mut().zip(df.iter()) {
            *p += d;
        }
        let t = k as f64 * dt;
        let ratio = err_norm(&des, &f) / e0;
        let expected = (-0.125 * t).exp();
        if (ratio - expected).abs() > 0.05 * expected {
            return Err(format!("t={t}: {ratio} vs {expected}"));
        }
    }
    Ok(())
}

fn err_norm(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.pixels.iter().zip(&b.pixels).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn pseudo_inverse_is_left_inverse() {
    let cam = Camera::default();
    let fv = cam.project(&top_down(0.0, 0.0, 0.1), &square(Point3::origin(), 0.02)).unwrap();
    let j = feature_jacobian(&fv, &cam);
    let pinv = j.clone().pseudo_inverse(1e-12).unwrap();
    let id = pinv * &j;
    assert!((id - nalgebra::DMatrix::<f64>::identity(6, 6)).abs().max() < 1e-9);
}

#[test]
fn guarded_approach_stops_at_contact_force() {
    let mut plant = PlantState::new(top_down(0.0, 0.0, 0.01));
    plant.contacts.push(Contact::Plane {
        point: Point3::origin(),
        normal: Vector3::z(),
        stiffness: CONTACT_STIFFNESS,
    });
    let mut control = vec![AxisMode::Pos; 6];
    control[2] = AxisMode::Ftc;
    let ap = SkillPrimitive {
        name: ApName::PutObj,
        component: Some("part".into()),
        process: None,
        hm: HybridMove {
            task_frame: TaskFrame::Tool,
            control,
            setpoint: vec![0.0, 0.0, 10.0, 0.0, 0.0, 0.0],
            contact_axis: Some([0.0, 0.0, -1.0]),
        },
        tool: ToolCommand::IDLE,
        stop: StopCondition {
            kind: StopKind::ForceReached,
            target: vec![10.0],
            tolerance: 0.2,
            timeout_s: 60.0,
        },
    };
    let log = run_skill(&ap, &mut plant, &ControlParams::default(), 0);
    assert!(log.outcome.is_ok(), "{:?}", log.outcome);
    let f = -log.terminal_wrench.force.z;
    assert!((f - 10.0).abs() <= 0.2, "{f}");
    assert_eq!(log.buckets.ftc, log.end - log.start);
}
