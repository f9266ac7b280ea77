use nalgebra::{DMatrix, DVector, Point3};
use serde::{Deserialize, Serialize};

use super::Twist;
use crate::error::ControlError;
use crate::geometry::Pose;

/// Pinhole camera rigidly mounted at the tool center point, looking along
/// the TCP z-axis. The camera frame coincides with the TCP frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for Camera {
    fn default() -> Self {
        Camera {
            focal_px: 525.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        }
    }
}

impl Camera {
    /// Projects world points seen from `camera_pose`. `None` if any point is
    /// not in front of the camera.
    pub fn project(&self, camera_pose: &Pose, points: &[Point3<f64>]) -> Option<FeatureVector> {
        let mut pixels = Vec::with_capacity(points.len() * 2);
        let mut depths = Vec::with_capacity(points.len());
        for p in points {
            let c = camera_pose.inverse_transform_point(p);
            if c.z <= 1e-6 {
                return None;
            }
            pixels.push(self.focal_px * c.x / c.z + self.cx);
            pixels.push(self.focal_px * c.y / c.z + self.cy);
            depths.push(c.z);
        }
        Some(FeatureVector { pixels, depths })
    }
}

/// Image point features: `(u, v)` pairs in pixels and their depths in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub pixels: Vec<f64>,
    pub depths: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    /// Largest absolute per-coordinate difference, in pixels.
    pub fn max_error(&self, other: &[f64]) -> f64 {
        self.pixels
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbvsParams {
    pub gain: f64,
    pub rate_hz: f64,
    pub camera: Camera,
}

impl Default for IbvsParams {
    fn default() -> Self {
        IbvsParams {
            gain: 0.125,
            rate_hz: 20.0,
            camera: Camera::default(),
        }
    }
}

/// Stacked point-feature interaction matrices (2k x 6) in pixel units, for
/// a camera twist `(v, w)` expressed in the camera frame.
pub fn feature_jacobian(features: &FeatureVector, camera: &Camera) -> DMatrix<f64> {
    let k = features.len();
    let f = camera.focal_px;
    let mut j = DMatrix::zeros(2 * k, 6);
    for i in 0..k {
        let x = (features.pixels[2 * i] - camera.cx) / f;
        let y = (features.pixels[2 * i + 1] - camera.cy) / f;
        let z = features.depths[i];
        let rows = [
            [-1.0 / z, 0.0, x / z, x * y, -(1.0 + x * x), y],
            [0.0, -1.0 / z, y / z, 1.0 + y * y, -x * y, -x],
        ];
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                j[(2 * i + r, c)] = f * v;
            }
        }
    }
    j
}

/// Left pseudo-inverse of a full-column-rank Jacobian.
pub(crate) fn left_pinv(j: &DMatrix<f64>) -> Result<DMatrix<f64>, ControlError> {
    let svd = j.clone().svd(true, true);
    let s = &svd.singular_values;
    let max = s.max();
    if s.len() < 6 || max.is_nan() || max <= 0.0 || s.min() / max < 1e-9 {
        return Err(ControlError::SingularJacobian);
    }
    svd.pseudo_inverse(0.0).map_err(|_| ControlError::SingularJacobian)
}

/// `u = k (J^T J)^-1 J^T (f_des - f_act)`, with `J` evaluated at `f_act`.
/// Returns the camera-frame twist.
pub fn ibvs_step(
    params: &IbvsParams,
    f_des: &[f64],
    f_act: &FeatureVector,
) -> Result<Twist, ControlError> {
    if f_act.len() < 3 {
        return Err(ControlError::SingularJacobian);
    }
    let j = feature_jacobian(f_act, &params.camera);
    let pinv = left_pinv(&j)?;
    let e = DVector::from_iterator(
        f_act.pixels.len(),
        f_des.iter().zip(&f_act.pixels).map(|(d, a)| d - a),
    );
    let u = pinv * e * params.gain;
    Ok(Twist::from_iterator(u.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_feature_rows() {
        let cam = Camera::default();
        let fv = FeatureVector {
            pixels: vec![cam.cx, cam.cy],
            depths: vec![1.0],
        };
        let j = feature_jacobian(&fv, &cam);
        let row: Vec<f64> = j.row(0).iter().copied().collect();
        assert_eq!(row, vec![-525.0, 0.0, 0.0, 0.0, -525.0, 0.0]);
    }

    #[test]
    fn four_features_give_eight_rows() {
        let cam = Camera::default();
        let pts = [(-0.1, -0.1), (0.1, -0.1), (0.1, 0.1), (-0.1, 0.1)]
            .map(|(x, y)| Point3::new(x, y, 0.5));
        let fv = cam.project(&Pose::identity(), &pts).unwrap();
        let j = feature_jacobian(&fv, &cam);
        assert_eq!((j.nrows(), j.ncols()), (8, 6));
        assert!(ibvs_step(&IbvsParams::default(), &fv.pixels, &fv).unwrap().norm() == 0.0);
    }

    #[test]
    fn collinear_features_are_singular() {
        let cam = Camera::default();
        let pts = [-0.1, 0.0, 0.1].map(|x| Point3::new(x, 0.0, 0.5));
        let fv = cam.project(&Pose::identity(), &pts).unwrap();
        let mut des = fv.pixels.clone();
        des[0] += 1.0;
        assert_eq!(
            ibvs_step(&IbvsParams::default(), &des, &fv),
            Err(ControlError::SingularJacobian)
        );
    }
}
