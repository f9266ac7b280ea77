use std::sync::Arc;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sampled unit directions with a membership mask.
///
/// The direction array is shared between all sets derived from one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Arc<Vec<Vector3<f64>>>,
    mask: Vec<bool>,
}

impl DirectionSet {
    pub fn directions(&self) -> &[Vector3<f64>] {
        &self.directions
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.len() as f64
    }

    pub fn is_empty_space(&self) -> bool {
        !self.mask.iter().any(|m| *m)
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|m| *m)
    }

    /// Indices of member directions, ascending.
    pub fn members(&self) -> Vec<u32> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.then_some(i as u32))
            .collect()
    }

    /// Same directions, new mask. Panics if the mask length differs.
    pub fn with_mask(&self, mask: Vec<bool>) -> DirectionSet {
        assert_eq!(mask.len(), self.directions.len(), "mask length mismatch");
        DirectionSet {
            directions: Arc::clone(&self.directions),
            mask,
        }
    }

    pub fn with_members(&self, members: &[u32]) -> DirectionSet {
        let mut mask = vec![false; self.len()];
        for &i in members {
            mask[i as usize] = true;
        }
        self.with_mask(mask)
    }

    /// Full sphere over the same directions.
    pub fn full(&self) -> DirectionSet {
        self.with_mask(vec![true; self.len()])
    }

    /// Debug dump: one `x,y,z,member` row per direction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,member\n");
        for (d, m) in self.directions.iter().zip(&self.mask) {
            out.push_str(&format!("{},{},{},{}\n", d.x, d.y, d.z, u8::from(*m)));
        }
        out
    }
}

/// Fibonacci lattice on the unit sphere, rotated by a seed-derived rotation.
/// The initial space is the whole sphere.
pub fn sample_sphere(n: usize, seed: u64) -> DirectionSet {
    assert!(n >= 1, "need at least one direction");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let rot = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);

    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let directions = (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            let d = rot * Vector3::new(r * phi.cos(), r * phi.sin(), z);
            d.normalize()
        })
        .collect();
    DirectionSet {
        directions: Arc::new(directions),
        mask: vec![true; n],
    }
}
