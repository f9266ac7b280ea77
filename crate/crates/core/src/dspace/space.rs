//! Per-contact admissible direction sets and their intersection.
//!
//! Each contact is a predicate over directions with a scalar key and an
//! inclusive threshold. The sort-based path orders directions by key and cuts
//! at the threshold with a binary search, then intersects sorted index lists
//! by merging: O(n log n) per contact.

use nalgebra::Vector3;

use super::DirectionSet;
use crate::error::SpaceError;
use crate::geometry::Direction;
use crate::model::{AssemblyModel, Ssr, SsrKind};

/// Half-space boundary tolerance.
pub const EPS_ANG: f64 = 1e-6;
/// Half-angle of the cone admitted by a concentric contact (5 degrees).
pub const EPS_CONE: f64 = 5.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactPredicate {
    /// `d . normal >= -EPS_ANG`
    HalfSpace(Direction),
    /// `|d . axis| >= cos(EPS_CONE)`: translation along either sense of the axis.
    Cone(Direction),
    /// No translation admitted.
    Blocked,
}

impl ContactPredicate {
    /// Predicate seen by `moving` for relation `ssr`. The second component of
    /// a pair sees planar relations mirrored.
    pub fn for_component(ssr: &Ssr, moving: &str) -> ContactPredicate {
        let sign = if ssr.components.0 == moving { 1.0 } else { -1.0 };
        match ssr.kind {
            SsrKind::PlaneContact | SsrKind::Congruent => {
                ContactPredicate::HalfSpace(Direction::new_unchecked(
                    ssr.geometry.direction.into_inner() * sign,
                ))
            }
            SsrKind::Concentric => ContactPredicate::Cone(ssr.geometry.direction),
            SsrKind::Screwed => ContactPredicate::Blocked,
        }
    }

    fn key(&self, d: &Vector3<f64>) -> f64 {
        match self {
            ContactPredicate::HalfSpace(n) => d.dot(n),
            ContactPredicate::Cone(a) => d.dot(a).abs(),
            ContactPredicate::Blocked => f64::NEG_INFINITY,
        }
    }

    fn threshold(&self) -> f64 {
        match self {
            ContactPredicate::HalfSpace(_) => -EPS_ANG,
            ContactPredicate::Cone(_) => EPS_CONE.cos(),
            ContactPredicate::Blocked => f64::INFINITY,
        }
    }

    pub fn admits(&self, d: &Vector3<f64>) -> bool {
        self.key(d) >= self.threshold()
    }

    /// Signed angular margin of `d` to this predicate's boundary (radians).
    pub fn margin(&self, d: &Vector3<f64>) -> f64 {
        match self {
            ContactPredicate::HalfSpace(n) => d.dot(n).clamp(-1.0, 1.0).asin(),
            ContactPredicate::Cone(a) => EPS_CONE - d.dot(a).abs().clamp(0.0, 1.0).acos(),
            ContactPredicate::Blocked => f64::NEG_INFINITY,
        }
    }

    /// Member indices (ascending) among `candidates`, via sort and cut.
    fn admitted_indices(&self, dirs: &[Vector3<f64>]) -> Vec<u32> {
        if matches!(self, ContactPredicate::Blocked) {
            return Vec::new();
        }
        let mut keyed: Vec<(f64, u32)> = dirs
            .iter()
            .enumerate()
            .map(|(i, d)| (self.key(d), i as u32))
            .collect();
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let threshold = self.threshold();
        let cut = keyed.partition_point(|(k, _)| *k < threshold);
        let mut out: Vec<u32> = keyed[cut..].iter().map(|(_, i)| *i).collect();
        out.sort_unstable();
        out
    }
}

/// Merge-intersection of two ascending index lists.
fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Space admitted by a single relation, from the point of view of its first
/// component.
pub fn contact_space(ssr: &Ssr, dirs: &DirectionSet) -> DirectionSet {
    let pred = ContactPredicate::for_component(ssr, &ssr.components.0);
    intersect_predicates(&[pred], dirs)
}

/// Intersects the given predicates with the current membership of `dirs`.
pub fn intersect_predicates(preds: &[ContactPredicate], dirs: &DirectionSet) -> DirectionSet {
    let mut members = dirs.members();
    for p in preds {
        if members.is_empty() {
            break;
        }
        let admitted = p.admitted_indices(dirs.directions());
        members = intersect_sorted(&members, &admitted);
    }
    dirs.with_members(&members)
}

pub fn predicates_for<'a>(
    relations: impl IntoIterator<Item = &'a Ssr>,
    c: &str,
) -> Vec<ContactPredicate> {
    relations
        .into_iter()
        .filter(|r| r.involves(c))
        .map(|r| ContactPredicate::for_component(r, c))
        .collect()
}

/// Disassembly space of `c` against an explicit relation set (used for
/// partially dismantled states).
pub fn relative_space<'a>(
    relations: impl IntoIterator<Item = &'a Ssr>,
    c: &str,
    dirs: &DirectionSet,
) -> DirectionSet {
    intersect_predicates(&predicates_for(relations, c), dirs)
}

/// Full disassembly space of component `c`: the intersection of every
/// contact's admissible set with the initial space.
pub fn disassembly_space(
    model: &AssemblyModel,
    c: &str,
    dirs: &DirectionSet,
) -> Result<DirectionSet, SpaceError> {
    if !model.contains(c) {
        return Err(SpaceError::UnknownComponent(c.to_string()));
    }
    Ok(relative_space(&model.relations, c, dirs))
}

/// Member direction with the largest minimum margin to all predicate
/// boundaries; ties go to the lowest index.
pub fn best_direction(space: &DirectionSet, preds: &[ContactPredicate]) -> Option<(u32, Direction)> {
    let mut best: Option<(u32, f64)> = None;
    for i in space.members() {
        let d = &space.directions()[i as usize];
        let m = preds
            .iter()
            .map(|p| p.margin(d))
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(_, bm)| m > bm) {
            best = Some((i, m));
        }
    }
    best.map(|(i, _)| (i, Direction::new_normalize(space.directions()[i as usize])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dspace::sample_sphere;
    use crate::geometry::Pose;
    use crate::model::{FeatureGeometry, FeatureKind};

    fn ssr(kind: SsrKind, dir: Vector3<f64>) -> Ssr {
        let fk = if matches!(kind, SsrKind::PlaneContact | SsrKind::Congruent) {
            FeatureKind::Plane
        } else {
            FeatureKind::Cylinder
        };
        Ssr {
            kind,
            components: ("a".into(), "b".into()),
            geometry: FeatureGeometry {
                kind: fk,
                frame: Pose::identity(),
                direction: Direction::new_normalize(dir),
            },
            feature_vector: dir.normalize(),
        }
    }

    #[test]
    fn plane_contact_is_hemisphere() {
        let dirs = sample_sphere(10_000, 1);
        let s = contact_space(&ssr(SsrKind::PlaneContact, Vector3::z()), &dirs);
        assert!((s.fraction() - 0.5).abs() <= 0.02);
    }

    #[test]
    fn screwed_blocks_everything() {
        let dirs = sample_sphere(1_000, 1);
        assert!(contact_space(&ssr(SsrKind::Screwed, Vector3::z()), &dirs).is_empty_space());
    }

    #[test]
    fn concentric_cap_measure() {
        let dirs = sample_sphere(10_000, 2);
        let s = contact_space(&ssr(SsrKind::Concentric, Vector3::x()), &dirs);
        // two caps: 2 * (1 - cos 5deg) / 2
        let expected = 1.0 - EPS_CONE.cos();
        assert!((s.fraction() - expected).abs() <= 0.002, "{}", s.fraction());
    }

    #[test]
    fn second_component_sees_mirrored_half_space() {
        let r = ssr(SsrKind::PlaneContact, Vector3::z());
        let p = ContactPredicate::for_component(&r, "b");
        assert!(p.admits(&-Vector3::z()));
        assert!(!p.admits(&Vector3::z()));
    }

    #[test]
    fn merge_intersection() {
        assert_eq!(intersect_sorted(&[1, 3, 5, 7], &[2, 3, 7, 9]), vec![3, 7]);
        assert!(intersect_sorted(&[], &[1]).is_empty());
    }

    #[test]
    fn best_direction_prefers_cap_center() {
        let dirs = sample_sphere(10_000, 4);
        let preds = [
            ContactPredicate::HalfSpace(Direction::new_normalize(Vector3::z())),
            ContactPredicate::HalfSpace(Direction::new_normalize(Vector3::x())),
        ];
        let space = intersect_predicates(&preds, &dirs);
        let (_, d) = best_direction(&space, &preds).unwrap();
        let ideal = Vector3::new(1.0, 0.0, 1.0).normalize();
        assert!(d.dot(&ideal) > 0.99);
    }
}
