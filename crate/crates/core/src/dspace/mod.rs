//! Relative disassembly spaces on a sampled unit sphere and their symbolic
//! classification.

mod sdof;
mod space;
mod sphere;

pub use sdof::{build_graph, classify_sdof, SdofGraph, SdofLabel, SdofValue, AGPP_MIN_FRACTION};
pub use space::{
    best_direction, contact_space, disassembly_space, intersect_predicates, predicates_for,
    relative_space, ContactPredicate, EPS_ANG, EPS_CONE,
};
pub use sphere::{sample_sphere, DirectionSet};

/// Default number of sampled directions.
pub const DEFAULT_SAMPLES: usize = 10_000;
