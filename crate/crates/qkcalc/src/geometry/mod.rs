//! Word metrics on finitely generated groups, discretized Rips complexes,
//! cutoff partitions of unity and the canonical projection they generate.

pub mod group;
pub mod rips;

pub use group::{GeneratedGroup, GroupElement, GroupError, GroupSpec};
pub use rips::{CutoffFunction, EPhiProjection, RipsVertex, cutoff, e_phi, rips_vertices, s_const};
