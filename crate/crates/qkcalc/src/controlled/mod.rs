//! Semi-split filtered extensions and their explicit controlled boundary
//! constructions: the unitary lift, the truncated-exponential even
//! boundary, the odd index boundary, suspension loops, the banded Toeplitz
//! pairing, mapping cones, and instance-level exactness probes.

pub mod boundary;
pub mod extension;
pub mod mapping_cone;
pub mod pair;
pub mod probe;

pub use crate::algebra::ToeplitzElement as BandedToeplitzElement;
pub use boundary::{
    BoundaryEvenResult, BoundaryOddResult, UnitaryLiftResult, boundary_even, boundary_odd,
    unitary_lift, z_loop,
};
pub use extension::{SectionProfile, SemisplitExtension};
pub use mapping_cone::{CqElement, MappingCone};
pub use pair::{ToeplitzPairResult, toeplitz_pair};
pub use probe::{
    OperationReport, ProbePosition, ProbeReport, ReportInputs, ReportInvariants, ReportMeasured,
    exactness_probe_ideal, exactness_probe_pulled_back,
};

/// The cone extension of an algebra: 0 -> SA -> CA -> A -> 0 with the
/// section a -> (t -> t a).
pub fn make_cone_extension(base: crate::algebra::AlgebraKind, grid: usize) -> SemisplitExtension {
    SemisplitExtension::cone(base, grid)
}

/// The mapping cone of the quotient map of an extension.
pub fn make_mapping_cone(ext: &SemisplitExtension) -> MappingCone<'_> {
    MappingCone::new(ext)
}
