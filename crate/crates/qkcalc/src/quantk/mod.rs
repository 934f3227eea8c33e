//! The eps-r calculus: witnesses, normal forms, explicit homotopies, the
//! power-series conjugator, class representatives and their computable
//! invariants.

pub mod conjugate;
pub mod control;
pub mod homotopy;
pub mod invariants;
pub mod witness;

pub use conjugate::{ConjugatorResult, conjugator};
pub use control::{ControlError, ControlPair};
pub use homotopy::{
    DEFAULT_GRID, SAMPLE_CAP, SampledHomotopy, inverse_homotopy, rotation_homotopy,
    scalar_projection_path, scalar_unitary_path,
};
pub use invariants::{ClassParity, QkClass, ZLoopOrigin, k0_invariant, k1_loop_invariant, relax};
pub use witness::{Parity, QkError, QkWitness, check_witness, kappa0, kappa1};
