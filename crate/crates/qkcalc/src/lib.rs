//! Numerical calculus for almost projections and almost unitaries in
//! filtered operator algebras.
//!
//! The crate represents elements of concrete filtered *-algebras (matrix,
//! band, group convolution, path and Toeplitz-type algebras) with exact
//! propagation tracking, implements the explicit constructions of the
//! quantitative calculus (normal forms, homotopies, conjugators, controlled
//! boundary maps of semi-split extensions, Rips-complex projections), and
//! ships randomized verification suites that measure the empirical constants
//! of every bound the constructions are supposed to satisfy.

pub mod algebra;
pub mod controlled;
pub mod geometry;
pub mod linalg;
pub mod quantk;
pub mod suite;

pub use algebra::{AlgebraError, AlgebraKind, FilteredElement, FiniteMetricSpace};
pub use linalg::{C64, CMatrix, HermitianSpectrum, TAU};
