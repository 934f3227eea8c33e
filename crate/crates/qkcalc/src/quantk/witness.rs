//! Witness checks and normal forms for almost projections and almost
//! unitaries.

use crate::algebra::{AlgebraError, FilteredElement, Payload};
use crate::linalg::{C64, CMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QkError {
    #[error("defect too large: measured {measured:.6e}, allowed {allowed:.6e}")]
    DefectTooLarge { measured: f64, allowed: f64 },
    #[error("propagation exceeded: measured {measured}, allowed {allowed}")]
    PropagationExceeded { measured: f64, allowed: f64 },
    #[error("not self-adjoint: defect {defect:.3e}")]
    NotSelfAdjoint { defect: f64 },
    #[error("candidates too far apart: distance {distance:.4}")]
    TooFarApart { distance: f64 },
    #[error("relaxation must not shrink parameters")]
    BadRelaxation,
    #[error("no computable invariant model for this algebra")]
    UnsupportedAlgebra,
    #[error("sampling refinement cap reached ({cap})")]
    InsufficientSampling { cap: usize },
    #[error("homotopy margin not met: gap {gap:.4e}, margin {margin:.4e}")]
    MarginNotMet { gap: f64, margin: f64 },
    #[error("path too coarse: consecutive gap {gap:.4} exceeds 1/8")]
    PathTooCoarse { gap: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Self-adjointness defect tolerated on projection witnesses.
pub const WITNESS_ADJ_TOL: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Parity {
    Projection,
    Unitary,
}

/// An accepted almost projection or almost unitary with its measured
/// defects: the element is self-adjoint with `|p^2 - p| < eps` (projection)
/// or satisfies `|u*u - 1|, |uu* - 1| < eps` (unitary), with propagation at
/// most the radius.
#[derive(Clone, Debug)]
pub struct QkWitness {
    pub element: FilteredElement,
    pub parity: Parity,
    pub epsilon: f64,
    pub radius: f64,
    pub defect_sq: f64,
    pub defect_adj: f64,
}

/// Validates a witness at (eps, r), measuring its defects. Projections are
/// symmetrized on input when the self-adjointness defect is below
/// [`WITNESS_ADJ_TOL`].
pub fn check_witness(
    x: &FilteredElement,
    parity: Parity,
    eps: f64,
    radius: f64,
) -> Result<QkWitness, QkError> {
    assert!(eps > 0.0 && eps < 0.25, "witness checks need eps in (0, 1/4)");
    let propagation = x.propagation();
    if propagation > radius {
        return Err(QkError::PropagationExceeded { measured: propagation, allowed: radius });
    }
    match parity {
        Parity::Projection => {
            let defect_adj = x.sub(&x.adjoint())?.norm();
            if defect_adj > WITNESS_ADJ_TOL {
                return Err(QkError::NotSelfAdjoint { defect: defect_adj });
            }
            let sym = x.add(&x.adjoint())?.scale(C64::new(0.5, 0.0));
            let defect_sq = sym.mul(&sym)?.sub(&sym)?.norm();
            if defect_sq >= eps {
                return Err(QkError::DefectTooLarge { measured: defect_sq, allowed: eps });
            }
            Ok(QkWitness {
                element: sym,
                parity,
                epsilon: eps,
                radius,
                defect_sq,
                defect_adj,
            })
        }
        Parity::Unitary => {
            let unit = x.unit_like()?;
            let left = x.adjoint().mul(x)?.sub(&unit)?.norm();
            let right = x.mul(&x.adjoint())?.sub(&unit)?.norm();
            let defect_sq = left.max(right);
            if defect_sq >= eps {
                return Err(QkError::DefectTooLarge { measured: defect_sq, allowed: eps });
            }
            Ok(QkWitness {
                element: x.clone(),
                parity,
                epsilon: eps,
                radius,
                defect_sq,
                defect_adj: 0.0,
            })
        }
    }
}

fn kappa0_matrix(m: &CMatrix) -> Result<CMatrix, QkError> {
    let spectrum = m.herm_eig().map_err(AlgebraError::from)?;
    Ok(spectrum.apply(|l| if l > 0.5 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
}

fn kappa1_matrix(m: &CMatrix) -> Result<CMatrix, QkError> {
    let gram = m.adjoint().mul(m);
    let spectrum = gram.herm_eig().map_err(AlgebraError::from)?;
    let inv_sqrt = spectrum.apply(|l| C64::new(1.0 / l.max(1e-300).sqrt(), 0.0));
    Ok(m.mul(&inv_sqrt))
}

fn map_matrixwise(
    x: &FilteredElement,
    f: &dyn Fn(&CMatrix) -> Result<CMatrix, QkError>,
) -> Result<FilteredElement, QkError> {
    match &x.payload {
        Payload::Scalar(m) => Ok(FilteredElement::scalar_matrix(f(m)?).map_err(QkError::from)?),
        Payload::Band { space, block_dim, matrix } => {
            Ok(FilteredElement::band(space.clone(), *block_dim, f(matrix)?)?)
        }
        Payload::Path { vanish_at_zero, vanish_at_one, samples } => {
            let mapped: Result<Vec<FilteredElement>, QkError> =
                samples.iter().map(|s| map_matrixwise(s, f)).collect();
            Ok(FilteredElement::path(mapped?, *vanish_at_zero, *vanish_at_one)?)
        }
        Payload::Unitized { inner, scalar } => {
            // kappa of (a_t + z) sample by sample, re-centered so the scalar
            // part is kappa(z); at a vanishing endpoint the sample is z and
            // the inner part vanishes again.
            let new_scalar = f(scalar)?;
            let count = x.sample_count().expect("unitized inner is a path");
            let (v0, v1) = inner.path_flags().expect("unitized inner is a path");
            let mut samples = Vec::with_capacity(count);
            for i in 0..count {
                let eval = x.eval_sample(i)?;
                let mapped = map_matrixwise(&eval, f)?;
                let embedded = crate::algebra::embed_scalar(&new_scalar, &mapped.kind())?;
                samples.push(mapped.sub(&embedded)?);
            }
            Ok(FilteredElement::unitized(
                FilteredElement::path(samples, v0, v1)?,
                new_scalar,
            )?)
        }
        _ => Err(QkError::UnsupportedAlgebra),
    }
}

/// Exact projection canonically associated to an almost projection by
/// spectral thresholding at 1/2; within 2 eps of the input, generally with
/// unbounded propagation.
pub fn kappa0(w: &QkWitness) -> Result<FilteredElement, QkError> {
    assert!(w.parity == Parity::Projection, "kappa0 needs a projection witness");
    map_matrixwise(&w.element, &kappa0_matrix)
}

/// Exact unitary `u (u*u)^(-1/2)` associated to an almost unitary; within
/// eps of the input.
pub fn kappa1(w: &QkWitness) -> Result<FilteredElement, QkError> {
    assert!(w.parity == Parity::Unitary, "kappa1 needs a unitary witness");
    map_matrixwise(&w.element, &kappa1_matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteMetricSpace;
    use crate::linalg::CMatrix;
    use std::sync::Arc;

    fn two_by_two() -> FilteredElement {
        FilteredElement::scalar_matrix(
            CMatrix::from_rows(&[
                vec![C64::new(0.55, 0.0), C64::new(0.5, 0.0)],
                vec![C64::new(0.5, 0.0), C64::new(0.45, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn exact_projection_has_zero_defect() {
        let p = FilteredElement::scalar_matrix(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        let w = check_witness(&p, Parity::Projection, 0.1, 5.0).unwrap();
        assert_eq!(w.defect_sq, 0.0);
        assert_eq!(w.defect_adj, 0.0);
    }

    #[test]
    fn almost_projection_defect_measured() {
        // Closed form: the defect of [[0.55, 0.5], [0.5, 0.45]] is 0.0025.
        let w = check_witness(&two_by_two(), Parity::Projection, 0.01, 1.0).unwrap();
        assert!((w.defect_sq - 0.0025).abs() < 1e-12);
        let rejected = check_witness(&two_by_two(), Parity::Projection, 0.002, 1.0);
        assert!(matches!(rejected, Err(QkError::DefectTooLarge { .. })));
    }

    #[test]
    fn propagation_gate() {
        let space = Arc::new(FiniteMetricSpace::line(4));
        let mut m = CMatrix::zeros(4, 4);
        m.set(0, 0, C64::new(1.0, 0.0));
        m.set(0, 2, C64::new(0.01, 0.0));
        m.set(2, 0, C64::new(0.01, 0.0));
        let x = FilteredElement::band(space, 1, m).unwrap();
        let err = check_witness(&x, Parity::Projection, 0.1, 1.0);
        assert!(matches!(err, Err(QkError::PropagationExceeded { .. })));
    }

    #[test]
    fn kappa0_two_by_two_rank_one() {
        let w = check_witness(&two_by_two(), Parity::Projection, 0.01, 1.0).unwrap();
        let k = kappa0(&w).unwrap();
        let km = k.to_matrix().unwrap();
        // Exact projection of rank one.
        assert!(km.mul(&km).sub(&km).op_norm() <= 1e-10);
        let spectrum = km.herm_eig().unwrap();
        assert_eq!(spectrum.count_above_half(), 1);
        // The distance is the eigenvalue displacement (1 - sqrt(1.01))/2,
        // slightly below the 0.0025 defect.
        let dist = w.element.sub(&k).unwrap().norm();
        assert!((dist - 0.002493781056044514).abs() < 1e-10);
        assert!(dist < 2.0 * 0.01);
    }

    #[test]
    fn kappa0_fixes_exact_projections() {
        let p = FilteredElement::scalar_matrix(CMatrix::diag_real(&[1.0, 1.0, 0.0])).unwrap();
        let w = check_witness(&p, Parity::Projection, 0.1, 1.0).unwrap();
        let k = kappa0(&w).unwrap();
        assert!(k.sub(&p).unwrap().norm() < 1e-12);
    }

    #[test]
    fn kappa1_scalar_polar() {
        // 1.01 times a phase normalizes to the phase.
        let u = FilteredElement::scalar_matrix(
            CMatrix::identity(1).scale(C64::from_polar(1.01, 0.7)),
        )
        .unwrap();
        let w = check_witness(&u, Parity::Unitary, 0.1, 1.0).unwrap();
        let k = kappa1(&w).unwrap();
        let km = k.to_matrix().unwrap();
        assert!((km.get(0, 0) - C64::from_polar(1.0, 0.7)).norm() < 1e-12);
        assert!((w.element.sub(&k).unwrap().norm() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn kappa1_fixes_exact_unitaries() {
        let u = FilteredElement::scalar_matrix(
            CMatrix::from_rows(&[
                vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let w = check_witness(&u, Parity::Unitary, 0.1, 1.0).unwrap();
        assert_eq!(w.defect_sq, 0.0);
        let k = kappa1(&w).unwrap();
        assert!(k.sub(&u).unwrap().norm() < 1e-12);
    }
}
