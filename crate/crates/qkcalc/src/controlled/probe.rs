//! Instance-level exactness probes for semi-split extensions, and the JSON
//! report schema shared by the boundary operations.

use super::boundary::boundary_even;
use super::extension::SemisplitExtension;
use crate::algebra::FilteredElement;
use crate::linalg::TAU;
use crate::quantk::{ClassParity, QkClass, QkError, k1_loop_invariant};
use serde::Serialize;

/// Report schema for a controlled operation run.
#[derive(Clone, Debug, Serialize)]
pub struct OperationReport {
    pub operation: String,
    pub inputs: ReportInputs,
    pub measured: ReportMeasured,
    pub invariants: ReportInvariants,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportInputs {
    pub eps: f64,
    pub r: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct ReportMeasured {
    pub defect: f64,
    pub propagation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_emp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_emp: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct ReportInvariants {
    #[serde(rename = "in", skip_serializing_if = "Option::is_none")]
    pub input: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<i64>,
}

/// Which exactness relation a probe exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProbePosition {
    /// q o j = 0 on ideal representatives, exactly.
    IdealToQuotient,
    /// Classes pulled back from the total algebra have trivial boundary
    /// invariant.
    PulledBackBoundary,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub position: ProbePosition,
    /// Sup-entry of q(j(rep)) for the ideal probe; the boundary-loop
    /// invariant magnitude for the pulled-back probe.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_invariant: Option<i64>,
    pub pass: bool,
}

/// Probes `q o j = 0` on an ideal representative.
pub fn exactness_probe_ideal(
    ext: &SemisplitExtension,
    rep: &FilteredElement,
) -> Result<ProbeReport, QkError> {
    let included = ext.include(rep)?;
    let q = ext.quotient_map(&included)?;
    let residual = q.sup_entry();
    Ok(ProbeReport {
        position: ProbePosition::IdealToQuotient,
        residual,
        boundary_invariant: None,
        pass: residual <= 10.0 * TAU,
    })
}

/// Probes that the even boundary of a class pulled back from the total
/// algebra carries the trivial invariant: the caller supplies a projection
/// class of the total algebra (a path of almost projections starting at its
/// scalar part); its endpoint class in the quotient must have vanishing
/// boundary winding.
pub fn exactness_probe_pulled_back(
    ext: &SemisplitExtension,
    total_class: &QkClass,
) -> Result<ProbeReport, QkError> {
    if total_class.parity != ClassParity::Even {
        return Err(QkError::UnsupportedAlgebra);
    }
    let element = &total_class.witness.element;
    let end = ext.quotient_map(element)?;
    let witness = crate::quantk::check_witness(
        &end,
        crate::quantk::Parity::Projection,
        total_class.witness.epsilon,
        total_class.witness.radius,
    )?;
    let quotient_class = QkClass::even(witness, total_class.rank_offset)?;
    let out = boundary_even(ext, &quotient_class)?;
    let invariant = k1_loop_invariant(&out.class)?;
    Ok(ProbeReport {
        position: ProbePosition::PulledBackBoundary,
        residual: invariant.unsigned_abs() as f64,
        boundary_invariant: Some(invariant),
        pass: invariant == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraKind, FiniteMetricSpace};
    use crate::linalg::{C64, CMatrix};
    use crate::quantk::{Parity, check_witness};
    use std::sync::Arc;

    #[test]
    fn ideal_probe_is_exact() {
        let space = Arc::new(FiniteMetricSpace::line(4));
        let kind = AlgebraKind::Band { space: space.clone(), block_dim: 1 };
        let ext = SemisplitExtension::cone(kind, 16);
        let a = FilteredElement::band(space, 1, CMatrix::diag_real(&[1.0, -0.5, 0.25, 0.0]))
            .unwrap();
        let j = FilteredElement::path_from_fn(16, true, true, |t| a.scale_real(t * (1.0 - t)))
            .unwrap();
        let report = exactness_probe_ideal(&ext, &j).unwrap();
        assert!(report.pass);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn pulled_back_class_has_trivial_boundary() {
        // A path of exact projections in the cone from a scalar projection:
        // conjugate diag(1, 0) by a rotation path pinned at t = 0.
        let ext = SemisplitExtension::cone(AlgebraKind::Scalar { dim: 2 }, 128);
        let e = CMatrix::diag_real(&[1.0, 0.0]);
        let inner = FilteredElement::path_from_fn(128, true, false, |t| {
            let angle = 0.3 * t;
            let v = CMatrix::from_rows(&[
                vec![C64::new(angle.cos(), 0.0), C64::new(-angle.sin(), 0.0)],
                vec![C64::new(angle.sin(), 0.0), C64::new(angle.cos(), 0.0)],
            ])
            .unwrap();
            FilteredElement::scalar_matrix(v.mul(&e).mul(&v.adjoint()).sub(&e)).unwrap()
        })
        .unwrap();
        let total = FilteredElement::unitized(inner, e.clone()).unwrap();
        let w = check_witness(&total, Parity::Projection, 0.01, 1.0).unwrap();
        let class = QkClass::even(w, 1).unwrap();
        let report = exactness_probe_pulled_back(&ext, &class).unwrap();
        assert!(report.pass, "invariant {:?}", report.boundary_invariant);
    }
}
