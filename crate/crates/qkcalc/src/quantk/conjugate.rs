//! The power-series conjugator between nearby almost projections.

use super::witness::{Parity, QkError, QkWitness};
use crate::algebra::FilteredElement;
use crate::linalg::{C64, invsqrt_coefficients, series_cutoff_invsqrt};

/// Result of the conjugator construction: `W p W*` is close to `q` and the
/// propagation of W obeys the exact budget `(4 n_eps + 2) r`.
#[derive(Clone, Debug)]
pub struct ConjugatorResult {
    pub w: FilteredElement,
    /// Measured `|W p W* - q|`.
    pub achieved: f64,
    /// Measured unitary defect of W.
    pub defect: f64,
    /// Series cutoff used.
    pub n_eps: usize,
    /// Exact propagation of W.
    pub propagation: f64,
    /// The propagation budget `(4 n_eps + 2) r`.
    pub budget: f64,
}

/// Builds the almost unitary `W = (z'/2) sum_k a_k ((z'* z' - 4)/4)^k` from
/// the product of reflections `z' = (2q - 1)(2p - 1) + 1`, which intertwines
/// p towards q (`z' p = q z'` holds exactly for exact projections), so that
/// `W p W*` lands close to q whenever `|p - q| < 1/16`. The coefficients are
/// the power series of `(1 + t)^(-1/2)` truncated at the tail cutoff.
pub fn conjugator(
    p: &QkWitness,
    q: &QkWitness,
    eps: f64,
    radius: f64,
) -> Result<ConjugatorResult, QkError> {
    assert!(p.parity == Parity::Projection && q.parity == Parity::Projection);
    assert!(eps > 0.0 && eps < 0.25);
    let distance = p.element.sub(&q.element)?.norm();
    if distance >= 1.0 / 16.0 {
        return Err(QkError::TooFarApart { distance });
    }
    let unit = p.element.unit_like()?;
    let two_p = p.element.scale_real(2.0).sub(&unit)?;
    let two_q = q.element.scale_real(2.0).sub(&unit)?;
    let z = two_q.mul(&two_p)?.add(&unit)?;

    let n_eps = series_cutoff_invsqrt(eps);
    let coeffs = invsqrt_coefficients(n_eps + 1);
    // m = (z'* z' - 4) / 4 has spectrum in [-1/2, 1/2].
    let m = z.adjoint().mul(&z)?.sub(&unit.scale_real(4.0))?.scale_real(0.25);
    // Horner evaluation of sum_{k=0}^{n_eps} a_k m^k.
    let mut series = unit.scale_real(coeffs[n_eps]);
    for k in (0..n_eps).rev() {
        series = series.mul(&m)?.add(&unit.scale_real(coeffs[k]))?;
    }
    let w = z.scale_real(0.5).mul(&series)?;

    let achieved = w.mul(&p.element)?.mul(&w.adjoint())?.sub(&q.element)?.norm();
    let left = w.adjoint().mul(&w)?.sub(&unit)?.norm();
    let right = w.mul(&w.adjoint())?.sub(&unit)?.norm();
    Ok(ConjugatorResult {
        propagation: w.propagation(),
        budget: (4.0 * n_eps as f64 + 2.0) * radius,
        w,
        achieved,
        defect: left.max(right),
        n_eps,
    })
}
