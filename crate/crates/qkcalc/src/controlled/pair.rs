//! The banded Toeplitz pairing inverting the suspension loop on the
//! invariant level.

use crate::algebra::{AlgebraKind, FilteredElement, ToeplitzElement};
use crate::linalg::{C64, CMatrix};
use crate::quantk::{ClassParity, Parity, QkClass, QkError, check_witness};

/// Result of pairing a suspension loop class with the shift model.
#[derive(Clone, Debug)]
pub struct ToeplitzPairResult {
    /// Even class of `W* diag(1, 0) W` in the window model, with the rank
    /// offset accounting for both the scalar background and the loop's
    /// winding correction.
    pub class: QkClass,
    /// Upper bound on `|P^2 - P|` on the interior compression.
    pub interior_defect: f64,
    /// Upper bound on the distance to `diag(1, (1 - S S*) (x) q)`.
    pub target_distance: f64,
    /// interior_defect / eps.
    pub c_emp: f64,
    pub bandwidth: u32,
    pub window: usize,
    pub propagation: f64,
}

/// Builds `W = [[S, 1 - S S*], [0, S*]] (x) q + 1_2 (x) (1 - q)` from the
/// projection witness generating the loop class, computes
/// `P = W* diag(1, 0) W`, certifies that P is an almost projection close to
/// `diag(1, (1 - S S*) (x) q)` on the interior compression, and returns the
/// even class whose invariant matches the loop's.
pub fn toeplitz_pair(class: &QkClass, window: usize) -> Result<ToeplitzPairResult, QkError> {
    if class.parity != ClassParity::Odd {
        return Err(QkError::UnsupportedAlgebra);
    }
    let origin = class.origin.as_ref().ok_or(QkError::UnsupportedAlgebra)?;
    let qw = &origin.projection;
    let eps = qw.epsilon;
    let radius = qw.radius;
    let q = qw.element.to_matrix()?;
    let m = q.rows();
    let bandwidth = (origin.winding_offset as u32).max(1);
    if window < 32 * bandwidth as usize {
        return Err(QkError::WindowTooSmall(format!(
            "window {window} below 32 x bandwidth {bandwidth}"
        )));
    }

    let coeff = AlgebraKind::Scalar { dim: 2 * m };
    let zero = CMatrix::zeros(m, m);
    let block = |tl: &CMatrix, tr: &CMatrix, bl: &CMatrix, br: &CMatrix| -> CMatrix {
        CMatrix::from_fn(2 * m, 2 * m, |i, j| {
            let (bi, ii) = (i / m, i % m);
            let (bj, jj) = (j / m, j % m);
            match (bi, bj) {
                (0, 0) => tl.get(ii, jj),
                (0, 1) => tr.get(ii, jj),
                (1, 0) => bl.get(ii, jj),
                (1, 1) => br.get(ii, jj),
                _ => unreachable!(),
            }
        })
    };
    let one_minus_q = CMatrix::identity(m).sub(&q);

    // W = [[S, 1 - SS*], [0, S*]] (x) q + I_2 (x) (1 - q), in normal form:
    // S (x) e11 q + (1 - SS*) (x) e12 q + S* (x) e22 q + 1 (x) I2 (1 - q).
    let mut terms = std::collections::BTreeMap::new();
    terms.insert((1u32, 0u32), block(&q, &zero, &zero, &zero));
    terms.insert((0u32, 1u32), block(&zero, &zero, &zero, &q));
    // (1 - SS*) = S^0 S*^0 - S^1 S*^1 on the top-right q block, plus the
    // constant 1 (x) (1 - q).
    let mut constant = block(&zero, &q, &zero, &zero);
    constant = constant.add(&block(&one_minus_q, &zero, &zero, &one_minus_q));
    terms.insert((0u32, 0u32), constant);
    terms.insert((1u32, 1u32), block(&zero, &q.scale(C64::new(-1.0, 0.0)), &zero, &zero));
    let w = ToeplitzElement::new(coeff.clone(), terms)?;

    let d_top = ToeplitzElement::constant(
        block(&CMatrix::identity(m), &zero, &zero, &zero),
        coeff.clone(),
    )?;
    let p = w.adjoint().mul(&d_top)?.mul(&w)?;
    let p = p.add(&p.adjoint())?.scale(C64::new(0.5, 0.0));

    // Interior defect |P^2 - P| and distance to diag(1, (1 - SS*) (x) q),
    // certified by symbol supremum plus compact window norm.
    let defect_op = p.mul(&p)?.sub(&p)?;
    let interior_defect = defect_op.norm_bound();
    let mut target_terms = std::collections::BTreeMap::new();
    target_terms.insert((0u32, 0u32), block(&CMatrix::identity(m), &zero, &zero, &q));
    target_terms.insert((1u32, 1u32), block(&zero, &zero, &zero, &q.scale(C64::new(-1.0, 0.0))));
    let target = ToeplitzElement::new(coeff, target_terms)?;
    let target_distance = p.sub(&target)?.norm_bound();

    let propagation = FilteredElement::from_toeplitz(p.clone()).propagation();
    let element = FilteredElement::from_toeplitz(p);
    let defect_meas = interior_defect.max(1e-12) * 1.0001;
    if defect_meas >= 0.25 {
        return Err(QkError::DefectTooLarge { measured: interior_defect, allowed: 0.25 });
    }
    let witness = check_witness(&element, Parity::Projection, defect_meas, 2.0 * radius)?;
    let class_out = QkClass {
        parity: ClassParity::Even,
        witness,
        rank_offset: m + origin.winding_offset,
        origin: None,
    };
    Ok(ToeplitzPairResult {
        class: class_out,
        interior_defect,
        target_distance,
        c_emp: interior_defect / eps,
        bandwidth,
        window,
        propagation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controlled::boundary::z_loop;
    use crate::quantk::{k0_invariant, k1_loop_invariant};

    fn projection_witness(values: &[f64], eps: f64) -> crate::quantk::QkWitness {
        let p = FilteredElement::scalar_matrix(CMatrix::diag_real(values)).unwrap();
        check_witness(&p, Parity::Projection, eps, 1.0).unwrap()
    }

    #[test]
    fn zero_projection_gives_trivial_class() {
        let w = projection_witness(&[0.0, 0.0], 0.01);
        let loop_class = z_loop(&w, 0, 64).unwrap();
        let out = toeplitz_pair(&loop_class, 256).unwrap();
        assert_eq!(k0_invariant(&out.class).unwrap(), 0);
        assert!(out.interior_defect < 1e-10);
    }

    #[test]
    fn rank_one_projection_pairs_to_one() {
        let w = projection_witness(&[1.0, 0.0], 0.01);
        let loop_class = z_loop(&w, 0, 64).unwrap();
        assert_eq!(k1_loop_invariant(&loop_class).unwrap(), 1);
        let out = toeplitz_pair(&loop_class, 256).unwrap();
        assert_eq!(k0_invariant(&out.class).unwrap(), 1);
        // For an exact projection W is exactly unitary and P exactly a
        // projection.
        assert!(out.interior_defect < 1e-10);
        assert!(out.target_distance < 1e-10);
    }

    #[test]
    fn winding_offset_is_preserved() {
        let w = projection_witness(&[1.0, 1.0, 0.0], 0.01);
        let loop_class = z_loop(&w, 1, 64).unwrap();
        assert_eq!(k1_loop_invariant(&loop_class).unwrap(), 1);
        let out = toeplitz_pair(&loop_class, 256).unwrap();
        assert_eq!(k0_invariant(&out.class).unwrap(), 1);
    }

    #[test]
    fn window_gate() {
        let w = projection_witness(&[1.0, 0.0, 0.0], 0.01);
        let loop_class = z_loop(&w, 2, 64).unwrap();
        assert!(matches!(
            toeplitz_pair(&loop_class, 16),
            Err(QkError::WindowTooSmall(_))
        ));
    }
}
