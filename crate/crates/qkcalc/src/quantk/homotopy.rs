//! Discretized homotopies of almost projections and almost unitaries with
//! validity certificates.
//!
//! A sampled homotopy is certified when every sample passes the witness
//! check and consecutive samples are closer than the perturbation margin
//! (eps - defect)/4 for projections, /3 for unitaries, so the continuous
//! linear interpolant stays admissible. Builders refine the grid by midpoint
//! doubling until the margin is met.

use super::witness::{Parity, QkError, QkWitness, check_witness};
use crate::algebra::FilteredElement;
use crate::linalg::{C64, CMatrix};

/// Hard cap on grid refinement.
pub const SAMPLE_CAP: usize = 1 << 16;

/// Default grid size for homotopies.
pub const DEFAULT_GRID: usize = 256;

/// A discretized path of witnesses with validity and Lipschitz certificates.
#[derive(Clone, Debug)]
pub struct SampledHomotopy {
    samples: Vec<FilteredElement>,
    pub parity: Parity,
    pub epsilon: f64,
    pub radius: f64,
    /// Max over consecutive samples of the gap times the interval count.
    pub lipschitz_estimate: f64,
    /// Largest witness defect along the path.
    pub max_defect: f64,
    /// Largest consecutive gap.
    pub max_gap: f64,
}

impl SampledHomotopy {
    /// Certifies explicit samples as a homotopy at (eps, r).
    pub fn certify(
        samples: Vec<FilteredElement>,
        parity: Parity,
        epsilon: f64,
        radius: f64,
    ) -> Result<Self, QkError> {
        assert!(samples.len() >= 2, "a homotopy needs at least two samples");
        let mut max_defect: f64 = 0.0;
        for s in &samples {
            let w = check_witness(s, parity, epsilon, radius)?;
            max_defect = max_defect.max(w.defect_sq);
        }
        let margin = match parity {
            Parity::Projection => (epsilon - max_defect) / 4.0,
            Parity::Unitary => (epsilon - max_defect) / 3.0,
        };
        let mut max_gap: f64 = 0.0;
        for pair in samples.windows(2) {
            let gap = pair[1].sub(&pair[0])?.norm();
            max_gap = max_gap.max(gap);
        }
        if max_gap >= margin {
            return Err(QkError::MarginNotMet { gap: max_gap, margin });
        }
        let intervals = (samples.len() - 1) as f64;
        Ok(SampledHomotopy {
            samples,
            parity,
            epsilon,
            radius,
            lipschitz_estimate: max_gap * intervals,
            max_defect,
            max_gap,
        })
    }

    /// Samples a closure on successively doubled grids until the margin
    /// certificate holds.
    pub fn certify_from_fn(
        f: impl Fn(f64) -> Result<FilteredElement, QkError>,
        parity: Parity,
        epsilon: f64,
        radius: f64,
        start_intervals: usize,
    ) -> Result<Self, QkError> {
        let mut n = start_intervals.max(2);
        loop {
            let samples: Result<Vec<FilteredElement>, QkError> =
                (0..=n).map(|i| f(i as f64 / n as f64)).collect();
            match Self::certify(samples?, parity, epsilon, radius) {
                Ok(h) => return Ok(h),
                Err(QkError::MarginNotMet { .. }) if n < SAMPLE_CAP => n *= 2,
                Err(QkError::MarginNotMet { .. }) => {
                    return Err(QkError::InsufficientSampling { cap: SAMPLE_CAP })
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn samples(&self) -> &[FilteredElement] {
        &self.samples
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn start(&self) -> &FilteredElement {
        &self.samples[0]
    }

    pub fn end(&self) -> &FilteredElement {
        &self.samples[self.samples.len() - 1]
    }
}

/// Builds the 2x2 rotation matrix path h_t with entries
/// [[c^2, cs], [cs, s^2]], c = cos(pi t / 2), s = sin(pi t / 2).
fn rotation_profile(t: f64) -> (f64, f64) {
    let angle = std::f64::consts::FRAC_PI_2 * t;
    (angle.cos(), angle.sin())
}

/// The rotation homotopy from diag(1, 0) to diag(p, 1 - p) in the 2-fold
/// amplification: q_t = diag(p, 0) + (1 - p) (x) h_t, whose defect profile
/// is exactly sin^2(pi t / 2) times the defect of p.
pub fn rotation_homotopy(w: &QkWitness) -> Result<SampledHomotopy, QkError> {
    assert!(w.parity == Parity::Projection, "rotation homotopy needs a projection");
    let p = &w.element;
    let unit = p.unit_like()?;
    let one_minus_p = unit.sub(p)?;
    let sampler = |t: f64| -> Result<FilteredElement, QkError> {
        let (c, s) = rotation_profile(t);
        let a = p.add(&one_minus_p.scale_real(c * c))?;
        let b = one_minus_p.scale_real(c * s);
        let d = one_minus_p.scale_real(s * s);
        Ok(FilteredElement::from_block_grid(&[
            vec![a, b.clone()],
            vec![b, d],
        ])?)
    };
    SampledHomotopy::certify_from_fn(sampler, Parity::Projection, w.epsilon, w.radius, DEFAULT_GRID)
}

/// A homotopy of 3eps-2r-unitaries from diag(u, u*) to the identity: the
/// rotation conjugation from diag(u, u*) to diag(u u*, 1) followed by the
/// ray from u u* to 1.
pub fn inverse_homotopy(w: &QkWitness) -> Result<SampledHomotopy, QkError> {
    assert!(w.parity == Parity::Unitary, "inverse homotopy needs a unitary");
    let u = &w.element;
    let unit = u.unit_like()?;
    let uu = u.mul(&u.adjoint())?;
    let diag_u_1 = FilteredElement::block_diag(&[u.clone(), unit.clone()])?;
    let diag_us_1 = FilteredElement::block_diag(&[u.adjoint(), unit.clone()])?;
    let rot = |theta: f64| -> Result<FilteredElement, QkError> {
        let (c, s) = (theta.cos(), theta.sin());
        Ok(FilteredElement::from_block_grid(&[
            vec![unit.scale_real(c), unit.scale_real(-s)],
            vec![unit.scale_real(s), unit.scale_real(c)],
        ])?)
    };
    let sampler = |t: f64| -> Result<FilteredElement, QkError> {
        if t <= 0.5 {
            // Conjugation stage: t = 0 gives diag(u, u*), t = 1/2 gives
            // diag(u u*, 1).
            let theta = std::f64::consts::FRAC_PI_2 * (1.0 - 2.0 * t);
            let r = rot(theta)?;
            diag_u_1.mul(&r)?.mul(&diag_us_1)?.mul(&r.adjoint()).map_err(QkError::from)
        } else {
            // Ray stage towards the identity.
            let s = 2.0 * t - 1.0;
            let top = uu.scale_real(1.0 - s).add(&unit.scale_real(s))?;
            FilteredElement::block_diag(&[top, unit.clone()]).map_err(QkError::from)
        }
    };
    SampledHomotopy::certify_from_fn(
        sampler,
        Parity::Unitary,
        3.0 * w.epsilon,
        2.0 * w.radius,
        DEFAULT_GRID,
    )
}

/// Scalar-matrix path from an almost projection to the standard projection
/// of the same rank: eigenvalue interpolation onto {0, 1}, then a rotation
/// of the eigenbasis onto the standard one. Every sample keeps the defect
/// below eps and the count of eigenvalues above 1/2 constant.
pub fn scalar_projection_path(p: &CMatrix, eps: f64) -> Result<SampledHomotopy, QkError> {
    let w = check_witness(
        &FilteredElement::scalar_matrix(p.clone())?,
        Parity::Projection,
        eps,
        0.0,
    )?;
    let n = p.rows();
    let spectrum = w
        .element
        .to_matrix()
        .expect("scalar payload")
        .herm_eig()
        .map_err(crate::algebra::AlgebraError::from)?;
    let rank = spectrum.count_above_half();
    let u = spectrum.eigenvectors.clone();
    let u_for_path = u.clone();
    let eigen_path = move |t: f64| -> CMatrix {
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i != j {
                return C64::new(0.0, 0.0);
            }
            let l = spectrum.eigenvalues[i];
            let interpolated = if l > 0.5 { (1.0 - t) * l + t } else { (1.0 - t) * l };
            C64::new(interpolated, 0.0)
        });
        u_for_path.mul(&d).mul(&u_for_path.adjoint())
    };
    // kappa0(p) in the eigenbasis: ascending order puts the rank large
    // eigenvalues last; the standard form wants them first.
    let kappa = eigen_path(1.0);
    let perm = CMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 - i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let v = perm.mul(&u.adjoint());
    let (angles, vectors) = v.unitary_spectrum().map_err(crate::algebra::AlgebraError::from)?;
    let basis_path = move |t: f64| -> CMatrix {
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j { C64::from_polar(1.0, t * angles[i]) } else { C64::new(0.0, 0.0) }
        });
        vectors.mul(&d).mul(&vectors.adjoint())
    };
    let sampler = move |t: f64| -> Result<FilteredElement, QkError> {
        let m = if t <= 0.5 {
            eigen_path(2.0 * t)
        } else {
            let vt = basis_path(2.0 * t - 1.0);
            vt.mul(&kappa).mul(&vt.adjoint())
        };
        // Symmetrize away roundoff so the witness gate sees an exactly
        // self-adjoint sample.
        let sym = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
        Ok(FilteredElement::scalar_matrix(sym)?)
    };
    let homotopy =
        SampledHomotopy::certify_from_fn(sampler, Parity::Projection, eps, 0.0, DEFAULT_GRID)?;
    // Endpoint sanity: the path lands on diag(I_rank, 0).
    let target = CMatrix::from_fn(n, n, |i, j| {
        if i == j && i < rank { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let err = homotopy.end().to_matrix().expect("scalar payload").sub(&target).op_norm();
    if err > 1e-9 {
        return Err(QkError::MarginNotMet { gap: err, margin: 1e-9 });
    }
    Ok(homotopy)
}

/// Scalar-matrix path from an almost unitary to the identity: rescaling by
/// (u*u)^(-t/2) onto the unitary group, then the spectral geodesic to 1.
pub fn scalar_unitary_path(u: &CMatrix, eps: f64) -> Result<SampledHomotopy, QkError> {
    let _gate = check_witness(
        &FilteredElement::scalar_matrix(u.clone())?,
        Parity::Unitary,
        eps,
        0.0,
    )?;
    let n = u.rows();
    let gram = u.adjoint().mul(u);
    let spectrum = gram.herm_eig().map_err(crate::algebra::AlgebraError::from)?;
    let rescale = {
        let spectrum = spectrum.clone();
        move |t: f64| spectrum.apply(|l| C64::new(l.max(1e-300).powf(-t / 2.0), 0.0))
    };
    let v1 = u.mul(&rescale(1.0));
    let (angles, vectors) = v1.unitary_spectrum().map_err(crate::algebra::AlgebraError::from)?;
    let u_owned = u.clone();
    let sampler = move |t: f64| -> Result<FilteredElement, QkError> {
        let m = if t <= 0.5 {
            u_owned.mul(&rescale(2.0 * t))
        } else {
            let s = 2.0 * t - 1.0;
            let d = CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::from_polar(1.0, (1.0 - s) * angles[i])
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            vectors.mul(&d).mul(&vectors.adjoint())
        };
        Ok(FilteredElement::scalar_matrix(m)?)
    };
    let homotopy =
        SampledHomotopy::certify_from_fn(sampler, Parity::Unitary, eps, 0.0, DEFAULT_GRID)?;
    let err = homotopy
        .end()
        .to_matrix()
        .expect("scalar payload")
        .sub(&CMatrix::identity(n))
        .op_norm();
    if err > 1e-9 {
        return Err(QkError::MarginNotMet { gap: err, margin: 1e-9 });
    }
    Ok(homotopy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn exact_projection() -> QkWitness {
        let p = FilteredElement::scalar_matrix(CMatrix::diag_real(&[1.0, 0.0, 0.0])).unwrap();
        check_witness(&p, Parity::Projection, 0.05, 1.0).unwrap()
    }

    #[test]
    fn rotation_endpoints_and_exactness() {
        let w = exact_projection();
        let h = rotation_homotopy(&w).unwrap();
        // Start at diag(1, 0).
        let start = h.start().to_matrix().unwrap();
        let mut expected = CMatrix::zeros(6, 6);
        for i in 0..3 {
            expected.set(i, i, C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        }
        expected.set(0, 0, C64::new(1.0, 0.0));
        // diag(p, 0) + (1-p) (x) h_0 = diag(p + (1-p), 0) = diag(1, 0).
        for i in 0..3 {
            expected.set(i, i, C64::new(1.0, 0.0));
        }
        assert!(start.sub(&expected).op_norm() < 1e-12);
        // End at diag(p, 1-p).
        let end = h.end().to_matrix().unwrap();
        let mut target = CMatrix::zeros(6, 6);
        target.set(0, 0, C64::new(1.0, 0.0));
        target.set(4, 4, C64::new(1.0, 0.0));
        target.set(5, 5, C64::new(1.0, 0.0));
        assert!(end.sub(&target).op_norm() < 1e-12);
        // Exact input means every sample is an exact projection.
        assert!(h.max_defect < 1e-12);
        assert!(h.lipschitz_estimate <= 2.0 + 1e-6);
    }

    #[test]
    fn rotation_defect_profile() {
        // Defect of q_t is sin^2(pi t / 2) times the defect of p.
        let p = CMatrix::from_rows(&[
            vec![C64::new(0.55, 0.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.5, 0.0), C64::new(0.45, 0.0)],
        ])
        .unwrap();
        let w = check_witness(
            &FilteredElement::scalar_matrix(p).unwrap(),
            Parity::Projection,
            0.05,
            1.0,
        )
        .unwrap();
        let h = rotation_homotopy(&w).unwrap();
        let n = h.intervals();
        for (i, q) in h.samples().iter().enumerate() {
            let t = i as f64 / n as f64;
            let s2 = (std::f64::consts::FRAC_PI_2 * t).sin().powi(2);
            let defect = q.mul(q).unwrap().sub(q).unwrap().norm();
            assert!((defect - s2 * w.defect_sq).abs() <= 1e-10);
        }
    }

    #[test]
    fn inverse_homotopy_exact_unitary() {
        let u = FilteredElement::scalar_matrix(
            CMatrix::from_rows(&[
                vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let w = check_witness(&u, Parity::Unitary, 0.05, 1.0).unwrap();
        let h = inverse_homotopy(&w).unwrap();
        // Starts at diag(u, u*), ends at the identity.
        let start = h.start().to_matrix().unwrap();
        let block = FilteredElement::block_diag(&[w.element.clone(), w.element.adjoint()])
            .unwrap()
            .to_matrix()
            .unwrap();
        assert!(start.sub(&block).op_norm() < 1e-10);
        let end = h.end().to_matrix().unwrap();
        assert!(end.sub(&CMatrix::identity(4)).op_norm() < 1e-12);
        assert_eq!(h.epsilon, 3.0 * 0.05);
        assert_eq!(h.radius, 2.0);
    }

    #[test]
    fn scalar_projection_path_diagonal_example() {
        let p = CMatrix::diag_real(&[0.9, 0.1]);
        let h = scalar_projection_path(&p, 0.1).unwrap();
        let end = h.end().to_matrix().unwrap();
        assert!(end.sub(&CMatrix::diag_real(&[1.0, 0.0])).op_norm() < 1e-10);
        // Rank above 1/2 is constant along the path.
        for q in h.samples() {
            let s = q.to_matrix().unwrap().herm_eig().unwrap();
            assert_eq!(s.count_above_half(), 1);
        }
        assert!(h.max_defect < 0.1);
    }

    #[test]
    fn scalar_projection_path_constant_on_identity() {
        let p = CMatrix::identity(3);
        let h = scalar_projection_path(&p, 0.05).unwrap();
        for q in h.samples() {
            assert!(q.to_matrix().unwrap().sub(&p).op_norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_unitary_path_rescaled_rotation() {
        let theta = 0.8f64;
        let rot = CMatrix::from_rows(&[
            vec![C64::new(theta.cos(), 0.0), C64::new(-theta.sin(), 0.0)],
            vec![C64::new(theta.sin(), 0.0), C64::new(theta.cos(), 0.0)],
        ])
        .unwrap()
        .scale(C64::new(1.05, 0.0));
        let h = scalar_unitary_path(&rot, 0.15).unwrap();
        let end = h.end().to_matrix().unwrap();
        assert!(end.sub(&CMatrix::identity(2)).op_norm() < 1e-10);
        assert!(h.max_defect < 0.15);
    }
}
