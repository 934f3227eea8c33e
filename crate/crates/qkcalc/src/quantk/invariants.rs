//! Class representatives and their computable integer invariants.

use super::witness::{Parity, QkError, QkWitness};
use crate::algebra::Payload;
use crate::linalg::{C64, CMatrix, TAU};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClassParity {
    Even,
    Odd,
}

/// Provenance of a suspension loop built from a projection witness, kept so
/// the Toeplitz pairing can reuse the generating data.
#[derive(Clone, Debug)]
pub struct ZLoopOrigin {
    pub projection: QkWitness,
    pub winding_offset: usize,
}

/// A quantitative K-class representative: an even class (projection witness
/// with a rank offset) or an odd class (unitary witness).
#[derive(Clone, Debug)]
pub struct QkClass {
    pub parity: ClassParity,
    pub witness: QkWitness,
    /// The integer l of an even representative [p, l].
    pub rank_offset: usize,
    pub origin: Option<ZLoopOrigin>,
}

impl QkClass {
    /// Even class [p, l]. For representatives in a unitized algebra the
    /// scalar-part condition dim kappa0(scalar) = l is enforced.
    pub fn even(witness: QkWitness, rank_offset: usize) -> Result<Self, QkError> {
        assert!(witness.parity == Parity::Projection);
        if let Some(scalar) = witness.element.scalar_part() {
            let rank = scalar_rank(scalar)?;
            if rank != rank_offset {
                return Err(QkError::BadRelaxation);
            }
        }
        Ok(QkClass { parity: ClassParity::Even, witness, rank_offset, origin: None })
    }

    /// Odd class [u].
    pub fn odd(witness: QkWitness) -> Self {
        assert!(witness.parity == Parity::Unitary);
        QkClass { parity: ClassParity::Odd, witness, rank_offset: 0, origin: None }
    }

    pub fn epsilon(&self) -> f64 {
        self.witness.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.witness.radius
    }
}

/// Number of eigenvalues of a self-adjoint scalar matrix above 1/2.
fn scalar_rank(m: &CMatrix) -> Result<usize, QkError> {
    let spectrum = m.herm_eig().map_err(crate::algebra::AlgebraError::from)?;
    Ok(spectrum.count_above_half())
}

/// Relaxation to weaker parameters: the same representative re-tagged at
/// (eps', r') with eps <= eps' < 1/4 and r <= r'.
pub fn relax(c: &QkClass, eps: f64, radius: f64) -> Result<QkClass, QkError> {
    if eps < c.witness.epsilon || eps >= 0.25 || radius < c.witness.radius {
        return Err(QkError::BadRelaxation);
    }
    let mut out = c.clone();
    out.witness.epsilon = eps;
    out.witness.radius = radius;
    Ok(out)
}

/// Maximum size of a dense window used for Toeplitz rank counting.
const TOEPLITZ_COUNT_DIM_CAP: usize = 1400;

/// The integer invariant of an even class: the rank of the spectral
/// projection above 1/2, minus the rank offset. Supported over
/// finite-dimensional (scalar or band) algebras; over Toeplitz-type
/// elements with constant symbol the count is taken on a window and
/// normalized by the symbol background, which makes it window-independent.
pub fn k0_invariant(c: &QkClass) -> Result<i64, QkError> {
    if c.parity != ClassParity::Even {
        return Err(QkError::UnsupportedAlgebra);
    }
    let l = c.rank_offset as i64;
    match &c.witness.element.payload {
        Payload::Scalar(m) => Ok(scalar_rank(m)? as i64 - l),
        Payload::Band { matrix, .. } => Ok(scalar_rank(matrix)? as i64 - l),
        Payload::Unitized { inner, scalar } => {
            // Computable when the representative is constant: the class then
            // reduces to its scalar-matrix value.
            let count = c.witness.element.sample_count().expect("unitized inner is a path");
            let first = c.witness.element.eval_sample(0)?;
            for i in 1..count {
                if c.witness.element.eval_sample(i)?.sub(&first)?.sup_entry() > TAU {
                    return Err(QkError::UnsupportedAlgebra);
                }
            }
            let _ = inner;
            let _ = scalar;
            Ok(scalar_rank(&first.to_matrix()?)? as i64 - l)
        }
        Payload::Toeplitz(t) => {
            let symbol = t.symbol_coeffs();
            if symbol.keys().any(|&k| k != 0) {
                return Err(QkError::UnsupportedAlgebra);
            }
            let background = match symbol.get(&0) {
                Some(m) => scalar_rank(m)? as i64,
                None => 0,
            };
            let extent = t.window_extent();
            let m = t.coeff_dim();
            let sites = (extent + 8).max(16);
            if sites * m > TOEPLITZ_COUNT_DIM_CAP {
                return Err(QkError::WindowTooSmall(format!(
                    "rank window {} x {} exceeds the dense cap",
                    sites, m
                )));
            }
            let count = scalar_rank(&t.window_matrix(sites))? as i64;
            Ok(count - background * (sites as i64 - 1) - l)
        }
        _ => Err(QkError::UnsupportedAlgebra),
    }
}

/// Winding number of `t -> det(kappa1(u(t)))` by phase accumulation over the
/// sampled loop. Requires per-step phase changes below pi/2; the grid is
/// refined by linear midpoint interpolation otherwise, up to the cap.
pub fn k1_loop_invariant(c: &QkClass) -> Result<i64, QkError> {
    if c.parity != ClassParity::Odd {
        return Err(QkError::UnsupportedAlgebra);
    }
    let mats = c.witness.element.loop_matrices().map_err(|_| QkError::UnsupportedAlgebra)?;
    let scale = mats.iter().map(|m| m.op_norm()).fold(0.0, f64::max);
    let closure_gap = mats[0].sub(&mats[mats.len() - 1]).op_norm();
    if closure_gap > 1e-9 * (1.0 + scale) {
        return Err(QkError::UnsupportedAlgebra);
    }
    winding_of_samples(mats)
}

pub(crate) fn winding_of_samples(mut mats: Vec<CMatrix>) -> Result<i64, QkError> {
    const CAP: usize = 1 << 16;
    loop {
        let phases: Result<Vec<f64>, QkError> = mats
            .iter()
            .map(|m| {
                let gram = m.adjoint().mul(m);
                let spectrum = gram.herm_eig().map_err(crate::algebra::AlgebraError::from)?;
                let inv_sqrt = spectrum.apply(|l| C64::new(1.0 / l.max(1e-300).sqrt(), 0.0));
                Ok(m.mul(&inv_sqrt).det().arg())
            })
            .collect();
        let phases = phases?;
        let mut total = 0.0f64;
        let mut coarse = false;
        for pair in phases.windows(2) {
            let mut delta = pair[1] - pair[0];
            while delta > std::f64::consts::PI {
                delta -= 2.0 * std::f64::consts::PI;
            }
            while delta < -std::f64::consts::PI {
                delta += 2.0 * std::f64::consts::PI;
            }
            if delta.abs() >= std::f64::consts::FRAC_PI_2 {
                coarse = true;
                break;
            }
            total += delta;
        }
        if !coarse {
            let winding = total / (2.0 * std::f64::consts::PI);
            let rounded = winding.round();
            if (winding - rounded).abs() > 1e-6 {
                return Err(QkError::InsufficientSampling { cap: CAP });
            }
            return Ok(rounded as i64);
        }
        if mats.len() > CAP {
            return Err(QkError::InsufficientSampling { cap: CAP });
        }
        // Midpoint refinement by linear interpolation; the polar step inside
        // the phase computation renormalizes the interpolants.
        let mut refined = Vec::with_capacity(mats.len() * 2 - 1);
        for i in 0..mats.len() - 1 {
            refined.push(mats[i].clone());
            refined.push(mats[i].add(&mats[i + 1]).scale(C64::new(0.5, 0.0)));
        }
        refined.push(mats[mats.len() - 1].clone());
        mats = refined;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::witness::check_witness;
    use crate::algebra::FilteredElement;

    fn scalar_class(values: &[f64], l: usize) -> QkClass {
        let p = FilteredElement::scalar_matrix(CMatrix::diag_real(values)).unwrap();
        let w = check_witness(&p, Parity::Projection, 0.1, 1.0).unwrap();
        QkClass::even(w, l).unwrap()
    }

    #[test]
    fn k0_of_standard_classes() {
        assert_eq!(k0_invariant(&scalar_class(&[1.0, 0.0], 1)).unwrap(), 0);
        assert_eq!(k0_invariant(&scalar_class(&[1.0, 1.0, 1.0], 1)).unwrap(), 2);
    }

    #[test]
    fn k0_invariant_under_relax_and_amplify() {
        let c = scalar_class(&[1.0, 1.0, 0.0], 1);
        let relaxed = relax(&c, 0.2, 4.0).unwrap();
        assert_eq!(k0_invariant(&c).unwrap(), k0_invariant(&relaxed).unwrap());
        let amplified = {
            let w = check_witness(
                &c.witness.element.amplify(2),
                Parity::Projection,
                c.witness.epsilon,
                c.witness.radius,
            )
            .unwrap();
            QkClass::even(w, 1).unwrap()
        };
        assert_eq!(k0_invariant(&c).unwrap(), k0_invariant(&amplified).unwrap());
    }

    #[test]
    fn relax_validation() {
        let c = scalar_class(&[1.0, 0.0], 0);
        assert!(relax(&c, 0.05, 2.0).is_err());
        let same = relax(&c, 0.1, 1.0).unwrap();
        assert_eq!(same.witness.epsilon, 0.1);
        let chained = relax(&relax(&c, 0.15, 2.0).unwrap(), 0.2, 3.0).unwrap();
        let direct = relax(&c, 0.2, 3.0).unwrap();
        assert_eq!(chained.witness.epsilon, direct.witness.epsilon);
        assert_eq!(chained.witness.radius, direct.witness.radius);
    }

    #[test]
    fn winding_of_scalar_loop() {
        // t -> e^{2 pi i t} winds once; the constant loop does not wind.
        let loop_samples: Vec<CMatrix> = (0..=64)
            .map(|i| {
                let t = i as f64 / 64.0;
                CMatrix::identity(1).scale(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
            })
            .collect();
        assert_eq!(winding_of_samples(loop_samples).unwrap(), 1);
        let constant: Vec<CMatrix> = (0..=16).map(|_| CMatrix::identity(2)).collect();
        assert_eq!(winding_of_samples(constant).unwrap(), 0);
    }

    #[test]
    fn winding_refines_coarse_grids() {
        // Three windings on a very coarse grid forces midpoint refinement.
        let loop_samples: Vec<CMatrix> = (0..=8)
            .map(|i| {
                let t = i as f64 / 8.0;
                CMatrix::identity(1).scale(C64::from_polar(1.0, 6.0 * std::f64::consts::PI * t))
            })
            .collect();
        // Note: aliasing makes coarse pure-phase loops ambiguous; the sampled
        // points of winding 3 at 9 samples coincide with those of winding -1.
        // The linear-interpolation refinement resolves the sampled polygon,
        // whose winding is well defined.
        let w = winding_of_samples(loop_samples).unwrap();
        assert_eq!(w, 3);
    }
}
