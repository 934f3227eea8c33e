//! The mapping cone of the quotient map of a semi-split extension: pairs
//! (x, f) with x in the total algebra and f a path in the quotient
//! vanishing at 1, matching f(0) = q(x).

use super::extension::SemisplitExtension;
use crate::algebra::{AlgebraError, FilteredElement};
use crate::linalg::TAU;

/// An element of the mapping cone: the pair (x, f) with its matching
/// condition validated on construction.
#[derive(Clone, Debug)]
pub struct CqElement {
    pub x: FilteredElement,
    pub f: FilteredElement,
}

/// The mapping cone algebra of the quotient map, with its ideal and
/// suspension embeddings.
pub struct MappingCone<'a> {
    ext: &'a SemisplitExtension,
}

impl<'a> MappingCone<'a> {
    pub fn new(ext: &'a SemisplitExtension) -> Self {
        MappingCone { ext }
    }

    fn check_matching(&self, x: &FilteredElement, f: &FilteredElement) -> Result<(), AlgebraError> {
        let q = self.ext.quotient_map(x)?;
        let f0 = f.eval_sample(0)?;
        let gap = f0.sub(&q)?.sup_entry();
        if gap > 100.0 * TAU {
            return Err(AlgebraError::Membership(format!(
                "mapping-cone matching failed: |f(0) - q(x)| = {gap:.3e}"
            )));
        }
        Ok(())
    }

    pub fn element(&self, x: FilteredElement, f: FilteredElement) -> Result<CqElement, AlgebraError> {
        let flags = f.path_flags().ok_or_else(|| {
            AlgebraError::Mismatch("the second component must be a path".into())
        })?;
        if !flags.1 {
            return Err(AlgebraError::Membership(
                "the second component must vanish at t = 1".into(),
            ));
        }
        self.check_matching(&x, &f)?;
        Ok(CqElement { x, f })
    }

    /// The ideal embedding x -> (x, 0).
    pub fn embed_ideal(&self, j: &FilteredElement) -> Result<CqElement, AlgebraError> {
        let x = self.ext.include(j)?;
        let q = self.ext.quotient_map(&x)?;
        let count = x.sample_count().unwrap_or(self.ext.grid + 1);
        let f = FilteredElement::path_from_fn(count - 1, false, true, |_| q.zero_like())?;
        self.element(x, f)
    }

    /// The suspension embedding f -> (0, f); the matching condition
    /// f(0) = q(0) = 0 requires f to vanish at both ends.
    pub fn embed_suspension(&self, f: &FilteredElement) -> Result<CqElement, AlgebraError> {
        let flags = f.path_flags().ok_or_else(|| {
            AlgebraError::Mismatch("suspension elements are paths".into())
        })?;
        if !flags.0 || !flags.1 {
            return Err(AlgebraError::Membership(
                "suspension elements vanish at both endpoints".into(),
            ));
        }
        let sample = f.eval_sample(0)?;
        let total_zero = self.ext.section(&sample.zero_like())?;
        self.element(total_zero, f.with_path_flags(false, true)?)
    }

    pub fn mul(&self, a: &CqElement, b: &CqElement) -> Result<CqElement, AlgebraError> {
        self.element(a.x.mul(&b.x)?, a.f.mul(&b.f)?)
    }

    pub fn add(&self, a: &CqElement, b: &CqElement) -> Result<CqElement, AlgebraError> {
        self.element(a.x.add(&b.x)?, a.f.add(&b.f)?)
    }

    /// Filtration level: the maximum of the component propagations.
    pub fn propagation(&self, a: &CqElement) -> f64 {
        a.x.propagation().max(a.f.propagation())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraKind, FiniteMetricSpace};
    use crate::linalg::{C64, CMatrix};
    use std::sync::Arc;

    fn setup() -> (SemisplitExtension, FilteredElement) {
        let space = Arc::new(FiniteMetricSpace::line(5));
        let kind = AlgebraKind::Band { space: space.clone(), block_dim: 1 };
        let ext = SemisplitExtension::cone(kind, 16);
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(19);
        let m = CMatrix::from_fn(5, 5, |i, j| {
            if (i as f64 - j as f64).abs() <= 2.0 {
                C64::new(rng.gen_range(-1.0..1.0), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        (ext, FilteredElement::band(space, 1, m).unwrap())
    }

    #[test]
    fn ideal_embedding_is_multiplicative() {
        let (ext, a) = setup();
        let cone = MappingCone::new(&ext);
        let j1 = FilteredElement::path_from_fn(16, true, true, |t| a.scale_real(t * (1.0 - t)))
            .unwrap();
        let j2 = FilteredElement::path_from_fn(16, true, true, |t| {
            a.adjoint().scale_real(t * t * (1.0 - t))
        })
        .unwrap();
        let e1 = cone.embed_ideal(&j1).unwrap();
        let e2 = cone.embed_ideal(&j2).unwrap();
        let prod = cone.mul(&e1, &e2).unwrap();
        let direct = cone.embed_ideal(&j1.mul(&j2).unwrap()).unwrap();
        assert!(prod.x.sub(&direct.x).unwrap().sup_entry() < 1e-12);
    }

    #[test]
    fn suspension_embedding_matches() {
        let (ext, a) = setup();
        let cone = MappingCone::new(&ext);
        let f = FilteredElement::path_from_fn(16, true, true, |t| {
            a.scale_real((std::f64::consts::PI * t).sin())
        })
        .unwrap();
        let e = cone.embed_suspension(&f).unwrap();
        assert_eq!(e.f.path_flags(), Some((false, true)));
    }

    #[test]
    fn filtration_is_max_of_components() {
        let (ext, a) = setup();
        let cone = MappingCone::new(&ext);
        let x = ext.section(&a).unwrap();
        let f = FilteredElement::path_from_fn(16, false, true, |t| a.scale_real(1.0 - t)).unwrap();
        let e = cone.element(x.clone(), f.clone()).unwrap();
        assert_eq!(cone.propagation(&e), x.propagation().max(f.propagation()));
    }

    #[test]
    fn matching_condition_enforced() {
        let (ext, a) = setup();
        let cone = MappingCone::new(&ext);
        let x = ext.section(&a).unwrap();
        let wrong = FilteredElement::path_from_fn(16, false, true, |t| {
            a.scale_real(0.5 * (1.0 - t))
        })
        .unwrap();
        assert!(cone.element(x, wrong).is_err());
    }
}
