//! Semi-split filtered extensions realized on concrete algebras: the cone
//! extension (evaluation at 1) over any base, and the shift-model extension
//! whose ideal is the finite-window operators and whose quotient is the
//! loop algebra.

use crate::algebra::{
    AlgebraError, AlgebraKind, FilteredElement, ToeplitzElement, embed_scalar,
};
use crate::linalg::{CMatrix, TAU};

/// Admissible scalar profile of a cone section `a -> (t -> c(t) a)`:
/// completely positive, filtered, with c(1) = 1 and c(0) = 0. The set of
/// such sections is convex; mixing exercises that freedom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SectionProfile {
    /// c(t) = t.
    Linear,
    /// c(t) = w t + (1 - w) t^2.
    Mixed { linear_weight: f64 },
}

impl SectionProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            SectionProfile::Linear => t,
            SectionProfile::Mixed { linear_weight } => {
                linear_weight * t + (1.0 - linear_weight) * t * t
            }
        }
    }
}

#[derive(Clone, Debug)]
enum ExtKind {
    /// 0 -> SA -> CA -> A -> 0, evaluation at one, section t -> c(t) a.
    Cone { base: AlgebraKind, profile: SectionProfile },
    /// 0 -> K -> T (x) A -> loops(A) -> 0, symbol map, Toeplitz
    /// quantization as the section. Coefficients must be scalar-backed so
    /// loop basepoints can serve as unitization scalars.
    Shift { coeff: AlgebraKind },
}

/// A semi-split filtered extension with completely positive filtered
/// section: quotient map, section and ideal inclusion, plus the unital
/// retraction `s-tilde o q-tilde` acting on unitized elements.
#[derive(Clone, Debug)]
pub struct SemisplitExtension {
    kind: ExtKind,
    /// Grid used when the section or quotient map produces paths.
    pub grid: usize,
    pub label: String,
}

impl SemisplitExtension {
    /// The cone extension over a concrete base algebra.
    pub fn cone(base: AlgebraKind, grid: usize) -> Self {
        Self::cone_with_profile(base, grid, SectionProfile::Linear)
    }

    pub fn cone_with_profile(base: AlgebraKind, grid: usize, profile: SectionProfile) -> Self {
        let label = format!("cone extension over {base:?}");
        SemisplitExtension { kind: ExtKind::Cone { base, profile }, grid, label }
    }

    /// The shift-model extension with scalar matrix coefficients.
    pub fn toeplitz(coeff_dim: usize, grid: usize) -> Self {
        SemisplitExtension {
            kind: ExtKind::Shift { coeff: AlgebraKind::Scalar { dim: coeff_dim } },
            grid,
            label: format!("shift extension with {coeff_dim}-dimensional coefficients"),
        }
    }

    pub fn is_shift_model(&self) -> bool {
        matches!(self.kind, ExtKind::Shift { .. })
    }

    pub fn ideal_kind(&self) -> AlgebraKind {
        match &self.kind {
            ExtKind::Cone { base, .. } => AlgebraKind::Path {
                base: Box::new(base.clone()),
                vanish_at_zero: true,
                vanish_at_one: true,
            },
            ExtKind::Shift { coeff } => AlgebraKind::Toeplitz { coeff: Box::new(coeff.clone()) },
        }
    }

    pub fn total_kind(&self) -> AlgebraKind {
        match &self.kind {
            ExtKind::Cone { base, .. } => AlgebraKind::Path {
                base: Box::new(base.clone()),
                vanish_at_zero: true,
                vanish_at_one: false,
            },
            ExtKind::Shift { coeff } => AlgebraKind::Toeplitz { coeff: Box::new(coeff.clone()) },
        }
    }

    pub fn quotient_kind(&self) -> AlgebraKind {
        match &self.kind {
            ExtKind::Cone { base, .. } => base.clone(),
            ExtKind::Shift { coeff } => AlgebraKind::Path {
                base: Box::new(coeff.clone()),
                vanish_at_zero: true,
                vanish_at_one: true,
            },
        }
    }

    /// The quotient map. Cone: evaluation at t = 1 (unitized elements
    /// evaluate scalar included). Shift model: the symbol loop, returned as
    /// a unitized suspension element over the basepoint value.
    pub fn quotient_map(&self, x: &FilteredElement) -> Result<FilteredElement, AlgebraError> {
        match &self.kind {
            ExtKind::Cone { .. } => {
                let n = x.sample_count().ok_or_else(|| {
                    AlgebraError::Mismatch("cone elements are paths".into())
                })?;
                x.eval_sample(n - 1)
            }
            ExtKind::Shift { .. } => {
                let t = x
                    .as_toeplitz()
                    .ok_or_else(|| AlgebraError::Mismatch("shift elements are Toeplitz".into()))?;
                let samples = t.symbol_samples(self.grid);
                let base_value = samples[0].clone();
                let dim = base_value.rows();
                let inner: Result<Vec<FilteredElement>, AlgebraError> = samples
                    .iter()
                    .map(|s| FilteredElement::scalar_matrix(s.sub(&base_value)))
                    .collect();
                let mut inner = inner?;
                // The trigonometric samples match at the endpoints up to
                // roundoff; pin them exactly so the suspension flags hold.
                let last = inner.len() - 1;
                inner[last] = FilteredElement::scalar_matrix(CMatrix::zeros(dim, dim))?;
                FilteredElement::unitized(FilteredElement::path(inner, true, true)?, base_value)
            }
        }
    }

    /// The completely positive filtered section.
    pub fn section(&self, y: &FilteredElement) -> Result<FilteredElement, AlgebraError> {
        match &self.kind {
            ExtKind::Cone { profile, .. } => FilteredElement::path_from_fn(
                self.grid,
                true,
                false,
                |t| y.scale_real(profile.eval(t)),
            ),
            ExtKind::Shift { coeff } => {
                if let Some(count) = y.sample_count() {
                    let samples: Result<Vec<CMatrix>, AlgebraError> =
                        (0..count).map(|i| y.eval_sample(i)?.to_matrix()).collect();
                    let t = ToeplitzElement::quantize_loop(&samples?, coeff.clone())?;
                    Ok(FilteredElement::from_toeplitz(t))
                } else {
                    // Constant loops quantize to the constant operator.
                    let t = ToeplitzElement::constant(y.to_matrix()?, coeff.clone())?;
                    Ok(FilteredElement::from_toeplitz(t))
                }
            }
        }
    }

    /// Inclusion of the ideal into the total algebra.
    pub fn include(&self, j: &FilteredElement) -> Result<FilteredElement, AlgebraError> {
        match &self.kind {
            ExtKind::Cone { .. } => j.with_path_flags(true, false),
            ExtKind::Shift { .. } => {
                let t = j
                    .as_toeplitz()
                    .ok_or_else(|| AlgebraError::Mismatch("shift elements are Toeplitz".into()))?;
                let scale = t.sup_entry();
                if !t.is_compact(1e-9 * (1.0 + scale)) {
                    return Err(AlgebraError::Membership(
                        "ideal elements must have vanishing symbol".into(),
                    ));
                }
                Ok(j.clone())
            }
        }
    }

    /// The unital retraction `x -> s(q(x))` on (possibly unitized) total
    /// elements: the section is applied to the concrete part and the scalar
    /// part rides along unchanged.
    pub fn retract(&self, x: &FilteredElement) -> Result<FilteredElement, AlgebraError> {
        match &self.kind {
            ExtKind::Cone { profile, .. } => {
                let count = x.sample_count().ok_or_else(|| {
                    AlgebraError::Mismatch("cone elements are paths".into())
                })?;
                let intervals = count - 1;
                match (x.unitized_inner(), x.scalar_part()) {
                    (Some(inner), Some(scalar)) => {
                        let value = inner.eval_sample(count - 1)?;
                        let section = FilteredElement::path_from_fn(
                            intervals,
                            true,
                            false,
                            |t| value.scale_real(profile.eval(t)),
                        )?;
                        FilteredElement::unitized(section, scalar.clone())
                    }
                    _ => {
                        let value = x.eval_sample(count - 1)?;
                        FilteredElement::path_from_fn(intervals, true, false, |t| {
                            value.scale_real(profile.eval(t))
                        })
                    }
                }
            }
            ExtKind::Shift { .. } => {
                let q = self.quotient_map(x)?;
                self.section(&q)
            }
        }
    }

    /// Lifts a quotient element into the ambient unitized total algebra: the
    /// section with a zero scalar part for the cone, the quantization itself
    /// for the shift model (whose total algebra is unital).
    pub fn lift_ambient(&self, y: &FilteredElement) -> Result<FilteredElement, AlgebraError> {
        match &self.kind {
            ExtKind::Cone { .. } => {
                let dim = y.to_matrix()?.rows();
                let section = self.section(y)?;
                FilteredElement::unitized(section, CMatrix::zeros(dim, dim))
            }
            ExtKind::Shift { .. } => self.section(y),
        }
    }

    /// The constant element of the ambient unitized total algebra with the
    /// given scalar value, shaped like the reference element.
    pub fn ambient_scalar(
        &self,
        like: &FilteredElement,
        z: &CMatrix,
    ) -> Result<FilteredElement, AlgebraError> {
        match &self.kind {
            ExtKind::Cone { .. } => match like.unitized_inner() {
                Some(inner) => FilteredElement::unitized(inner.zero_like(), z.clone()),
                None => Err(AlgebraError::Mismatch(
                    "reference element is not unitized".into(),
                )),
            },
            ExtKind::Shift { coeff } => {
                let c = embed_scalar(z, coeff)?;
                Ok(FilteredElement::from_toeplitz(ToeplitzElement::constant(
                    c.to_matrix()?,
                    coeff.clone(),
                )?))
            }
        }
    }

    /// Whether an element is (numerically) in the ideal.
    pub fn in_ideal(&self, x: &FilteredElement) -> bool {
        match &self.kind {
            ExtKind::Cone { .. } => match self.quotient_map(x) {
                Ok(q) => q.sup_entry() <= 10.0 * TAU,
                Err(_) => false,
            },
            ExtKind::Shift { .. } => {
                x.as_toeplitz().map_or(false, |t| t.is_compact(1e-9 * (1.0 + t.sup_entry())))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteMetricSpace;
    use crate::linalg::C64;
    use std::sync::Arc;

    fn band_kind(n: usize) -> AlgebraKind {
        AlgebraKind::Band { space: Arc::new(FiniteMetricSpace::line(n)), block_dim: 1 }
    }

    fn random_band(seed: u64, n: usize, radius: f64) -> FilteredElement {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let space = Arc::new(FiniteMetricSpace::line(n));
        let m = CMatrix::from_fn(n, n, |i, j| {
            if (i as f64 - j as f64).abs() <= radius {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                C64::new(0.0, 0.0)
            }
        });
        FilteredElement::band(space, 1, m).unwrap()
    }

    #[test]
    fn cone_section_is_a_filtered_section() {
        let ext = SemisplitExtension::cone(band_kind(6), 32);
        let a = random_band(3, 6, 2.0);
        let s = ext.section(&a).unwrap();
        // q o s = id.
        let back = ext.quotient_map(&s).unwrap();
        assert!(back.sub(&a).unwrap().sup_entry() < 1e-14);
        // Filtered: propagation preserved.
        assert_eq!(s.propagation(), a.propagation());
    }

    #[test]
    fn cone_quotient_kills_ideal() {
        let ext = SemisplitExtension::cone(band_kind(5), 16);
        let a = random_band(7, 5, 1.0);
        // A suspension element: t (1 - t) a.
        let j = FilteredElement::path_from_fn(16, true, true, |t| a.scale_real(t * (1.0 - t)))
            .unwrap();
        let included = ext.include(&j).unwrap();
        let q = ext.quotient_map(&included).unwrap();
        assert_eq!(q.sup_entry(), 0.0);
        assert!(ext.in_ideal(&included));
    }

    #[test]
    fn cone_retract_of_unitized_keeps_scalar() {
        let ext = SemisplitExtension::cone(band_kind(4), 16);
        let a = random_band(11, 4, 1.0);
        let lifted = ext.lift_ambient(&a).unwrap();
        let unit = lifted.unit_like().unwrap();
        let x = lifted.add(&unit).unwrap();
        let r = ext.retract(&x).unwrap();
        // Scalar part unchanged, concrete part is the section of q(x).
        assert!(r.scalar_part().unwrap().sub(&CMatrix::identity(4)).op_norm() < 1e-14);
        let diff = x.sub(&r).unwrap();
        // x - s(q(x)) is in the suspension: its quotient vanishes.
        let q = ext.quotient_map(&diff).unwrap();
        assert!(q.sup_entry() < 1e-12);
    }

    #[test]
    fn shift_extension_round_trip() {
        let ext = SemisplitExtension::toeplitz(1, 64);
        // The loop e^{2 pi i t} as a unitized suspension element.
        let inner = FilteredElement::path_from_fn(64, true, true, |t| {
            FilteredElement::scalar_matrix(
                CMatrix::identity(1)
                    .scale(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t) - C64::new(1.0, 0.0)),
            )
            .unwrap()
        })
        .unwrap();
        let loop_elem = FilteredElement::unitized(inner, CMatrix::identity(1)).unwrap();
        let s = ext.section(&loop_elem).unwrap();
        // The section of the basic loop is the shift.
        let t = s.as_toeplitz().unwrap();
        assert_eq!(t.bandwidth(), 1);
        let q = ext.quotient_map(&s).unwrap();
        assert!(q.sub(&loop_elem).unwrap().sup_entry() < 1e-10);
        // Unital section.
        let one_loop = FilteredElement::scalar_matrix(CMatrix::identity(1)).unwrap();
        let s1 = ext.section(&one_loop).unwrap();
        assert!(
            s1.sub(&FilteredElement::from_toeplitz(
                s.as_toeplitz().unwrap().unit_like()
            ))
            .unwrap()
            .sup_entry()
                < 1e-12
        );
    }

    #[test]
    fn shift_inclusion_requires_vanishing_symbol() {
        let ext = SemisplitExtension::toeplitz(1, 32);
        let shift = ToeplitzElement::shift(CMatrix::identity(1), AlgebraKind::Scalar { dim: 1 })
            .unwrap();
        let not_compact = FilteredElement::from_toeplitz(shift.clone());
        assert!(ext.include(&not_compact).is_err());
        let e00 = shift.unit_like().sub(&shift.mul(&shift.adjoint()).unwrap()).unwrap();
        let compact = FilteredElement::from_toeplitz(e00);
        assert!(ext.include(&compact).is_ok());
        assert!(ext.in_ideal(&compact));
    }
}
