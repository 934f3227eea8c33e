//! Explicit controlled boundary constructions for semi-split filtered
//! extensions: the unitary lift through the quotient map, the truncated
//! exponential even boundary, the lift-and-compress odd boundary, and the
//! suspension loop attached to a projection class.

use super::extension::SemisplitExtension;
use crate::algebra::{FilteredElement, Payload};
use crate::linalg::{C64, CMatrix, series_cutoff_exp, series_cutoff_lift};
use crate::quantk::{
    ClassParity, Parity, QkClass, QkError, QkWitness, SampledHomotopy, ZLoopOrigin,
    check_witness, inverse_homotopy, kappa0,
};

/// Truncated exponential `sum_{l=0}^{order} x^l / l!` in any unital ambient.
fn element_trunc_exp(x: &FilteredElement, order: usize) -> Result<FilteredElement, QkError> {
    let unit = x.unit_like().map_err(QkError::from)?;
    let mut acc = unit.clone();
    let mut term = unit;
    for l in 1..=order {
        term = term.mul(x)?.scale_real(1.0 / l as f64);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Measured unitary defect `max(|x*x - 1|, |x x* - 1|)`.
fn unitary_defect(x: &FilteredElement) -> Result<f64, QkError> {
    let unit = x.unit_like().map_err(QkError::from)?;
    let left = x.adjoint().mul(x)?.sub(&unit)?.norm();
    let right = x.mul(&x.adjoint())?.sub(&unit)?.norm();
    Ok(left.max(right))
}

/// A diagonal exact projection of the given rank in the same matrix shape.
fn diagonal_projection_like(
    x: &FilteredElement,
    rank: usize,
) -> Result<FilteredElement, QkError> {
    let m = x.to_matrix()?;
    let n = m.rows();
    if rank > n {
        return Err(QkError::WindowTooSmall(format!(
            "rank {rank} exceeds matrix dimension {n}"
        )));
    }
    let diag = CMatrix::from_fn(n, n, |i, j| {
        if i == j && i < rank { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    });
    match &x.payload {
        Payload::Scalar(_) => Ok(FilteredElement::scalar_matrix(diag)?),
        Payload::Band { space, block_dim, .. } => {
            Ok(FilteredElement::band(space.clone(), *block_dim, diag)?)
        }
        _ => Err(QkError::UnsupportedAlgebra),
    }
}

/// The suspension loop `V_{q,k}` of a projection witness: the basic loop
/// `1 + q (e^{2 pi i t} - 1)` times the exact winding correction
/// `1 + E_k (e^{-2 pi i t} - 1)` on a rank-k diagonal projection, wrapped as
/// a unitized suspension element. The result is a 5 eps-r-unitary.
pub fn z_loop(
    w: &QkWitness,
    k: usize,
    intervals: usize,
) -> Result<QkClass, QkError> {
    assert!(w.parity == Parity::Projection, "the suspension loop needs a projection");
    if w.epsilon >= 0.05 {
        return Err(QkError::DefectTooLarge { measured: w.epsilon, allowed: 0.05 });
    }
    let q = &w.element;
    let unit = q.unit_like().map_err(QkError::from)?;
    let corrector = diagonal_projection_like(q, k)?;
    let mut inner = Vec::with_capacity(intervals + 1);
    for i in 0..=intervals {
        let t = i as f64 / intervals as f64;
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t);
        let base = unit.add(&q.scale(phase - C64::new(1.0, 0.0)))?;
        let twist = unit.add(&corrector.scale(phase.conj() - C64::new(1.0, 0.0)))?;
        let sample = twist.mul(&base)?;
        inner.push(sample.sub(&unit)?);
    }
    // Pin the endpoints to zero exactly; the samples there are roundoff.
    let last = inner.len() - 1;
    inner[0] = inner[0].zero_like();
    inner[last] = inner[last].zero_like();
    let dim = unit.to_matrix()?.rows();
    let element = FilteredElement::unitized(
        FilteredElement::path(inner, true, true)?,
        CMatrix::identity(dim),
    )?;
    let witness = check_witness(&element, Parity::Unitary, 5.0 * w.epsilon, w.radius)?;
    let mut class = QkClass::odd(witness);
    class.origin = Some(ZLoopOrigin { projection: w.clone(), winding_offset: k });
    Ok(class)
}

/// Result of lifting a quotient homotopy through the section.
#[derive(Clone, Debug)]
pub struct UnitaryLiftResult {
    pub w: FilteredElement,
    /// Measured `|q(W) - V(0)|`.
    pub quotient_error: f64,
    /// Series cutoff used for the exponential/logarithm pair.
    pub cutoff: usize,
    /// Number of partition steps.
    pub partition: usize,
    pub propagation: f64,
    /// Sound propagation budget `partition * 2 * cutoff^2 * r`.
    pub budget: f64,
    pub defect: f64,
}

/// Lifts a homotopy of eps-r-unitaries in the quotient, ending at the
/// identity, to an almost unitary W of the total algebra with
/// `q(W)` close to the start of the homotopy: the path is partitioned into
/// steps of gap below 1/8 and each step contributes the factor
/// `P_eps(s(Q_eps(1 - V_{i-1} V_i*)))` with truncated exponential P and
/// logarithm Q.
pub fn unitary_lift(
    ext: &SemisplitExtension,
    homotopy: &SampledHomotopy,
    eps: f64,
    radius: f64,
) -> Result<UnitaryLiftResult, QkError> {
    assert!(eps > 0.0 && eps < 0.25);
    let samples = homotopy.samples();
    let n = samples.len() - 1;
    // Greedy coarsening into steps of gap < 1/8.
    let mut knots: Vec<usize> = vec![0];
    let mut i = 0usize;
    while i < n {
        let mut best: Option<usize> = None;
        let mut j = i + 1;
        while j <= n {
            let gap = samples[j].sub(&samples[i])?.norm();
            if gap < 0.125 {
                best = Some(j);
                j += 1;
            } else {
                break;
            }
        }
        match best {
            Some(b) => {
                knots.push(b);
                i = b;
            }
            None => {
                let gap = samples[i + 1].sub(&samples[i])?.norm();
                return Err(QkError::PathTooCoarse { gap });
            }
        }
    }
    let cutoff = series_cutoff_lift(eps);
    let unit_q = samples[0].unit_like().map_err(QkError::from)?;
    let mut w: Option<FilteredElement> = None;
    for step in knots.windows(2) {
        let a = &samples[step[0]];
        let b = &samples[step[1]];
        let y = unit_q.sub(&a.mul(&b.adjoint())?)?;
        // Q_eps(y) = -sum_{k=1}^{cutoff} y^k / k.
        let mut q_acc = y.zero_like();
        let mut power = unit_q.clone();
        for k in 1..=cutoff {
            power = power.mul(&y)?;
            q_acc = q_acc.sub(&power.scale_real(1.0 / k as f64))?;
        }
        let lifted = ext.lift_ambient(&q_acc)?;
        let factor = element_trunc_exp(&lifted, cutoff)?;
        w = Some(match w {
            Some(acc) => acc.mul(&factor)?,
            None => factor,
        });
    }
    let w = match w {
        Some(w) => w,
        // A constant identity homotopy has a single knot and lifts to 1.
        None => ext.lift_ambient(&unit_q.zero_like())?.unit_like().map_err(QkError::from)?,
    };
    let q_of_w = ext.quotient_map(&w)?;
    let quotient_error = q_of_w.sub(&samples[0])?.norm();
    let defect = unitary_defect(&w)?;
    let partition = knots.len() - 1;
    Ok(UnitaryLiftResult {
        propagation: w.propagation(),
        budget: partition as f64 * 2.0 * (cutoff * cutoff) as f64 * radius,
        w,
        quotient_error,
        cutoff,
        partition,
        defect,
    })
}

/// Result of the even controlled boundary.
#[derive(Clone, Debug)]
pub struct BoundaryEvenResult {
    /// The odd class of the boundary loop in the unitized ideal, including
    /// the exact winding correction for the rank offset.
    pub class: QkClass,
    /// The raw loop 1 + y_p before the offset correction.
    pub raw_loop: FilteredElement,
    /// `|1 + y_p - exp(2 pi i s(kappa0(p)))|` when the exponential of the
    /// section is available in closed form (cone extensions).
    pub check_value: Option<f64>,
    /// Exponential series cutoff l_eps.
    pub cutoff: usize,
    pub defect: f64,
    pub propagation: f64,
    /// defect / eps.
    pub alpha_emp: f64,
}

/// The even boundary of a projection class [p, l] in the quotient: the loop
/// `1 + y_p` with `y_p = z_p - s(q(z_p))` and `z_p` the truncated
/// exponential of `2 pi i s(p)`, multiplied by the exact winding correction
/// that accounts for the rank offset l.
pub fn boundary_even(
    ext: &SemisplitExtension,
    class: &QkClass,
) -> Result<BoundaryEvenResult, QkError> {
    if class.parity != ClassParity::Even {
        return Err(QkError::UnsupportedAlgebra);
    }
    let p = &class.witness.element;
    let eps = class.witness.epsilon;
    let cutoff = series_cutoff_exp(eps);
    let lifted = ext.lift_ambient(p)?;
    let generator = lifted.scale(C64::new(0.0, 2.0 * std::f64::consts::PI));
    let z_p = element_trunc_exp(&generator, cutoff)?;
    let unit = z_p.unit_like().map_err(QkError::from)?;
    let raw_loop = z_p.sub(&ext.retract(&z_p)?)?.add(&unit)?;
    let defect = unitary_defect(&raw_loop)?;
    let propagation = raw_loop.propagation();

    // Closed-form comparison value for cone extensions: with kappa0(p) an
    // exact projection, exp(2 pi i c(t) kappa0) = 1 + (e^{2 pi i c(t)} - 1) kappa0.
    let check_value = if ext.is_shift_model() {
        None
    } else {
        let kappa = kappa0(&class.witness)?;
        let section_of_kappa = ext.section(&kappa)?;
        let count = section_of_kappa.sample_count().expect("cone sections are paths");
        let mut exp_samples = Vec::with_capacity(count);
        // Recover the profile value c(t) from the section samples to stay
        // faithful to whichever admissible section the extension carries.
        let kappa_norm = kappa.norm();
        for i in 0..count {
            let sample = section_of_kappa.eval_sample(i)?;
            let c = if kappa_norm > 0.0 { sample.norm() / kappa_norm } else { 0.0 };
            let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * c);
            exp_samples.push(kappa.scale(phase - C64::new(1.0, 0.0)))
        }
        let inner = FilteredElement::path(exp_samples, true, false)?;
        let dim = p.to_matrix()?.rows();
        let exp_section = FilteredElement::unitized(inner, CMatrix::identity(dim))?;
        Some(raw_loop.with_path_flags(true, false)?.sub(&exp_section)?.norm())
    };

    // Winding correction for the rank offset: multiply by the exact loop
    // 1 + E_l (e^{-2 pi i t} - 1).
    let element = if class.rank_offset == 0 {
        raw_loop.clone()
    } else {
        let corrector = diagonal_projection_like(p, class.rank_offset)?;
        let count = raw_loop.sample_count().expect("boundary loops are paths");
        let inner = raw_loop.unitized_inner().expect("boundary loops are unitized");
        let (v0, v1) = inner.path_flags().expect("inner is a path");
        let scalar = raw_loop.scalar_part().expect("boundary loops are unitized").clone();
        let mut samples = Vec::with_capacity(count);
        for i in 0..count {
            let t = i as f64 / (count - 1) as f64;
            let phase = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * t);
            let unit_c = corrector.unit_like().map_err(QkError::from)?;
            let twist = unit_c.add(&corrector.scale(phase - C64::new(1.0, 0.0)))?;
            let value = raw_loop.eval_sample(i)?;
            samples.push(twist.mul(&value)?.sub(&unit_c)?);
        }
        FilteredElement::unitized(FilteredElement::path(samples, v0, v1)?, scalar)?
    };

    let defect_full = unitary_defect(&element)?;
    let eps_out = (defect_full * 1.0001).max(1e-12);
    if eps_out >= 0.25 {
        return Err(QkError::DefectTooLarge { measured: defect_full, allowed: 0.25 });
    }
    let witness = check_witness(&element, Parity::Unitary, eps_out, propagation.max(element.propagation()))?;
    Ok(BoundaryEvenResult {
        class: QkClass::odd(witness),
        raw_loop,
        check_value,
        cutoff,
        defect,
        propagation,
        alpha_emp: defect / eps,
    })
}

/// Result of the odd controlled boundary.
#[derive(Clone, Debug)]
pub struct BoundaryOddResult {
    /// The even class [h + diag(1, 0), n] in the unitized ideal.
    pub class: QkClass,
    pub lift: UnitaryLiftResult,
    pub defect: f64,
    pub propagation: f64,
}

/// The odd boundary of a unitary class [u] in the quotient: the companion
/// is fixed to u*, the homotopy of diag(u, u*) to 1 is lifted to W, and the
/// class of `W diag(1, 0) W*` is compressed into the ideal.
pub fn boundary_odd(
    ext: &SemisplitExtension,
    class: &QkClass,
) -> Result<BoundaryOddResult, QkError> {
    if class.parity != ClassParity::Odd {
        return Err(QkError::UnsupportedAlgebra);
    }
    let eps = class.witness.epsilon;
    let radius = class.witness.radius;
    let homotopy = inverse_homotopy(&class.witness)?;
    let lift = unitary_lift(ext, &homotopy, 3.0 * eps, 2.0 * radius)?;
    let w = &lift.w;

    // The scalar projection diag(1_half, 0) in the ambient of W.
    let half_rank = scalar_dim_of(w)? / 2;
    let d_matrix = CMatrix::from_fn(2 * half_rank, 2 * half_rank, |i, j| {
        if i == j && i < half_rank { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let d = ext.ambient_scalar(w, &d_matrix)?;

    let x = w.mul(&d)?.mul(&w.adjoint())?;
    let x = x.add(&x.adjoint())?.scale_real(0.5);
    let diff = x.sub(&d)?;
    let h = diff.sub(&ext.retract(&diff)?)?;
    let element = h.add(&d)?;
    let sym = element.add(&element.adjoint())?.scale_real(0.5);

    let defect = sym.mul(&sym)?.sub(&sym)?.norm();
    let propagation = sym.propagation();
    let eps_out = (defect * 1.0001).max(1e-12);
    if eps_out >= 0.25 {
        return Err(QkError::DefectTooLarge { measured: defect, allowed: 0.25 });
    }
    let witness = check_witness(&sym, Parity::Projection, eps_out, propagation)?;
    let class_out = QkClass::even(witness, half_rank)?;
    Ok(BoundaryOddResult { class: class_out, lift, defect, propagation })
}

/// Dimension of the scalar/coefficient fibre of an ambient element.
fn scalar_dim_of(x: &FilteredElement) -> Result<usize, QkError> {
    if let Some(z) = x.scalar_part() {
        return Ok(z.rows());
    }
    if let Some(t) = x.as_toeplitz() {
        return Ok(t.coeff_dim());
    }
    Err(QkError::UnsupportedAlgebra)
}
