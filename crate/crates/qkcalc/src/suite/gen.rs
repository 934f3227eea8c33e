//! Deterministic random witnesses: exact projections and unitaries
//! perturbed so the measured defect lands inside [eps/4, 3 eps/4].

use crate::algebra::{FilteredElement, FiniteMetricSpace};
use crate::linalg::{C64, CMatrix};
use crate::quantk::{Parity, QkWitness, check_witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Per-trial generator derived from (suite seed, check name, trial index);
/// trials are independent of scheduling order.
pub fn trial_rng(seed: u64, check: &str, trial: u64) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in check.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&h.to_le_bytes());
    bytes[16..24].copy_from_slice(&trial.to_le_bytes());
    bytes[24..32].copy_from_slice(&(!trial).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

fn random_hermitian_banded(
    rng: &mut ChaCha8Rng,
    space: &Arc<FiniteMetricSpace>,
    radius: f64,
) -> CMatrix {
    let n = space.size();
    let g = CMatrix::from_fn(n, n, |i, j| {
        if space.distance(i, j) <= radius {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let h = g.add(&g.adjoint()).scale(C64::new(0.5, 0.0));
    let norm = h.op_norm();
    if norm > 0.0 { h.scale(C64::new(1.0 / norm, 0.0)) } else { h }
}

fn random_hermitian_dense(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let h = g.add(&g.adjoint()).scale(C64::new(0.5, 0.0));
    let norm = h.op_norm();
    if norm > 0.0 { h.scale(C64::new(1.0 / norm, 0.0)) } else { h }
}

fn random_diagonal_projection(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    // At least one 1 and one 0 when the dimension allows, so both spectral
    // clusters are populated.
    loop {
        let mut diag = vec![0.0f64; n];
        let mut ones = 0usize;
        for d in diag.iter_mut() {
            if rng.gen_bool(0.5) {
                *d = 1.0;
                ones += 1;
            }
        }
        if n < 2 || (ones > 0 && ones < n) {
            return CMatrix::diag_real(&diag);
        }
    }
}

/// Calibrates delta so the defect of kappa + delta H lands in
/// [eps/4, 3 eps/4].
fn calibrate(
    kappa: &CMatrix,
    h: &CMatrix,
    eps: f64,
    defect: impl Fn(&CMatrix) -> f64,
) -> CMatrix {
    let target = eps / 2.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // Grow until the defect brackets the target.
    for _ in 0..40 {
        let m = kappa.add(&h.scale(C64::new(hi, 0.0)));
        if defect(&m) >= target {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let m = kappa.add(&h.scale(C64::new(mid, 0.0)));
        if defect(&m) < target { lo = mid } else { hi = mid }
    }
    kappa.add(&h.scale(C64::new(0.5 * (lo + hi), 0.0)))
}

fn projection_defect(m: &CMatrix) -> f64 {
    m.mul(m).sub(m).op_norm()
}

/// A random almost projection in a band algebra: a diagonal exact
/// projection plus a calibrated banded Hermitian perturbation.
pub fn random_band_projection(
    rng: &mut ChaCha8Rng,
    space: &Arc<FiniteMetricSpace>,
    radius: f64,
    eps: f64,
) -> QkWitness {
    let n = space.size();
    let kappa = random_diagonal_projection(rng, n);
    let h = random_hermitian_banded(rng, space, radius);
    let p = calibrate(&kappa, &h, eps, projection_defect);
    let element = FilteredElement::band(space.clone(), 1, p).expect("band witness");
    let radius_measured = element.propagation().max(radius);
    check_witness(&element, Parity::Projection, eps, radius_measured)
        .expect("calibrated projection is admissible")
}

/// A random almost projection on plain matrices.
pub fn random_scalar_projection(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> QkWitness {
    let kappa = random_diagonal_projection(rng, n);
    let h = random_hermitian_dense(rng, n);
    let p = calibrate(&kappa, &h, eps, projection_defect);
    let element = FilteredElement::scalar_matrix(p).expect("scalar witness");
    check_witness(&element, Parity::Projection, eps, 0.0)
        .expect("calibrated projection is admissible")
}

/// A nearby second projection: p plus a small banded Hermitian bump within
/// both the perturbation margin and the 1/16 conjugation range.
pub fn nearby_band_projection(
    rng: &mut ChaCha8Rng,
    base: &QkWitness,
    space: &Arc<FiniteMetricSpace>,
    radius: f64,
) -> QkWitness {
    let g = random_hermitian_banded(rng, space, radius);
    let margin = (base.epsilon - base.defect_sq) / 8.0;
    let nu = margin.min(1.0 / 32.0);
    let q = base
        .element
        .to_matrix()
        .expect("band witness")
        .add(&g.scale(C64::new(nu, 0.0)));
    let element = FilteredElement::band(space.clone(), 1, q).expect("band witness");
    let radius_measured = element.propagation().max(base.radius);
    check_witness(&element, Parity::Projection, base.epsilon, radius_measured)
        .expect("perturbation within the margin stays admissible")
}

fn unitary_defect_matrix(m: &CMatrix) -> f64 {
    let id = CMatrix::identity(m.rows());
    let left = m.adjoint().mul(m).sub(&id).op_norm();
    let right = m.mul(&m.adjoint()).sub(&id).op_norm();
    left.max(right)
}

/// A random banded exact unitary: a displacement-bounded permutation with
/// random phases.
fn random_band_exact_unitary(
    rng: &mut ChaCha8Rng,
    space: &Arc<FiniteMetricSpace>,
    radius: f64,
) -> CMatrix {
    let n = space.size();
    // Random involutive pairing of adjacent points within the radius.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || !rng.gen_bool(0.5) {
            continue;
        }
        for j in (i + 1)..n {
            if !used[j] && space.distance(i, j) <= radius && rng.gen_bool(0.5) {
                perm.swap(i, j);
                used[i] = true;
                used[j] = true;
                break;
            }
        }
    }
    CMatrix::from_fn(n, n, |i, j| {
        if perm[j] == i {
            C64::from_polar(1.0, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// A random almost unitary in a band algebra: an exact banded unitary times
/// `1 + delta H` with the defect calibrated into [eps/4, 3 eps/4].
pub fn random_band_unitary(
    rng: &mut ChaCha8Rng,
    space: &Arc<FiniteMetricSpace>,
    radius: f64,
    eps: f64,
) -> QkWitness {
    let v = random_band_exact_unitary(rng, space, radius);
    let h = random_hermitian_banded(rng, space, radius);
    let n = space.size();
    let id = CMatrix::identity(n);
    let u = calibrate(&id, &h, eps, unitary_defect_matrix);
    let m = v.mul(&u);
    let element = FilteredElement::band(space.clone(), 1, m).expect("band witness");
    let radius_measured = element.propagation().max(radius);
    check_witness(&element, Parity::Unitary, eps, radius_measured)
        .expect("calibrated unitary is admissible")
}

/// A random almost unitary on plain matrices.
pub fn random_scalar_unitary(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> QkWitness {
    let h = random_hermitian_dense(rng, n);
    let exact = {
        // Exact unitary from the spectral calculus of a random Hermitian.
        let s = h.herm_eig().expect("hermitian");
        s.apply(|l| C64::from_polar(1.0, l))
    };
    let bump = random_hermitian_dense(rng, n);
    let near_one = calibrate(&CMatrix::identity(n), &bump, eps, unitary_defect_matrix);
    let element = FilteredElement::scalar_matrix(exact.mul(&near_one)).expect("scalar witness");
    check_witness(&element, Parity::Unitary, eps, 0.0)
        .expect("calibrated unitary is admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_defects_in_range() {
        let space = Arc::new(FiniteMetricSpace::line(8));
        for trial in 0..20 {
            let mut rng = trial_rng(7, "gen-test", trial);
            for eps in [0.01, 0.05, 0.1] {
                let p = random_band_projection(&mut rng, &space, 2.0, eps);
                assert!(p.defect_sq >= eps / 4.0 && p.defect_sq <= 3.0 * eps / 4.0);
                let u = random_band_unitary(&mut rng, &space, 2.0, eps);
                assert!(u.defect_sq >= eps / 4.0 && u.defect_sq <= 3.0 * eps / 4.0);
            }
        }
    }

    #[test]
    fn nearby_projection_is_close_and_admissible() {
        let space = Arc::new(FiniteMetricSpace::line(8));
        let mut rng = trial_rng(11, "gen-near", 0);
        let p = random_band_projection(&mut rng, &space, 2.0, 0.05);
        let q = nearby_band_projection(&mut rng, &p, &space, 2.0);
        let d = p.element.sub(&q.element).unwrap().norm();
        assert!(d < 1.0 / 16.0);
    }

    #[test]
    fn trial_rng_is_deterministic_and_check_dependent() {
        let a: Vec<u64> = (0..4).map(|t| trial_rng(5, "alpha", t).gen::<u64>()).collect();
        let b: Vec<u64> = (0..4).map(|t| trial_rng(5, "alpha", t).gen::<u64>()).collect();
        let c: Vec<u64> = (0..4).map(|t| trial_rng(5, "beta", t).gen::<u64>()).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
