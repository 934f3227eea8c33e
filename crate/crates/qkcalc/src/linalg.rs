//! Dense complex linear algebra and the truncated-series functional calculus
//! used by every construction in the crate.
//!
//! Matrices are small (desk scale, a few hundred rows at most), so operator
//! norms go through a full SVD and Hermitian spectra through a dense
//! eigendecomposition. No iterative or sparse fallback is provided.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

/// Numerical zero threshold for support and propagation decisions.
pub const TAU: f64 = 1e-14;

/// Self-adjointness defect tolerated before symmetrization is refused.
pub const ADJ_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix entry is not finite")]
    NonFinite,
    #[error("not self-adjoint: defect {defect:.3e} exceeds {allowed:.3e}")]
    NotSelfAdjoint { defect: f64, allowed: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense complex matrix in double precision.
///
/// Invariants: all entries are finite, and `adjoint` is an exact involution.
#[derive(Clone, PartialEq, Debug)]
pub struct CMatrix {
    inner: DMatrix<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = DMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch(format!(
                    "ragged row {i}: {} vs {}",
                    row.len(),
                    c
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(LinalgError::NonFinite);
                }
                m[(i, j)] = *v;
            }
        }
        Ok(CMatrix { inner: m })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix {
            inner: DMatrix::from_fn(rows, cols, |i, j| f(i, j)),
        }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        Self::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.inner[(i, j)] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        CMatrix {
            inner: self.inner.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        CMatrix {
            inner: &self.inner * &other.inner,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        CMatrix {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        CMatrix {
            inner: &self.inner - &other.inner,
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        CMatrix {
            inner: self.inner.map(|v| v * z),
        }
    }

    /// Kronecker product, `self` indexing the outer factor.
    pub fn kron(&self, other: &Self) -> Self {
        CMatrix {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    /// Largest entry modulus; zero for empty matrices.
    pub fn max_entry(&self) -> f64 {
        self.inner.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Self-adjointness defect `max |m - m*|` entrywise.
    pub fn adjoint_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_entry()
    }

    /// Operator norm (largest singular value), relative accuracy about 1e-10.
    pub fn op_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        let svd = self.inner.clone().svd(false, false);
        svd.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Determinant; used for winding computations on unitaries.
    pub fn det(&self) -> C64 {
        self.inner.determinant()
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.inner.clone().try_inverse().map(|inner| CMatrix { inner })
    }

    /// Truncated exponential `sum_{l=0}^{L} m^l / l!`.
    pub fn trunc_exp(&self, order: usize) -> Self {
        let n = self.rows();
        assert_eq!(n, self.cols(), "trunc_exp requires a square matrix");
        let mut acc = DMatrix::<C64>::identity(n, n);
        let mut term = DMatrix::<C64>::identity(n, n);
        for l in 1..=order {
            term = (&term * &self.inner).map(|v| v / C64::new(l as f64, 0.0));
            acc += &term;
        }
        CMatrix { inner: acc }
    }

    /// Phase angles in (-pi, pi] and column eigenvectors of a unitary
    /// matrix, via the complex Schur form (diagonal for normal matrices).
    pub fn unitary_spectrum(&self) -> Result<(Vec<f64>, CMatrix), LinalgError> {
        let n = self.rows();
        assert_eq!(n, self.cols(), "unitary_spectrum requires a square matrix");
        let defect = self.adjoint().mul(self).sub(&CMatrix::identity(n)).op_norm();
        if defect > 1e-8 {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix is not unitary: defect {defect:.3e}"
            )));
        }
        let schur = nalgebra::Schur::new(self.inner.clone());
        let (q, t) = schur.unpack();
        let mut offdiag: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    offdiag = offdiag.max(t[(i, j)].norm());
                }
            }
        }
        if offdiag > 1e-8 {
            return Err(LinalgError::DimensionMismatch(format!(
                "Schur form is not diagonal: off-diagonal {offdiag:.3e}"
            )));
        }
        let angles: Vec<f64> = (0..n).map(|i| t[(i, i)].arg()).collect();
        Ok((angles, CMatrix { inner: q }))
    }

    /// Spectral data of a self-adjoint matrix, eigenvalues ascending.
    ///
    /// The input is symmetrized when its defect is below [`ADJ_TOL`] relative
    /// to `1 + norm`, and rejected otherwise.
    pub fn herm_eig(&self) -> Result<HermitianSpectrum, LinalgError> {
        let n = self.rows();
        assert_eq!(n, self.cols(), "herm_eig requires a square matrix");
        if !self.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let defect = self.sub(&self.adjoint()).op_norm();
        let allowed = ADJ_TOL * (1.0 + self.op_norm());
        if defect > allowed {
            return Err(LinalgError::NotSelfAdjoint { defect, allowed });
        }
        let sym = (&self.inner + self.inner.adjoint()).map(|v| v * C64::new(0.5, 0.0));
        let eig = nalgebra::SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::<C64>::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        Ok(HermitianSpectrum {
            eigenvalues,
            eigenvectors: CMatrix { inner: vectors },
        })
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut rows = serializer.serialize_seq(Some(self.rows()))?;
        for i in 0..self.rows() {
            let row: Vec<[f64; 2]> = (0..self.cols())
                .map(|j| {
                    let v = self.get(i, j);
                    [v.re, v.im]
                })
                .collect();
            rows.serialize_element(&row)?;
        }
        rows.end()
    }
}

/// Eigenvalues (ascending) and a unitary matrix of column eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    /// `U diag(f(lambda)) U*`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.eigenvalues.len();
        let u = &self.eigenvectors.inner;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            self.eigenvalues.iter().map(|&l| f(l)),
        ));
        CMatrix {
            inner: u * d * u.adjoint(),
        }
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| C64::new(l, 0.0))
    }

    /// Number of eigenvalues strictly above 1/2.
    pub fn count_above_half(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > 0.5).count()
    }
}

const EXP_TAIL_TERMS: usize = 400;

fn exp_tail_suffixes() -> Vec<f64> {
    // suffix[l] = sum_{j >= l} 10^j / j!
    let mut terms = vec![0.0f64; EXP_TAIL_TERMS + 1];
    let mut t = 1.0f64;
    for (l, slot) in terms.iter_mut().enumerate() {
        *slot = t;
        t *= 10.0 / (l as f64 + 1.0);
    }
    let mut suffix = vec![0.0f64; EXP_TAIL_TERMS + 2];
    for l in (0..=EXP_TAIL_TERMS).rev() {
        suffix[l] = suffix[l + 1] + terms[l];
    }
    suffix
}

/// Smallest `L` with `sum_{l > L} 10^l / l! < eps`, for `eps` in (0, 1/4).
pub fn series_cutoff_exp(eps: f64) -> usize {
    assert!(eps > 0.0 && eps < 0.25, "cutoff needs eps in (0, 1/4)");
    let suffix = exp_tail_suffixes();
    for l in 0..EXP_TAIL_TERMS {
        if suffix[l + 1] < eps {
            return l;
        }
    }
    unreachable!("tail did not drop below eps")
}

/// Signed power-series coefficients `a_k` of `t -> (1 + t)^(-1/2)`.
pub fn invsqrt_coefficients(count: usize) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(count);
    let mut a = 1.0f64;
    for k in 0..count {
        coeffs.push(a);
        a *= (-0.5 - k as f64) / (k as f64 + 1.0);
    }
    coeffs
}

const INVSQRT_TAIL_TERMS: usize = 700;

/// Smallest `n` with `sum_{k >= n} |a_k| / 2^k <= eps`, for `eps` in (0, 1/4).
pub fn series_cutoff_invsqrt(eps: f64) -> usize {
    assert!(eps > 0.0 && eps < 0.25, "cutoff needs eps in (0, 1/4)");
    let coeffs = invsqrt_coefficients(INVSQRT_TAIL_TERMS);
    let mut suffix = vec![0.0f64; INVSQRT_TAIL_TERMS + 1];
    for k in (0..INVSQRT_TAIL_TERMS).rev() {
        suffix[k] = suffix[k + 1] + coeffs[k].abs() / 2f64.powi(k as i32);
    }
    for n in 0..INVSQRT_TAIL_TERMS {
        if suffix[n] <= eps {
            return n;
        }
    }
    unreachable!("tail did not drop below eps")
}

/// Smallest `L` with both `sum_{k > L} 2^-k / k < eps` and
/// `sum_{k > L} ln(2)^k / k! < eps`; the cutoff for the truncated
/// exponential/logarithm pair used when lifting unitaries through a
/// quotient map.
pub fn series_cutoff_lift(eps: f64) -> usize {
    assert!(eps > 0.0 && eps < 0.25, "cutoff needs eps in (0, 1/4)");
    const TERMS: usize = 200;
    let mut log_suffix = vec![0.0f64; TERMS + 2];
    for k in (1..=TERMS).rev() {
        log_suffix[k] = log_suffix[k + 1] + 2f64.powi(-(k as i32)) / k as f64;
    }
    let ln2 = std::f64::consts::LN_2;
    let mut terms = vec![0.0f64; TERMS + 1];
    let mut t = 1.0f64;
    for (k, slot) in terms.iter_mut().enumerate() {
        *slot = t;
        t *= ln2 / (k as f64 + 1.0);
    }
    let mut exp_suffix = vec![0.0f64; TERMS + 2];
    for k in (0..=TERMS).rev() {
        exp_suffix[k] = exp_suffix[k + 1] + terms[k];
    }
    for l in 1..TERMS {
        if log_suffix[l + 1] < eps && exp_suffix[l + 1] < eps {
            return l;
        }
    }
    unreachable!("tails did not drop below eps")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    pub(crate) fn random_matrix(rng: &mut StdRng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    pub(crate) fn random_hermitian(rng: &mut StdRng, n: usize) -> CMatrix {
        let m = random_matrix(rng, n);
        m.add(&m.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Power iteration on m*m; independent of the SVD route.
    fn power_iteration_norm(m: &CMatrix, iters: usize) -> f64 {
        let g = m.adjoint().mul(m);
        let n = g.rows();
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + i as f64, 0.3)).collect();
        let mut lambda = 0.0;
        for _ in 0..iters {
            let mut w = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                for (j, vj) in v.iter().enumerate() {
                    w[i] += g.get(i, j) * vj;
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lambda = norm;
            for z in w.iter_mut() {
                *z /= C64::new(norm, 0.0);
            }
            v = w;
        }
        lambda.sqrt()
    }

    #[test]
    fn op_norm_identity() {
        assert_eq!(CMatrix::identity(3).op_norm(), 1.0);
    }

    #[test]
    fn op_norm_diagonal() {
        let m = CMatrix::diag_real(&[0.5, -2.0]);
        assert!((m.op_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_matches_power_iteration() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 8);
            let reference = power_iteration_norm(&m, 2000);
            assert!((m.op_norm() - reference).abs() < 1e-8);
        }
    }

    #[test]
    fn op_norm_submultiplicative() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_matrix(&mut rng, 6);
            let b = random_matrix(&mut rng, 6);
            assert!(a.mul(&b).op_norm() <= a.op_norm() * b.op_norm() + 1e-9);
        }
    }

    #[test]
    fn herm_eig_diagonal_projection() {
        let m = CMatrix::diag_real(&[1.0, 0.0]);
        let s = m.herm_eig().unwrap();
        assert!((s.eigenvalues[0] - 0.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_two_by_two_closed_form() {
        // Characteristic polynomial of [[0.55, 0.5], [0.5, 0.45]]:
        // trace 1, det -0.0025, roots (1 +- sqrt(1.01)) / 2.
        let m = CMatrix::from_rows(&[
            vec![C64::new(0.55, 0.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.5, 0.0), C64::new(0.45, 0.0)],
        ])
        .unwrap();
        let s = m.herm_eig().unwrap();
        assert!((s.eigenvalues[0] - (-0.002493781056044514)).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0024937810560445).abs() < 1e-12);
    }

    #[test]
    fn herm_eig_reconstruction() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let m = random_hermitian(&mut rng, 6);
            let s = m.herm_eig().unwrap();
            let err = s.reconstruct().sub(&m).op_norm();
            assert!(err <= 1e-10 * (1.0 + m.op_norm()));
            let u = &s.eigenvectors;
            let ortho = u.adjoint().mul(u).sub(&CMatrix::identity(6)).op_norm();
            assert!(ortho <= 1e-10);
        }
    }

    #[test]
    fn herm_eig_rejects_non_selfadjoint() {
        let m = CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            m.herm_eig(),
            Err(LinalgError::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn trunc_exp_of_zero_is_identity() {
        let z = CMatrix::zeros(4, 4);
        for order in [0, 1, 5] {
            assert!(z.trunc_exp(order).sub(&CMatrix::identity(4)).op_norm() < 1e-15);
        }
    }

    #[test]
    fn trunc_exp_full_turn_scalar() {
        // exp(2 pi i) = 1; at the 0.01 cutoff the truncation error obeys the
        // (2 e^10 + 1) eps envelope with lots of room.
        let m = CMatrix::identity(1).scale(C64::new(0.0, 2.0 * std::f64::consts::PI));
        let order = series_cutoff_exp(0.01);
        let err = m.trunc_exp(order).sub(&CMatrix::identity(1)).op_norm();
        assert!(err < (2.0 * 10f64.exp() + 1.0) * 0.01);
        assert!(err < 0.01);
    }

    #[test]
    fn trunc_exp_of_projection_winds_to_identity() {
        let p = CMatrix::diag_real(&[1.0, 1.0, 0.0]);
        let m = p.scale(C64::new(0.0, 2.0 * std::f64::consts::PI));
        let err = m.trunc_exp(60).sub(&CMatrix::identity(3)).op_norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn trunc_exp_matches_spectral_exponential_in_norm_ten_regime() {
        // For anti-Hermitian m with ||m|| <= 10 the truncated series at
        // series_cutoff_exp(eps) is within eps of the functional-calculus
        // exponential: the 10^l/l! tail dominates the remainder.
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 5);
            let scale = 10.0 / (1.0 + h.op_norm()) * rng.gen_range(0.2..1.0);
            let h = h.scale(C64::new(scale, 0.0));
            let m = h.scale(C64::new(0.0, 1.0));
            assert!(m.op_norm() <= 10.0);
            let spectral = h.herm_eig().unwrap().apply(|l| C64::new(0.0, l).exp());
            for eps in [0.1, 0.01] {
                let order = series_cutoff_exp(eps);
                assert!(m.trunc_exp(order).sub(&spectral).op_norm() < eps);
            }
        }
    }

    #[test]
    fn cutoff_exp_frozen_values() {
        // 400-term summation oracle: tail(26) = 0.1415 < 0.25 <= tail(25).
        assert_eq!(series_cutoff_exp(0.25 - 1e-12), 26);
        assert_eq!(series_cutoff_exp(0.01), 29);
    }

    #[test]
    fn cutoff_exp_tail_bound_holds() {
        for eps in [0.2, 0.1, 0.05, 0.01, 0.002] {
            let l = series_cutoff_exp(eps);
            let mut term = 1.0f64;
            let mut tail = 0.0f64;
            for j in 0..=(l + 200) {
                if j > l {
                    tail += term;
                }
                term *= 10.0 / (j as f64 + 1.0);
            }
            assert!(tail < eps, "tail {tail} at cutoff {l} >= {eps}");
            // Minimality: one step earlier the tail is too large.
            assert!(tail + 10f64.powi(l as i32) / factorial(l) >= eps);
        }
        assert!(series_cutoff_exp(0.01) >= series_cutoff_exp(0.24));
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn invsqrt_leading_coefficients() {
        let a = invsqrt_coefficients(4);
        assert_eq!(a[0], 1.0);
        assert_eq!(a[1], -0.5);
        assert!((a[2] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn cutoff_invsqrt_frozen_and_tail() {
        // 500-term summation oracle values.
        assert_eq!(series_cutoff_invsqrt(0.01), 6);
        assert_eq!(series_cutoff_invsqrt(0.05), 4);
        for eps in [0.2, 0.1, 0.05, 0.01, 0.002] {
            let n = series_cutoff_invsqrt(eps);
            let coeffs = invsqrt_coefficients(500);
            let tail: f64 = (n..500).map(|k| coeffs[k].abs() / 2f64.powi(k as i32)).sum();
            assert!(tail <= eps);
            if n > 0 {
                let prev = tail + coeffs[n - 1].abs() / 2f64.powi(n as i32 - 1);
                assert!(prev > eps);
            }
        }
    }

    #[test]
    fn cutoff_invsqrt_monotone() {
        assert!(series_cutoff_invsqrt(0.2) <= series_cutoff_invsqrt(0.1));
        assert!(series_cutoff_invsqrt(0.1) <= series_cutoff_invsqrt(0.01));
    }

    #[test]
    fn cutoff_lift_tails_hold() {
        for eps in [0.2, 0.05, 0.01] {
            let l = series_cutoff_lift(eps);
            let log_tail: f64 = ((l + 1)..200).map(|k| 2f64.powi(-(k as i32)) / k as f64).sum();
            let ln2 = std::f64::consts::LN_2;
            let exp_tail: f64 = ((l + 1)..200).map(|k| ln2.powi(k as i32) / factorial(k)).sum();
            assert!(log_tail < eps && exp_tail < eps);
        }
    }

    #[test]
    fn adjoint_is_involutive() {
        let mut rng = StdRng::seed_from_u64(41);
        let m = random_matrix(&mut rng, 7);
        assert_eq!(m.adjoint().adjoint(), m);
    }
}
