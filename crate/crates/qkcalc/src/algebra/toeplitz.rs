//! Exact arithmetic for banded operators on one-sided sequence space:
//! finite sums `sum c_{a,b} S^a S*^b` with matrix coefficients, where S is
//! the unilateral shift. Since `S* S = 1` exactly, products of normal-form
//! terms stay in normal form and no truncation error is introduced; the
//! compact (finite-window) part is recovered by subtracting the symbol.

use super::{AlgebraError, AlgebraKind};
use crate::linalg::{C64, CMatrix, TAU};
use std::collections::BTreeMap;

/// A banded Toeplitz-type operator with coefficients in a matrix-backed
/// algebra: symbol plus finite-window correction, stored exactly in the
/// normal form `sum_{a,b} c_{a,b} S^a S*^b`.
#[derive(Clone, Debug)]
pub struct ToeplitzElement {
    coeff_kind: AlgebraKind,
    coeff_dim: usize,
    terms: BTreeMap<(u32, u32), CMatrix>,
}

impl ToeplitzElement {
    pub fn new(
        coeff_kind: AlgebraKind,
        terms: BTreeMap<(u32, u32), CMatrix>,
    ) -> Result<Self, AlgebraError> {
        let coeff_dim = coeff_kind
            .matrix_dim()
            .ok_or_else(|| AlgebraError::Unsupported("Toeplitz coefficients must be matrix-backed".into()))?;
        let mut pruned = BTreeMap::new();
        for (idx, m) in terms {
            if m.rows() != coeff_dim || m.cols() != coeff_dim {
                return Err(AlgebraError::Mismatch("coefficient has wrong dimension".into()));
            }
            if m.max_entry() > TAU {
                pruned.insert(idx, m);
            }
        }
        Ok(ToeplitzElement { coeff_kind, coeff_dim, terms: pruned })
    }

    /// The constant operator `m (x) 1`.
    pub fn constant(m: CMatrix, coeff_kind: AlgebraKind) -> Result<Self, AlgebraError> {
        let mut terms = BTreeMap::new();
        terms.insert((0u32, 0u32), m);
        Self::new(coeff_kind, terms)
    }

    /// The shift `S (x) m`.
    pub fn shift(m: CMatrix, coeff_kind: AlgebraKind) -> Result<Self, AlgebraError> {
        let mut terms = BTreeMap::new();
        terms.insert((1u32, 0u32), m);
        Self::new(coeff_kind, terms)
    }

    pub fn coeff_kind(&self) -> &AlgebraKind {
        &self.coeff_kind
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn zero_like(&self) -> Self {
        ToeplitzElement {
            coeff_kind: self.coeff_kind.clone(),
            coeff_dim: self.coeff_dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit_like(&self) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0u32, 0u32), CMatrix::identity(self.coeff_dim));
        ToeplitzElement {
            coeff_kind: self.coeff_kind.clone(),
            coeff_dim: self.coeff_dim,
            terms,
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (&(a, b), m) in &self.terms {
            terms.insert((b, a), m.adjoint());
        }
        ToeplitzElement {
            coeff_kind: self.coeff_kind.clone(),
            coeff_dim: self.coeff_dim,
            terms,
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        let terms = self.terms.iter().map(|(&i, m)| (i, m.scale(z))).collect();
        ToeplitzElement {
            coeff_kind: self.coeff_kind.clone(),
            coeff_dim: self.coeff_dim,
            terms,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.coeff_kind != other.coeff_kind {
            return Err(AlgebraError::Mismatch("Toeplitz coefficient algebras differ".into()));
        }
        let mut terms = self.terms.clone();
        for (&i, m) in &other.terms {
            match terms.get_mut(&i) {
                Some(e) => *e = e.add(m),
                None => {
                    terms.insert(i, m.clone());
                }
            }
        }
        terms.retain(|_, m| m.max_entry() > TAU);
        Ok(ToeplitzElement {
            coeff_kind: self.coeff_kind.clone(),
            coeff_dim: self.coeff_dim,
            terms,
        })
    }

    /// Exact product: `(S^a S*^b)(S^c S*^d)` is `S^{a+c-b} S*^d` when
    /// `c >= b` and `S^a S*^{b-c+d}` otherwise, because `S* S = 1`.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.coeff_kind != other.coeff_kind {
            return Err(AlgebraError::Mismatch("Toeplitz coefficient algebras differ".into()));
        }
        let mut terms: BTreeMap<(u32, u32), CMatrix> = BTreeMap::new();
        for (&(a, b), ma) in &self.terms {
            for (&(c, d), mb) in &other.terms {
                let idx = if c >= b { (a + c - b, d) } else { (a, b - c + d) };
                let prod = ma.mul(mb);
                match terms.get_mut(&idx) {
                    Some(e) => *e = e.add(&prod),
                    None => {
                        terms.insert(idx, prod);
                    }
                }
            }
        }
        terms.retain(|_, m| m.max_entry() > TAU);
        Ok(ToeplitzElement {
            coeff_kind: self.coeff_kind.clone(),
            coeff_dim: self.coeff_dim,
            terms,
        })
    }

    /// Laurent symbol coefficients: power k carries `sum_{a-b=k} c_{a,b}`.
    pub fn symbol_coeffs(&self) -> BTreeMap<i64, CMatrix> {
        let mut out: BTreeMap<i64, CMatrix> = BTreeMap::new();
        for (&(a, b), m) in &self.terms {
            let k = a as i64 - b as i64;
            match out.get_mut(&k) {
                Some(e) => *e = e.add(m),
                None => {
                    out.insert(k, m.clone());
                }
            }
        }
        out.retain(|_, m| m.max_entry() > TAU);
        out
    }

    /// Largest symbol power in modulus.
    pub fn bandwidth(&self) -> u32 {
        self.symbol_coeffs()
            .keys()
            .map(|k| k.unsigned_abs() as u32)
            .max()
            .unwrap_or(0)
    }

    /// Extent of the window outside of which the operator agrees with the
    /// pure symbol part.
    pub fn window_extent(&self) -> usize {
        self.terms
            .keys()
            .map(|&(a, b)| a.max(b) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Whether the symbol vanishes, i.e. the element is a finite-window
    /// (compact) operator.
    pub fn is_compact(&self, tol: f64) -> bool {
        self.symbol_coeffs().values().all(|m| m.max_entry() <= tol)
    }

    /// The pure Toeplitz quantization of a symbol: power k to `S^k` or
    /// `S*^{-k}`.
    pub fn from_symbol(
        symbol: &BTreeMap<i64, CMatrix>,
        coeff_kind: AlgebraKind,
    ) -> Result<Self, AlgebraError> {
        let mut terms = BTreeMap::new();
        for (&k, m) in symbol {
            let idx = if k >= 0 { (k as u32, 0u32) } else { (0u32, (-k) as u32) };
            terms.insert(idx, m.clone());
        }
        Self::new(coeff_kind, terms)
    }

    /// Splits into Toeplitz quantization of the symbol plus the compact rest.
    pub fn compact_part(&self) -> Result<Self, AlgebraError> {
        let t = Self::from_symbol(&self.symbol_coeffs(), self.coeff_kind.clone())?;
        self.sub(&t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Dense compression to the window {0, ..., sites-1}.
    pub fn window_matrix(&self, sites: usize) -> CMatrix {
        let m = self.coeff_dim;
        let mut out = CMatrix::zeros(sites * m, sites * m);
        for (&(a, b), coeff) in &self.terms {
            let (a, b) = (a as usize, b as usize);
            for j in b..sites {
                let i = j - b + a;
                if i >= sites {
                    continue;
                }
                for r in 0..m {
                    for c in 0..m {
                        let cur = out.get(i * m + r, j * m + c);
                        out.set(i * m + r, j * m + c, cur + coeff.get(r, c));
                    }
                }
            }
        }
        out
    }

    /// Supremum of the symbol norm over a sampling grid of the circle.
    pub fn symbol_sup_norm(&self, grid: usize) -> f64 {
        let symbol = self.symbol_coeffs();
        if symbol.is_empty() {
            return 0.0;
        }
        let mut sup: f64 = 0.0;
        for j in 0..grid {
            let t = j as f64 / grid as f64;
            let mut val = CMatrix::zeros(self.coeff_dim, self.coeff_dim);
            for (&k, m) in &symbol {
                let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * t);
                val = val.add(&m.scale(phase));
            }
            sup = sup.max(val.op_norm());
        }
        sup
    }

    /// Upper bound on the operator norm: symbol supremum plus the norm of
    /// the compact window.
    pub fn norm_bound(&self) -> f64 {
        let sym = self.symbol_sup_norm(128);
        let compact = match self.compact_part() {
            Ok(c) => {
                let w = c.window_extent();
                if w == 0 {
                    0.0
                } else {
                    c.window_matrix(w).op_norm()
                }
            }
            Err(_) => 0.0,
        };
        sym + compact
    }

    pub fn sup_entry(&self) -> f64 {
        self.terms.values().map(|m| m.max_entry()).fold(0.0, f64::max)
    }

    /// Propagation in the coefficient algebra's filtration (the shift does
    /// not propagate).
    pub fn propagation(&self) -> f64 {
        self.terms
            .values()
            .map(|m| matrix_propagation_in(&self.coeff_kind, m))
            .fold(0.0, f64::max)
    }

    /// Sampled loop of symbol values on the uniform grid t = 0, ..., 1.
    pub fn symbol_samples(&self, intervals: usize) -> Vec<CMatrix> {
        let symbol = self.symbol_coeffs();
        (0..=intervals)
            .map(|j| {
                let t = j as f64 / intervals as f64;
                let mut val = CMatrix::zeros(self.coeff_dim, self.coeff_dim);
                for (&k, m) in &symbol {
                    let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * t);
                    val = val.add(&m.scale(phase));
                }
                val
            })
            .collect()
    }

    /// Toeplitz quantization of a sampled loop (samples over t = 0, ..., 1
    /// with matching endpoints): discrete Fourier coefficients followed by
    /// `from_symbol`. Exact for trigonometric polynomials of bandwidth
    /// below half the grid; verified by re-evaluating on the grid.
    pub fn quantize_loop(
        samples: &[CMatrix],
        coeff_kind: AlgebraKind,
    ) -> Result<Self, AlgebraError> {
        let n = samples.len() - 1;
        if n < 4 {
            return Err(AlgebraError::Unsupported("loop grid too coarse to quantize".into()));
        }
        let dim = samples[0].rows();
        let scale = samples.iter().map(|m| m.max_entry()).fold(0.0, f64::max);
        if samples[0].sub(&samples[n]).max_entry() > 1e-9 * (1.0 + scale) {
            return Err(AlgebraError::Membership("loop endpoints do not match".into()));
        }
        let kmax = (n / 2) as i64 - 1;
        let mut symbol = BTreeMap::new();
        for k in -kmax..=kmax {
            let mut c = CMatrix::zeros(dim, dim);
            for (j, sample) in samples.iter().take(n).enumerate() {
                let phase =
                    C64::from_polar(1.0 / n as f64, -2.0 * std::f64::consts::PI * (k * j as i64) as f64 / n as f64);
                c = c.add(&sample.scale(phase));
            }
            if c.max_entry() > 1e-13 * (1.0 + scale) {
                symbol.insert(k, c);
            }
        }
        let out = Self::from_symbol(&symbol, coeff_kind)?;
        // Aliasing guard: the reconstruction must reproduce the samples.
        let recon = out.symbol_samples(n);
        for (r, s) in recon.iter().zip(samples) {
            if r.sub(s).max_entry() > 1e-8 * (1.0 + scale) {
                return Err(AlgebraError::Membership(
                    "loop is not band-limited on this grid".into(),
                ));
            }
        }
        Ok(out)
    }

    /// Assembles a square grid of Toeplitz blocks, outer index first.
    pub fn from_block_grid(grid: &[Vec<&ToeplitzElement>]) -> Result<Self, AlgebraError> {
        let n = grid.len();
        let model = grid[0][0];
        let d = model.coeff_dim;
        let mut indices: Vec<(u32, u32)> = Vec::new();
        for row in grid {
            for blk in row {
                if blk.coeff_kind != model.coeff_kind {
                    return Err(AlgebraError::Mismatch("grid blocks in different algebras".into()));
                }
                for idx in blk.terms.keys() {
                    if !indices.contains(idx) {
                        indices.push(*idx);
                    }
                }
            }
        }
        let mut terms = BTreeMap::new();
        for idx in indices {
            let mut m = CMatrix::zeros(n * d, n * d);
            for (bi, row) in grid.iter().enumerate() {
                for (bj, blk) in row.iter().enumerate() {
                    if let Some(bm) = blk.terms.get(&idx) {
                        for i in 0..d {
                            for j in 0..d {
                                m.set(bi * d + i, bj * d + j, bm.get(i, j));
                            }
                        }
                    }
                }
            }
            terms.insert(idx, m);
        }
        // The grid blocks share a coefficient kind; the assembled coefficient
        // lives in the amplified kind.
        let coeff_kind = amplified_kind(&model.coeff_kind, n);
        Self::new(coeff_kind, terms)
    }
}

fn amplified_kind(kind: &AlgebraKind, n: usize) -> AlgebraKind {
    match kind {
        AlgebraKind::Scalar { dim } => AlgebraKind::Scalar { dim: dim * n },
        AlgebraKind::Band { space, block_dim } => AlgebraKind::Band {
            space: space.clone(),
            block_dim: block_dim * n,
        },
        other => other.clone(),
    }
}

/// Propagation of a dense matrix viewed in a matrix-backed algebra.
pub(crate) fn matrix_propagation_in(kind: &AlgebraKind, m: &CMatrix) -> f64 {
    match kind {
        AlgebraKind::Scalar { .. } => 0.0,
        AlgebraKind::Band { space, block_dim } => {
            let b = *block_dim;
            let mut prop: f64 = 0.0;
            for x in 0..space.size() {
                for y in 0..space.size() {
                    let d = space.distance(x, y);
                    if d <= prop {
                        continue;
                    }
                    'block: for i in 0..b {
                        for j in 0..b {
                            if m.get(x * b + i, y * b + j).norm() > TAU {
                                prop = d;
                                break 'block;
                            }
                        }
                    }
                }
            }
            prop
        }
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_kind() -> AlgebraKind {
        AlgebraKind::Scalar { dim: 1 }
    }

    fn s() -> ToeplitzElement {
        ToeplitzElement::shift(CMatrix::identity(1), scalar_kind()).unwrap()
    }

    #[test]
    fn isometry_relation() {
        // S* S = 1 exactly; S S* = 1 - e00.
        let shift = s();
        let left = shift.adjoint().mul(&shift).unwrap();
        let unit = shift.unit_like();
        assert!(left.sub(&unit).unwrap().sup_entry() < 1e-15);
        let right = shift.mul(&shift.adjoint()).unwrap();
        let defect = right.sub(&unit).unwrap();
        assert!(defect.is_compact(1e-15));
        let w = defect.window_matrix(4);
        assert!((w.get(0, 0) + C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((w.get(1, 1)).norm() < 1e-15);
    }

    #[test]
    fn window_matrix_matches_shift_action() {
        let shift = s();
        let w = shift.window_matrix(4);
        // S e_0 = e_1.
        assert_eq!(w.get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(w.get(0, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn symbol_and_compact_split() {
        // S + e00 has symbol z and a rank-one window correction.
        let shift = s();
        let unit = shift.unit_like();
        let e00 = unit.sub(&shift.mul(&shift.adjoint()).unwrap()).unwrap();
        let x = shift.add(&e00).unwrap();
        let sym = x.symbol_coeffs();
        assert_eq!(sym.len(), 1);
        assert!(sym.contains_key(&1));
        let compact = x.compact_part().unwrap();
        assert!(compact.is_compact(1e-15));
        assert!((compact.window_matrix(2).get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quantize_round_trip() {
        // The loop e^{2 pi i t} quantizes to the shift itself.
        let samples: Vec<CMatrix> = (0..=64)
            .map(|j| {
                let t = j as f64 / 64.0;
                CMatrix::identity(1).scale(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
            })
            .collect();
        let q = ToeplitzElement::quantize_loop(&samples, scalar_kind()).unwrap();
        assert!(q.sub(&s()).unwrap().sup_entry() < 1e-12);
    }

    #[test]
    fn norm_bound_dominates_window_norm() {
        let shift = s();
        let x = shift.add(&shift.adjoint()).unwrap().scale(C64::new(0.5, 0.0));
        let bound = x.norm_bound();
        let window = x.window_matrix(64).op_norm();
        assert!(bound + 1e-12 >= window);
        assert!(bound <= 1.0 + 1e-12);
    }
}
