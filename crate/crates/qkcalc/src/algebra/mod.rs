//! Concrete filtered *-algebras with exact propagation tracking.
//!
//! Every element knows the algebra it lives in and its minimal propagation,
//! recomputed from the support after each operation: matrix algebras carry the
//! trivial filtration, band algebras measure support in a finite metric space,
//! group kernels measure support in word length, path algebras (cones,
//! suspensions, interval algebras) take the maximum over their samples, and
//! unitized elements propagate like their non-scalar part.

pub mod metric;
pub mod toeplitz;

pub use metric::{FiniteMetricSpace, MetricError, MetricSpec};
pub use toeplitz::ToeplitzElement;

use crate::geometry::group::{GeneratedGroup, GroupElement, GroupError};
use crate::linalg::{C64, CMatrix, LinalgError, TAU};
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("algebra mismatch: {0}")]
    Mismatch(String),
    #[error("membership violated: {0}")]
    Membership(String),
    #[error("algebra has no unit")]
    NoUnit,
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Descriptor determining multiplication, adjoint, norm and propagation
/// semantics of an algebra.
#[derive(Clone, PartialEq, Debug)]
pub enum AlgebraKind {
    /// Full matrix algebra over the complex numbers; propagation is zero.
    Scalar { dim: usize },
    /// Band matrices over a finite metric space, blocks of the given size.
    Band { space: Arc<FiniteMetricSpace>, block_dim: usize },
    /// Finitely supported kernels on a group with matrix coefficients.
    Group { group: Arc<GeneratedGroup>, block_dim: usize },
    /// Functions on [0, 1] into the base algebra, sampled on a uniform grid;
    /// the flags select the cone, the suspension or the interval algebra.
    Path { base: Box<AlgebraKind>, vanish_at_zero: bool, vanish_at_one: bool },
    /// Elements `a + z` with `a` in the base (path) algebra and scalar part z.
    Unitized { base: Box<AlgebraKind>, scalar_dim: usize },
    /// Polynomials in the one-sided shift with coefficients in a
    /// matrix-backed algebra.
    Toeplitz { coeff: Box<AlgebraKind> },
}

impl AlgebraKind {
    pub fn scalar(dim: usize) -> Self {
        AlgebraKind::Scalar { dim }
    }

    pub fn is_unital(&self) -> bool {
        match self {
            AlgebraKind::Scalar { .. }
            | AlgebraKind::Band { .. }
            | AlgebraKind::Group { .. }
            | AlgebraKind::Unitized { .. }
            | AlgebraKind::Toeplitz { .. } => true,
            AlgebraKind::Path { vanish_at_zero, vanish_at_one, .. } => {
                !vanish_at_zero && !vanish_at_one
            }
        }
    }

    /// Total matrix dimension for matrix-backed kinds.
    pub fn matrix_dim(&self) -> Option<usize> {
        match self {
            AlgebraKind::Scalar { dim } => Some(*dim),
            AlgebraKind::Band { space, block_dim } => Some(space.size() * block_dim),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Payload {
    Scalar(CMatrix),
    Band {
        space: Arc<FiniteMetricSpace>,
        block_dim: usize,
        matrix: CMatrix,
    },
    Group {
        group: Arc<GeneratedGroup>,
        block_dim: usize,
        coeffs: BTreeMap<GroupElement, CMatrix>,
    },
    Path {
        vanish_at_zero: bool,
        vanish_at_one: bool,
        samples: Vec<FilteredElement>,
    },
    Unitized {
        inner: Box<FilteredElement>,
        scalar: CMatrix,
    },
    Toeplitz(ToeplitzElement),
}

/// An algebra element with its exact computed propagation.
#[derive(Clone, Debug)]
pub struct FilteredElement {
    pub(crate) payload: Payload,
    propagation: f64,
    norm_cache: OnceLock<f64>,
}

impl FilteredElement {
    fn wrap(payload: Payload) -> Self {
        let propagation = compute_propagation(&payload);
        FilteredElement { payload, propagation, norm_cache: OnceLock::new() }
    }

    /// Element of a full matrix algebra.
    pub fn scalar_matrix(m: CMatrix) -> Result<Self, AlgebraError> {
        if !m.is_finite() {
            return Err(LinalgError::NonFinite.into());
        }
        if m.rows() != m.cols() {
            return Err(AlgebraError::Membership("matrix must be square".into()));
        }
        Ok(Self::wrap(Payload::Scalar(m)))
    }

    /// Band element over a finite metric space.
    pub fn band(
        space: Arc<FiniteMetricSpace>,
        block_dim: usize,
        matrix: CMatrix,
    ) -> Result<Self, AlgebraError> {
        let n = space.size() * block_dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(AlgebraError::Membership(format!(
                "band matrix must be {n} x {n}, got {} x {}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(LinalgError::NonFinite.into());
        }
        Ok(Self::wrap(Payload::Band { space, block_dim, matrix }))
    }

    /// Group convolution kernel; blocks with every entry below the support
    /// threshold are pruned so the stored support is minimal.
    pub fn group_kernel(
        group: Arc<GeneratedGroup>,
        block_dim: usize,
        coeffs: BTreeMap<GroupElement, CMatrix>,
    ) -> Result<Self, AlgebraError> {
        let mut pruned = BTreeMap::new();
        for (g, m) in coeffs {
            if m.rows() != block_dim || m.cols() != block_dim {
                return Err(AlgebraError::Membership("kernel block has wrong size".into()));
            }
            if !m.is_finite() {
                return Err(LinalgError::NonFinite.into());
            }
            group.word_length(&g)?;
            if m.max_entry() > TAU {
                pruned.insert(g, m);
            }
        }
        Ok(Self::wrap(Payload::Group { group, block_dim, coeffs: pruned }))
    }

    /// Kernel supported on a single group element.
    pub fn group_delta(
        group: Arc<GeneratedGroup>,
        gamma: GroupElement,
        block: CMatrix,
    ) -> Result<Self, AlgebraError> {
        let block_dim = block.rows();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(gamma, block);
        Self::group_kernel(group, block_dim, coeffs)
    }

    /// Path element from explicit samples over the uniform grid
    /// t = 0, 1/N, ..., 1. Boundary flags are checked within the support
    /// threshold.
    pub fn path(
        samples: Vec<FilteredElement>,
        vanish_at_zero: bool,
        vanish_at_one: bool,
    ) -> Result<Self, AlgebraError> {
        if samples.len() < 2 {
            return Err(AlgebraError::Membership("a path needs at least two samples".into()));
        }
        let kind = samples[0].kind();
        if matches!(kind, AlgebraKind::Path { .. } | AlgebraKind::Unitized { .. }) {
            return Err(AlgebraError::Unsupported("nested path algebras".into()));
        }
        for s in &samples[1..] {
            if s.kind() != kind {
                return Err(AlgebraError::Mismatch("path samples in different algebras".into()));
            }
        }
        if vanish_at_zero && samples[0].sup_entry() > TAU {
            return Err(AlgebraError::Membership("path does not vanish at t = 0".into()));
        }
        if vanish_at_one && samples[samples.len() - 1].sup_entry() > TAU {
            return Err(AlgebraError::Membership("path does not vanish at t = 1".into()));
        }
        Ok(Self::wrap(Payload::Path { vanish_at_zero, vanish_at_one, samples }))
    }

    /// Path built by sampling a closure on the uniform grid.
    pub fn path_from_fn(
        intervals: usize,
        vanish_at_zero: bool,
        vanish_at_one: bool,
        f: impl Fn(f64) -> FilteredElement,
    ) -> Result<Self, AlgebraError> {
        let samples: Vec<FilteredElement> =
            (0..=intervals).map(|i| f(i as f64 / intervals as f64)).collect();
        Self::path(samples, vanish_at_zero, vanish_at_one)
    }

    /// Element `inner + scalar` of the unitization of a path algebra.
    pub fn unitized(inner: FilteredElement, scalar: CMatrix) -> Result<Self, AlgebraError> {
        if scalar.rows() != scalar.cols() {
            return Err(AlgebraError::Membership("scalar part must be square".into()));
        }
        match &inner.payload {
            Payload::Path { samples, .. } => {
                // The scalar must embed into the base fibre.
                embed_scalar(&scalar, &samples[0].kind())?;
            }
            _ => {
                return Err(AlgebraError::Unsupported(
                    "unitization is only represented over path algebras".into(),
                ))
            }
        }
        Ok(Self::wrap(Payload::Unitized { inner: Box::new(inner), scalar }))
    }

    pub fn from_toeplitz(t: ToeplitzElement) -> Self {
        Self::wrap(Payload::Toeplitz(t))
    }

    pub fn as_toeplitz(&self) -> Option<&ToeplitzElement> {
        match &self.payload {
            Payload::Toeplitz(t) => Some(t),
            _ => None,
        }
    }

    /// The descriptor of the algebra this element belongs to.
    pub fn kind(&self) -> AlgebraKind {
        match &self.payload {
            Payload::Scalar(m) => AlgebraKind::Scalar { dim: m.rows() },
            Payload::Band { space, block_dim, .. } => {
                AlgebraKind::Band { space: space.clone(), block_dim: *block_dim }
            }
            Payload::Group { group, block_dim, .. } => {
                AlgebraKind::Group { group: group.clone(), block_dim: *block_dim }
            }
            Payload::Path { vanish_at_zero, vanish_at_one, samples } => AlgebraKind::Path {
                base: Box::new(samples[0].kind()),
                vanish_at_zero: *vanish_at_zero,
                vanish_at_one: *vanish_at_one,
            },
            Payload::Unitized { inner, scalar } => AlgebraKind::Unitized {
                base: Box::new(inner.kind()),
                scalar_dim: scalar.rows(),
            },
            Payload::Toeplitz(t) => AlgebraKind::Toeplitz { coeff: Box::new(t.coeff_kind().clone()) },
        }
    }

    /// Minimal filtration level containing this element.
    pub fn propagation(&self) -> f64 {
        self.propagation
    }

    /// Norm per algebra kind: operator norm for matrix-backed elements, the
    /// maximum of sample norms for paths, and a regular-representation window
    /// estimate for group kernels (exact for finite groups once the window
    /// covers the group). The Toeplitz value is an upper bound combining the
    /// symbol supremum and the compact window.
    pub fn norm(&self) -> f64 {
        *self.norm_cache.get_or_init(|| self.compute_norm(None))
    }

    /// Group-kernel norm on an explicit representation window.
    pub fn norm_with_window(&self, r_rep: u32) -> Result<f64, AlgebraError> {
        match &self.payload {
            Payload::Group { .. } => Ok(self.compute_norm(Some(r_rep))),
            _ => Err(AlgebraError::Unsupported("explicit windows are for group kernels".into())),
        }
    }

    fn compute_norm(&self, window: Option<u32>) -> f64 {
        match &self.payload {
            Payload::Scalar(m) => m.op_norm(),
            Payload::Band { matrix, .. } => matrix.op_norm(),
            Payload::Group { group, block_dim, coeffs } => {
                let r_rep =
                    window.unwrap_or_else(|| 2 * self.propagation.ceil() as u32 + DEFAULT_REP_MARGIN);
                group_rep_norm(group, *block_dim, coeffs, r_rep)
            }
            Payload::Path { samples, .. } => {
                samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
            }
            Payload::Unitized { inner, scalar } => match &inner.payload {
                Payload::Path { samples, .. } => samples
                    .iter()
                    .map(|s| {
                        let embedded = embed_scalar(scalar, &s.kind()).expect("validated");
                        s.add(&embedded).expect("same algebra").norm()
                    })
                    .fold(0.0, f64::max),
                _ => unreachable!("unitized inner is a path"),
            },
            Payload::Toeplitz(t) => t.norm_bound(),
        }
    }

    /// Largest entry modulus across the payload; a support-level size gauge.
    pub fn sup_entry(&self) -> f64 {
        match &self.payload {
            Payload::Scalar(m) => m.max_entry(),
            Payload::Band { matrix, .. } => matrix.max_entry(),
            Payload::Group { coeffs, .. } => {
                coeffs.values().map(|m| m.max_entry()).fold(0.0, f64::max)
            }
            Payload::Path { samples, .. } => {
                samples.iter().map(|s| s.sup_entry()).fold(0.0, f64::max)
            }
            Payload::Unitized { inner, scalar } => inner.sup_entry().max(scalar.max_entry()),
            Payload::Toeplitz(t) => t.sup_entry(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let payload = match &self.payload {
            Payload::Scalar(m) => Payload::Scalar(m.adjoint()),
            Payload::Band { space, block_dim, matrix } => Payload::Band {
                space: space.clone(),
                block_dim: *block_dim,
                matrix: matrix.adjoint(),
            },
            Payload::Group { group, block_dim, coeffs } => {
                let mut out = BTreeMap::new();
                for (g, m) in coeffs {
                    out.insert(group.inverse(g), m.adjoint());
                }
                Payload::Group { group: group.clone(), block_dim: *block_dim, coeffs: out }
            }
            Payload::Path { vanish_at_zero, vanish_at_one, samples } => Payload::Path {
                vanish_at_zero: *vanish_at_zero,
                vanish_at_one: *vanish_at_one,
                samples: samples.iter().map(|s| s.adjoint()).collect(),
            },
            Payload::Unitized { inner, scalar } => Payload::Unitized {
                inner: Box::new(inner.adjoint()),
                scalar: scalar.adjoint(),
            },
            Payload::Toeplitz(t) => Payload::Toeplitz(t.adjoint()),
        };
        Self::wrap(payload)
    }

    pub fn scale(&self, z: C64) -> Self {
        let payload = match &self.payload {
            Payload::Scalar(m) => Payload::Scalar(m.scale(z)),
            Payload::Band { space, block_dim, matrix } => Payload::Band {
                space: space.clone(),
                block_dim: *block_dim,
                matrix: matrix.scale(z),
            },
            Payload::Group { group, block_dim, coeffs } => Payload::Group {
                group: group.clone(),
                block_dim: *block_dim,
                coeffs: coeffs.iter().map(|(g, m)| (g.clone(), m.scale(z))).collect(),
            },
            Payload::Path { vanish_at_zero, vanish_at_one, samples } => Payload::Path {
                vanish_at_zero: *vanish_at_zero,
                vanish_at_one: *vanish_at_one,
                samples: samples.iter().map(|s| s.scale(z)).collect(),
            },
            Payload::Unitized { inner, scalar } => Payload::Unitized {
                inner: Box::new(inner.scale(z)),
                scalar: scalar.scale(z),
            },
            Payload::Toeplitz(t) => Payload::Toeplitz(t.scale(z)),
        };
        Self::wrap(payload)
    }

    pub fn scale_real(&self, t: f64) -> Self {
        self.scale(C64::new(t, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        let payload = match (&self.payload, &other.payload) {
            (Payload::Scalar(a), Payload::Scalar(b)) if a.rows() == b.rows() => {
                Payload::Scalar(a.add(b))
            }
            (
                Payload::Band { space: sa, block_dim: ba, matrix: ma },
                Payload::Band { space: sb, block_dim: bb, matrix: mb },
            ) if sa == sb && ba == bb => Payload::Band {
                space: sa.clone(),
                block_dim: *ba,
                matrix: ma.add(mb),
            },
            (
                Payload::Group { group: ga, block_dim: ba, coeffs: ca },
                Payload::Group { group: gb, block_dim: bb, coeffs: cb },
            ) if ga == gb && ba == bb => {
                let mut out = ca.clone();
                for (g, m) in cb {
                    match out.get_mut(g) {
                        Some(e) => *e = e.add(m),
                        None => {
                            out.insert(g.clone(), m.clone());
                        }
                    }
                }
                out.retain(|_, m| m.max_entry() > TAU);
                Payload::Group { group: ga.clone(), block_dim: *ba, coeffs: out }
            }
            (
                Payload::Path { vanish_at_zero: z0, vanish_at_one: o0, samples: sa },
                Payload::Path { vanish_at_zero: z1, vanish_at_one: o1, samples: sb },
            ) if z0 == z1 && o0 == o1 && sa.len() == sb.len() => Payload::Path {
                vanish_at_zero: *z0,
                vanish_at_one: *o0,
                samples: sa
                    .iter()
                    .zip(sb)
                    .map(|(a, b)| a.add(b))
                    .collect::<Result<_, _>>()?,
            },
            (
                Payload::Unitized { inner: ia, scalar: za },
                Payload::Unitized { inner: ib, scalar: zb },
            ) if za.rows() == zb.rows() => Payload::Unitized {
                inner: Box::new(ia.add(ib)?),
                scalar: za.add(zb),
            },
            (Payload::Toeplitz(a), Payload::Toeplitz(b)) => Payload::Toeplitz(a.add(b)?),
            _ => {
                return Err(AlgebraError::Mismatch(format!(
                    "cannot add {:?} and {:?}",
                    self.kind(),
                    other.kind()
                )))
            }
        };
        Ok(Self::wrap(payload))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Product with recomputed minimal propagation; always satisfies
    /// `propagation(ab) <= propagation(a) + propagation(b)`.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        let payload = match (&self.payload, &other.payload) {
            (Payload::Scalar(a), Payload::Scalar(b)) if a.rows() == b.rows() => {
                Payload::Scalar(a.mul(b))
            }
            (
                Payload::Band { space: sa, block_dim: ba, matrix: ma },
                Payload::Band { space: sb, block_dim: bb, matrix: mb },
            ) if sa == sb && ba == bb => Payload::Band {
                space: sa.clone(),
                block_dim: *ba,
                matrix: ma.mul(mb),
            },
            (
                Payload::Group { group: ga, block_dim: ba, coeffs: ca },
                Payload::Group { group: gb, block_dim: bb, coeffs: cb },
            ) if ga == gb && ba == bb => {
                let mut out: BTreeMap<GroupElement, CMatrix> = BTreeMap::new();
                for (alpha, ma) in ca {
                    for (beta, mb) in cb {
                        let gamma = ga.mul(alpha, beta)?;
                        let prod = ma.mul(mb);
                        match out.get_mut(&gamma) {
                            Some(e) => *e = e.add(&prod),
                            None => {
                                out.insert(gamma, prod);
                            }
                        }
                    }
                }
                out.retain(|_, m| m.max_entry() > TAU);
                Payload::Group { group: ga.clone(), block_dim: *ba, coeffs: out }
            }
            (
                Payload::Path { vanish_at_zero: z0, vanish_at_one: o0, samples: sa },
                Payload::Path { vanish_at_zero: z1, vanish_at_one: o1, samples: sb },
            ) if z0 == z1 && o0 == o1 && sa.len() == sb.len() => Payload::Path {
                vanish_at_zero: *z0,
                vanish_at_one: *o0,
                samples: sa
                    .iter()
                    .zip(sb)
                    .map(|(a, b)| a.mul(b))
                    .collect::<Result<_, _>>()?,
            },
            (
                Payload::Unitized { inner: ia, scalar: za },
                Payload::Unitized { inner: ib, scalar: zb },
            ) if za.rows() == zb.rows() => {
                let mut inner = ia.mul(ib)?;
                inner = inner.add(&mul_scalar(ia, zb, Side::Right)?)?;
                inner = inner.add(&mul_scalar(ib, za, Side::Left)?)?;
                Payload::Unitized { inner: Box::new(inner), scalar: za.mul(zb) }
            }
            (Payload::Toeplitz(a), Payload::Toeplitz(b)) => Payload::Toeplitz(a.mul(b)?),
            _ => {
                return Err(AlgebraError::Mismatch(format!(
                    "cannot multiply {:?} and {:?}",
                    self.kind(),
                    other.kind()
                )))
            }
        };
        Ok(Self::wrap(payload))
    }

    /// Block-diagonal embedding `a -> diag(a, 0, ..., 0)` into the n-fold
    /// matrix amplification; the propagation is unchanged.
    pub fn amplify(&self, n: usize) -> Self {
        assert!(n >= 1, "amplification factor must be positive");
        if n == 1 {
            return self.clone();
        }
        let mut grid: Vec<Vec<FilteredElement>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                row.push(if i == 0 && j == 0 { self.clone() } else { self.zero_like() });
            }
            grid.push(row);
        }
        Self::from_block_grid(&grid).expect("amplification grid is consistent")
    }

    pub fn zero_like(&self) -> Self {
        let payload = match &self.payload {
            Payload::Scalar(m) => Payload::Scalar(CMatrix::zeros(m.rows(), m.cols())),
            Payload::Band { space, block_dim, matrix } => Payload::Band {
                space: space.clone(),
                block_dim: *block_dim,
                matrix: CMatrix::zeros(matrix.rows(), matrix.cols()),
            },
            Payload::Group { group, block_dim, .. } => Payload::Group {
                group: group.clone(),
                block_dim: *block_dim,
                coeffs: BTreeMap::new(),
            },
            Payload::Path { vanish_at_zero, vanish_at_one, samples } => Payload::Path {
                vanish_at_zero: *vanish_at_zero,
                vanish_at_one: *vanish_at_one,
                samples: samples.iter().map(|s| s.zero_like()).collect(),
            },
            Payload::Unitized { inner, scalar } => Payload::Unitized {
                inner: Box::new(inner.zero_like()),
                scalar: CMatrix::zeros(scalar.rows(), scalar.cols()),
            },
            Payload::Toeplitz(t) => Payload::Toeplitz(t.zero_like()),
        };
        Self::wrap(payload)
    }

    /// Unit of the ambient algebra, matching this element's grid and block
    /// structure. Fails for cones and suspensions.
    pub fn unit_like(&self) -> Result<Self, AlgebraError> {
        let payload = match &self.payload {
            Payload::Scalar(m) => Payload::Scalar(CMatrix::identity(m.rows())),
            Payload::Band { space, block_dim, matrix } => Payload::Band {
                space: space.clone(),
                block_dim: *block_dim,
                matrix: CMatrix::identity(matrix.rows()),
            },
            Payload::Group { group, block_dim, .. } => {
                let mut coeffs = BTreeMap::new();
                coeffs.insert(group.identity(), CMatrix::identity(*block_dim));
                Payload::Group { group: group.clone(), block_dim: *block_dim, coeffs }
            }
            Payload::Path { vanish_at_zero, vanish_at_one, samples } => {
                if *vanish_at_zero || *vanish_at_one {
                    return Err(AlgebraError::NoUnit);
                }
                Payload::Path {
                    vanish_at_zero: false,
                    vanish_at_one: false,
                    samples: samples
                        .iter()
                        .map(|s| s.unit_like())
                        .collect::<Result<_, _>>()?,
                }
            }
            Payload::Unitized { inner, scalar } => Payload::Unitized {
                inner: Box::new(inner.zero_like()),
                scalar: CMatrix::identity(scalar.rows()),
            },
            Payload::Toeplitz(t) => Payload::Toeplitz(t.unit_like()),
        };
        Ok(Self::wrap(payload))
    }

    /// Assembles a square grid of same-shaped blocks into the matrix
    /// amplification, outer index first.
    pub fn from_block_grid(grid: &[Vec<FilteredElement>]) -> Result<Self, AlgebraError> {
        let n = grid.len();
        if n == 0 || grid.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::Mismatch("block grid must be square".into()));
        }
        let model = &grid[0][0];
        for row in grid {
            for b in row {
                if b.kind() != model.kind() {
                    return Err(AlgebraError::Mismatch("grid blocks in different algebras".into()));
                }
            }
        }
        let payload = match &model.payload {
            Payload::Scalar(m) => {
                let d = m.rows();
                let mut out = CMatrix::zeros(n * d, n * d);
                for (bi, row) in grid.iter().enumerate() {
                    for (bj, blk) in row.iter().enumerate() {
                        let bm = match &blk.payload {
                            Payload::Scalar(m) => m,
                            _ => unreachable!(),
                        };
                        for i in 0..d {
                            for j in 0..d {
                                out.set(bi * d + i, bj * d + j, bm.get(i, j));
                            }
                        }
                    }
                }
                Payload::Scalar(out)
            }
            Payload::Band { space, block_dim, .. } => {
                let b = *block_dim;
                let nb = n * b;
                let pts = space.size();
                let mut out = CMatrix::zeros(pts * nb, pts * nb);
                for (bi, row) in grid.iter().enumerate() {
                    for (bj, blk) in row.iter().enumerate() {
                        let bm = match &blk.payload {
                            Payload::Band { matrix, .. } => matrix,
                            _ => unreachable!(),
                        };
                        for x in 0..pts {
                            for y in 0..pts {
                                for i in 0..b {
                                    for j in 0..b {
                                        let v = bm.get(x * b + i, y * b + j);
                                        if v.norm_sqr() != 0.0 {
                                            out.set(
                                                x * nb + bi * b + i,
                                                y * nb + bj * b + j,
                                                v,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                Payload::Band { space: space.clone(), block_dim: nb, matrix: out }
            }
            Payload::Group { group, block_dim, .. } => {
                let b = *block_dim;
                let nb = n * b;
                let mut support: Vec<GroupElement> = Vec::new();
                for row in grid {
                    for blk in row {
                        if let Payload::Group { coeffs, .. } = &blk.payload {
                            for g in coeffs.keys() {
                                if !support.contains(g) {
                                    support.push(g.clone());
                                }
                            }
                        }
                    }
                }
                let mut out = BTreeMap::new();
                for g in support {
                    let mut m = CMatrix::zeros(nb, nb);
                    for (bi, row) in grid.iter().enumerate() {
                        for (bj, blk) in row.iter().enumerate() {
                            if let Payload::Group { coeffs, .. } = &blk.payload {
                                if let Some(bm) = coeffs.get(&g) {
                                    for i in 0..b {
                                        for j in 0..b {
                                            m.set(bi * b + i, bj * b + j, bm.get(i, j));
                                        }
                                    }
                                }
                            }
                        }
                    }
                    out.insert(g, m);
                }
                Payload::Group { group: group.clone(), block_dim: nb, coeffs: out }
            }
            Payload::Path { vanish_at_zero, vanish_at_one, samples } => {
                let len = samples.len();
                let mut new_samples = Vec::with_capacity(len);
                for s in 0..len {
                    let sub: Vec<Vec<FilteredElement>> = grid
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|blk| match &blk.payload {
                                    Payload::Path { samples, .. } => samples[s].clone(),
                                    _ => unreachable!(),
                                })
                                .collect()
                        })
                        .collect();
                    new_samples.push(Self::from_block_grid(&sub)?);
                }
                Payload::Path {
                    vanish_at_zero: *vanish_at_zero,
                    vanish_at_one: *vanish_at_one,
                    samples: new_samples,
                }
            }
            Payload::Unitized { .. } => {
                let inner_grid: Vec<Vec<FilteredElement>> = grid
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|blk| match &blk.payload {
                                Payload::Unitized { inner, .. } => (**inner).clone(),
                                _ => unreachable!(),
                            })
                            .collect()
                    })
                    .collect();
                let scalar_grid: Vec<Vec<&CMatrix>> = grid
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|blk| match &blk.payload {
                                Payload::Unitized { scalar, .. } => scalar,
                                _ => unreachable!(),
                            })
                            .collect()
                    })
                    .collect();
                let d = scalar_grid[0][0].rows();
                let mut scalar = CMatrix::zeros(n * d, n * d);
                for bi in 0..n {
                    for bj in 0..n {
                        for i in 0..d {
                            for j in 0..d {
                                scalar.set(bi * d + i, bj * d + j, scalar_grid[bi][bj].get(i, j));
                            }
                        }
                    }
                }
                Payload::Unitized {
                    inner: Box::new(Self::from_block_grid(&inner_grid)?),
                    scalar,
                }
            }
            Payload::Toeplitz(_) => {
                let parts: Vec<Vec<&ToeplitzElement>> = grid
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|blk| match &blk.payload {
                                Payload::Toeplitz(t) => t,
                                _ => unreachable!(),
                            })
                            .collect()
                    })
                    .collect();
                Payload::Toeplitz(ToeplitzElement::from_block_grid(&parts)?)
            }
        };
        Ok(Self::wrap(payload))
    }

    /// Block-diagonal element diag(a_1, ..., a_k) of same-shaped blocks.
    pub fn block_diag(blocks: &[FilteredElement]) -> Result<Self, AlgebraError> {
        let n = blocks.len();
        let grid: Vec<Vec<FilteredElement>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { blocks[i].clone() } else { blocks[i].zero_like() })
                    .collect()
            })
            .collect();
        Self::from_block_grid(&grid)
    }

    /// Cone section `a -> (t -> t a)`, vanishing at t = 0; the propagation is
    /// that of `a`.
    pub fn cone_section(&self, intervals: usize) -> Result<Self, AlgebraError> {
        match &self.payload {
            Payload::Path { .. } | Payload::Unitized { .. } => Err(AlgebraError::Unsupported(
                "cone sections are taken over concrete algebras".into(),
            )),
            _ => Self::path_from_fn(intervals, true, false, |t| self.scale_real(t)),
        }
    }

    /// Samples of a path element.
    pub fn path_samples(&self) -> Option<&[FilteredElement]> {
        match &self.payload {
            Payload::Path { samples, .. } => Some(samples),
            _ => None,
        }
    }

    pub fn path_flags(&self) -> Option<(bool, bool)> {
        match &self.payload {
            Payload::Path { vanish_at_zero, vanish_at_one, .. } => {
                Some((*vanish_at_zero, *vanish_at_one))
            }
            _ => None,
        }
    }

    /// Re-flags a path (inclusion of an ideal into a larger path algebra);
    /// the target flags must be implied by the current ones.
    pub fn with_path_flags(&self, vanish_at_zero: bool, vanish_at_one: bool) -> Result<Self, AlgebraError> {
        match &self.payload {
            Payload::Path { vanish_at_zero: z, vanish_at_one: o, samples } => {
                if (vanish_at_zero && !z) || (vanish_at_one && !o) {
                    return Err(AlgebraError::Membership(
                        "cannot strengthen vanishing flags without support checks".into(),
                    ));
                }
                Ok(Self::wrap(Payload::Path {
                    vanish_at_zero,
                    vanish_at_one,
                    samples: samples.clone(),
                }))
            }
            Payload::Unitized { inner, scalar } => Ok(Self::wrap(Payload::Unitized {
                inner: Box::new(inner.with_path_flags(vanish_at_zero, vanish_at_one)?),
                scalar: scalar.clone(),
            })),
            _ => Err(AlgebraError::Unsupported("not a path element".into())),
        }
    }

    /// Evaluation of a (possibly unitized) path at grid index `i`, as an
    /// element of the base algebra.
    pub fn eval_sample(&self, i: usize) -> Result<FilteredElement, AlgebraError> {
        match &self.payload {
            Payload::Path { samples, .. } => Ok(samples[i].clone()),
            Payload::Unitized { inner, scalar } => match &inner.payload {
                Payload::Path { samples, .. } => {
                    let embedded = embed_scalar(scalar, &samples[i].kind())?;
                    samples[i].add(&embedded)
                }
                _ => unreachable!("unitized inner is a path"),
            },
            _ => Err(AlgebraError::Unsupported("not a path element".into())),
        }
    }

    pub fn sample_count(&self) -> Option<usize> {
        match &self.payload {
            Payload::Path { samples, .. } => Some(samples.len()),
            Payload::Unitized { inner, .. } => inner.sample_count(),
            _ => None,
        }
    }

    /// Dense matrix form of a matrix-backed element.
    pub fn to_matrix(&self) -> Result<CMatrix, AlgebraError> {
        match &self.payload {
            Payload::Scalar(m) => Ok(m.clone()),
            Payload::Band { matrix, .. } => Ok(matrix.clone()),
            _ => Err(AlgebraError::Unsupported("element is not matrix-backed".into())),
        }
    }

    /// Matrices of all samples of a (possibly unitized) loop or path over a
    /// matrix-backed base.
    pub fn loop_matrices(&self) -> Result<Vec<CMatrix>, AlgebraError> {
        let count = self
            .sample_count()
            .ok_or_else(|| AlgebraError::Unsupported("not a path element".into()))?;
        (0..count).map(|i| self.eval_sample(i)?.to_matrix()).collect()
    }

    /// Scalar part of a unitized element.
    pub fn scalar_part(&self) -> Option<&CMatrix> {
        match &self.payload {
            Payload::Unitized { scalar, .. } => Some(scalar),
            _ => None,
        }
    }

    pub fn unitized_inner(&self) -> Option<&FilteredElement> {
        match &self.payload {
            Payload::Unitized { inner, .. } => Some(inner),
            _ => None,
        }
    }

    /// Distance gauge between elements of the same algebra, as the norm of
    /// the difference.
    pub fn distance(&self, other: &Self) -> Result<f64, AlgebraError> {
        Ok(self.sub(other)?.norm())
    }
}

const DEFAULT_REP_MARGIN: u32 = 8;

enum Side {
    Left,
    Right,
}

/// Multiplies a path element samplewise by an embedded scalar matrix.
fn mul_scalar(path: &FilteredElement, z: &CMatrix, side: Side) -> Result<FilteredElement, AlgebraError> {
    match &path.payload {
        Payload::Path { vanish_at_zero, vanish_at_one, samples } => {
            let out: Result<Vec<FilteredElement>, AlgebraError> = samples
                .iter()
                .map(|s| {
                    let embedded = embed_scalar(z, &s.kind())?;
                    match side {
                        Side::Left => embedded.mul(s),
                        Side::Right => s.mul(&embedded),
                    }
                })
                .collect();
            Ok(FilteredElement::wrap(Payload::Path {
                vanish_at_zero: *vanish_at_zero,
                vanish_at_one: *vanish_at_one,
                samples: out?,
            }))
        }
        _ => Err(AlgebraError::Unsupported("scalar action needs a path".into())),
    }
}

/// Embeds a scalar matrix `z` as `z (x) 1` into a unital matrix-backed or
/// group algebra whose block structure it divides.
pub fn embed_scalar(z: &CMatrix, kind: &AlgebraKind) -> Result<FilteredElement, AlgebraError> {
    let m = z.rows();
    match kind {
        AlgebraKind::Scalar { dim } => {
            if m == 0 || dim % m != 0 {
                return Err(AlgebraError::Mismatch(format!(
                    "scalar part of size {m} does not divide dimension {dim}"
                )));
            }
            let inner = dim / m;
            FilteredElement::scalar_matrix(z.kron(&CMatrix::identity(inner)))
        }
        AlgebraKind::Band { space, block_dim } => {
            // A full-dimension scalar embeds as itself (band algebras over a
            // finite space contain every matrix).
            if m == space.size() * block_dim {
                return FilteredElement::band(space.clone(), *block_dim, z.clone());
            }
            if m == 0 || block_dim % m != 0 {
                return Err(AlgebraError::Mismatch(format!(
                    "scalar part of size {m} does not divide block size {block_dim}"
                )));
            }
            let inner = block_dim / m;
            let zb = z.kron(&CMatrix::identity(inner));
            let n = space.size() * block_dim;
            let mut out = CMatrix::zeros(n, n);
            for x in 0..space.size() {
                for i in 0..*block_dim {
                    for j in 0..*block_dim {
                        out.set(x * block_dim + i, x * block_dim + j, zb.get(i, j));
                    }
                }
            }
            FilteredElement::band(space.clone(), *block_dim, out)
        }
        AlgebraKind::Group { group, block_dim } => {
            if m == 0 || block_dim % m != 0 {
                return Err(AlgebraError::Mismatch(format!(
                    "scalar part of size {m} does not divide block size {block_dim}"
                )));
            }
            let inner = block_dim / m;
            FilteredElement::group_delta(
                group.clone(),
                group.identity(),
                z.kron(&CMatrix::identity(inner)),
            )
        }
        AlgebraKind::Toeplitz { coeff } => {
            let c = embed_scalar(z, coeff)?;
            Ok(FilteredElement::from_toeplitz(ToeplitzElement::constant(
                c.to_matrix()?,
                (**coeff).clone(),
            )?))
        }
        _ => Err(AlgebraError::Unsupported("cannot embed a scalar into this kind".into())),
    }
}

fn compute_propagation(payload: &Payload) -> f64 {
    match payload {
        Payload::Scalar(_) => 0.0,
        Payload::Band { space, block_dim, matrix } => toeplitz::matrix_propagation_in(
            &AlgebraKind::Band { space: space.clone(), block_dim: *block_dim },
            matrix,
        ),
        Payload::Group { group, coeffs, .. } => coeffs
            .iter()
            .filter(|(_, m)| m.max_entry() > TAU)
            .map(|(g, _)| group.word_length(g).expect("support validated") as f64)
            .fold(0.0, f64::max),
        Payload::Path { samples, .. } => {
            samples.iter().map(|s| s.propagation()).fold(0.0, f64::max)
        }
        Payload::Unitized { inner, .. } => inner.propagation(),
        Payload::Toeplitz(t) => t.propagation(),
    }
}

fn group_rep_norm(
    group: &Arc<GeneratedGroup>,
    block_dim: usize,
    coeffs: &BTreeMap<GroupElement, CMatrix>,
    r_rep: u32,
) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let ball = group.ball(r_rep).expect("representation window within cap");
    let n = ball.len();
    let b = block_dim;
    let mut rep = CMatrix::zeros(n * b, n * b);
    for (col, gj) in ball.iter().enumerate() {
        let gj_inv = group.inverse(gj);
        for (row, gi) in ball.iter().enumerate() {
            let prod = match group.mul(gi, &gj_inv) {
                Ok(p) => p,
                // Outside the window means outside the kernel support.
                Err(GroupError::OutOfWindow { .. }) => continue,
                Err(_) => unreachable!("ball elements are well-formed"),
            };
            if let Some(m) = coeffs.get(&prod) {
                for i in 0..b {
                    for j in 0..b {
                        rep.set(row * b + i, col * b + j, m.get(i, j));
                    }
                }
            }
        }
    }
    rep.op_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    pub(crate) fn random_band(rng: &mut StdRng, space: &Arc<FiniteMetricSpace>, radius: f64) -> FilteredElement {
        let n = space.size();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if space.distance(i, j) <= radius {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                C64::new(0.0, 0.0)
            }
        });
        FilteredElement::band(space.clone(), 1, m).unwrap()
    }

    #[test]
    fn band_propagation_from_support() {
        let space = Arc::new(FiniteMetricSpace::line(5));
        let mut m = CMatrix::zeros(5, 5);
        m.set(0, 2, C64::new(1.0, 0.0));
        m.set(2, 0, C64::new(1.0, 0.0));
        let e = FilteredElement::band(space, 1, m).unwrap();
        assert_eq!(e.propagation(), 2.0);
    }

    #[test]
    fn product_propagation_subadditive() {
        let space = Arc::new(FiniteMetricSpace::line(8));
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_band(&mut rng, &space, 1.0);
            let b = random_band(&mut rng, &space, 2.0);
            let ab = a.mul(&b).unwrap();
            assert!(ab.propagation() <= a.propagation() + b.propagation() + 1e-12);
            assert!(ab.propagation() <= 3.0);
            let sum = a.add(&b).unwrap();
            assert!(sum.propagation() <= a.propagation().max(b.propagation()));
            assert_eq!(a.adjoint().propagation(), a.propagation());
        }
    }

    #[test]
    fn propagation_is_minimal() {
        // Removing the single farthest entry drops the computed propagation.
        let space = Arc::new(FiniteMetricSpace::line(6));
        let mut m = CMatrix::zeros(6, 6);
        m.set(0, 3, C64::new(0.5, 0.0));
        m.set(1, 2, C64::new(0.5, 0.0));
        let e = FilteredElement::band(space.clone(), 1, m.clone()).unwrap();
        assert_eq!(e.propagation(), 3.0);
        m.set(0, 3, C64::new(0.0, 0.0));
        let e2 = FilteredElement::band(space, 1, m).unwrap();
        assert_eq!(e2.propagation(), 1.0);
    }

    #[test]
    fn unit_times_element_is_identity() {
        let space = Arc::new(FiniteMetricSpace::line(4));
        let mut rng = StdRng::seed_from_u64(9);
        let a = random_band(&mut rng, &space, 2.0);
        let unit = a.unit_like().unwrap();
        let prod = unit.mul(&a).unwrap();
        assert!(prod.sub(&a).unwrap().sup_entry() < 1e-14);
        assert_eq!(unit.propagation(), 0.0);
        assert!((unit.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_metric_band_is_full_matrix_algebra() {
        // Every matrix is a band element of propagation at most one.
        let space = Arc::new(FiniteMetricSpace::discrete(6));
        let mut rng = StdRng::seed_from_u64(13);
        let m = CMatrix::from_fn(6, 6, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let e = FilteredElement::band(space, 1, m).unwrap();
        assert!(e.propagation() <= 1.0);
    }

    #[test]
    fn group_convolution_matches_direct_oracle() {
        // Kernels on Z supported in {-1, 0, 1}: the product support sits in
        // {-2, ..., 2} and the coefficients match direct convolution.
        let group = Arc::new(GeneratedGroup::integers(32));
        let mut rng = StdRng::seed_from_u64(17);
        let coeff = |rng: &mut StdRng| CMatrix::from_fn(1, 1, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let mut a_map = BTreeMap::new();
        let mut b_map = BTreeMap::new();
        let mut a_vals = std::collections::HashMap::new();
        let mut b_vals = std::collections::HashMap::new();
        for k in -1i64..=1 {
            let (va, vb) = (coeff(&mut rng), coeff(&mut rng));
            a_vals.insert(k, va.get(0, 0));
            b_vals.insert(k, vb.get(0, 0));
            a_map.insert(GroupElement::Abelian(vec![k]), va);
            b_map.insert(GroupElement::Abelian(vec![k]), vb);
        }
        let a = FilteredElement::group_kernel(group.clone(), 1, a_map).unwrap();
        let b = FilteredElement::group_kernel(group.clone(), 1, b_map).unwrap();
        let ab = a.mul(&b).unwrap();
        assert!(ab.propagation() <= 2.0);
        if let Payload::Group { coeffs, .. } = &ab.payload {
            for k in -2i64..=2 {
                let direct: C64 = (-1i64..=1)
                    .filter_map(|i| {
                        let j = k - i;
                        if (-1..=1).contains(&j) {
                            Some(a_vals[&i] * b_vals[&j])
                        } else {
                            None
                        }
                    })
                    .sum();
                let stored = coeffs
                    .get(&GroupElement::Abelian(vec![k]))
                    .map(|m| m.get(0, 0))
                    .unwrap_or(C64::new(0.0, 0.0));
                assert!((direct - stored).norm() < 1e-14);
            }
        } else {
            panic!("expected group payload");
        }
    }

    #[test]
    fn group_delta_norm_is_one() {
        let group = Arc::new(GeneratedGroup::cyclic(6));
        let d = FilteredElement::group_delta(
            group,
            GroupElement::Finite(2),
            CMatrix::identity(1),
        )
        .unwrap();
        assert!((d.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hopping_kernel_norm_matches_toeplitz_formula() {
        // (delta_{+1} + delta_{-1}) / 2 on Z compresses to a tridiagonal
        // Toeplitz matrix on the window; its largest eigenvalue is
        // cos(pi / (n + 1)).
        let group = Arc::new(GeneratedGroup::integers(256));
        let mut coeffs = BTreeMap::new();
        coeffs.insert(GroupElement::Abelian(vec![1]), CMatrix::identity(1).scale(C64::new(0.5, 0.0)));
        coeffs.insert(GroupElement::Abelian(vec![-1]), CMatrix::identity(1).scale(C64::new(0.5, 0.0)));
        let k = FilteredElement::group_kernel(group, 1, coeffs).unwrap();
        let est = k.norm_with_window(64).unwrap();
        let pts = 129.0;
        let expected = (std::f64::consts::PI / (pts + 1.0)).cos();
        assert!((est - expected).abs() < 1e-9);
        assert!((est - 1.0).abs() < 1e-3);
    }

    #[test]
    fn group_norm_monotone_in_window() {
        let group = Arc::new(GeneratedGroup::integers(256));
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..100 {
            let mut coeffs = BTreeMap::new();
            for k in -2i64..=2 {
                coeffs.insert(
                    GroupElement::Abelian(vec![k]),
                    CMatrix::from_fn(1, 1, |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    }),
                );
            }
            let k = FilteredElement::group_kernel(group.clone(), 1, coeffs).unwrap();
            let mut prev = 0.0;
            for w in [4, 8, 16, 32] {
                let est = k.norm_with_window(w).unwrap();
                assert!(est >= prev - 1e-12);
                prev = est;
            }
        }
    }

    #[test]
    fn amplify_preserves_norm_and_propagation() {
        let space = Arc::new(FiniteMetricSpace::line(5));
        let mut rng = StdRng::seed_from_u64(29);
        let a = random_band(&mut rng, &space, 2.0);
        let big = a.amplify(3);
        assert!((big.norm() - a.norm()).abs() < 1e-12);
        assert_eq!(big.propagation(), a.propagation());
        let unit2 = FilteredElement::scalar_matrix(CMatrix::identity(1))
            .unwrap()
            .amplify(2);
        let m = unit2.to_matrix().unwrap();
        assert_eq!(m.get(0, 0), C64::new(1.0, 0.0));
        assert_eq!(m.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn cone_section_basics() {
        let space = Arc::new(FiniteMetricSpace::line(4));
        let mut rng = StdRng::seed_from_u64(33);
        let a = random_band(&mut rng, &space, 1.0);
        let path = a.cone_section(16).unwrap();
        assert_eq!(path.propagation(), a.propagation());
        assert!((path.norm() - a.norm()).abs() < 1e-12);
        let end = path.eval_sample(16).unwrap();
        assert!(end.sub(&a).unwrap().sup_entry() < 1e-14);
        let zero = a.zero_like().cone_section(16).unwrap();
        assert_eq!(zero.sup_entry(), 0.0);
    }

    #[test]
    fn unitized_product_rule() {
        // (a + z)(b + w) evaluated samplewise agrees with matrix arithmetic.
        let base = FilteredElement::scalar_matrix(CMatrix::diag_real(&[0.3, -0.2])).unwrap();
        let other = FilteredElement::scalar_matrix(CMatrix::diag_real(&[0.1, 0.7])).unwrap();
        let pa = base.cone_section(8).unwrap();
        let pb = other.cone_section(8).unwrap();
        let za = CMatrix::diag_real(&[1.0, 2.0]);
        let zb = CMatrix::diag_real(&[-0.5, 0.25]);
        let ua = FilteredElement::unitized(pa, za.clone()).unwrap();
        let ub = FilteredElement::unitized(pb, zb.clone()).unwrap();
        let prod = ua.mul(&ub).unwrap();
        for i in [0, 3, 8] {
            let t = i as f64 / 8.0;
            let lhs = prod.eval_sample(i).unwrap().to_matrix().unwrap();
            let ma = CMatrix::diag_real(&[0.3 * t, -0.2 * t]).add(&za);
            let mb = CMatrix::diag_real(&[0.1 * t, 0.7 * t]).add(&zb);
            let rhs = ma.mul(&mb);
            assert!(lhs.sub(&rhs).op_norm() < 1e-13);
        }
    }

    #[test]
    fn suspension_rejects_nonvanishing_boundary() {
        let a = FilteredElement::scalar_matrix(CMatrix::identity(2)).unwrap();
        let err = FilteredElement::path_from_fn(8, true, true, |_| a.clone());
        assert!(err.is_err());
    }
}
