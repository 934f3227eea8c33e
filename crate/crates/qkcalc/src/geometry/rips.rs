//! Discretized Rips complexes over finitely generated groups.
//!
//! Vertices are the barycenters of admissible supports: finite subsets of
//! the group with word-diameter at most d, carrying the uniform probability
//! measure. This finite, translation-equivariant model is enough to realize
//! the cutoff partition of unity, the canonical projection it generates and
//! the propagation constant that bounds it.

use crate::algebra::FilteredElement;
use crate::geometry::group::{GeneratedGroup, GroupElement, GroupError};
use crate::linalg::{C64, CMatrix, TAU};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RipsError {
    #[error("vertex enumeration exceeded the cap ({cap})")]
    Explosion { cap: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("inconsistent construction: {0}")]
    Inconsistent(String),
}

/// Default cap on the number of enumerated vertices.
pub const VERTEX_CAP: usize = 1_000_000;

/// A vertex of the discretized Rips complex: a finite support of word
/// diameter at most d, carrying the uniform measure.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct RipsVertex {
    support: Vec<GroupElement>,
}

impl RipsVertex {
    fn new(mut support: Vec<GroupElement>) -> Self {
        support.sort();
        support.dedup();
        RipsVertex { support }
    }

    pub fn support(&self) -> &[GroupElement] {
        &self.support
    }

    /// Left translate by gamma.
    fn translate(&self, group: &GeneratedGroup, gamma: &GroupElement) -> Result<Self, GroupError> {
        let mut support = Vec::with_capacity(self.support.len());
        for x in &self.support {
            support.push(group.mul(gamma, x)?);
        }
        Ok(RipsVertex::new(support))
    }
}

fn word_distance(group: &GeneratedGroup, a: &GroupElement, b: &GroupElement) -> f64 {
    match group.mul(&group.inverse(a), b) {
        Ok(p) => match group.word_length(&p) {
            Ok(l) => l as f64,
            Err(GroupError::OutOfWindow { .. }) => f64::INFINITY,
            Err(_) => unreachable!("well-formed elements"),
        },
        Err(GroupError::OutOfWindow { .. }) => f64::INFINITY,
        Err(_) => unreachable!("well-formed elements"),
    }
}

/// All supports inside the ball of the given window radius with word
/// diameter at most d, in a deterministic order.
pub fn rips_vertices(
    group: &Arc<GeneratedGroup>,
    d: f64,
    window: f64,
) -> Result<Vec<RipsVertex>, RipsError> {
    rips_vertices_capped(group, d, window, VERTEX_CAP)
}

pub fn rips_vertices_capped(
    group: &Arc<GeneratedGroup>,
    d: f64,
    window: f64,
    cap: usize,
) -> Result<Vec<RipsVertex>, RipsError> {
    let ball = group.ball(window.floor() as u32)?;
    let n = ball.len();
    // Pairwise word distances on the ball.
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = word_distance(group, &ball[i], &ball[j]);
            dist[i * n + j] = dij;
            dist[j * n + i] = dij;
        }
    }
    // Grow index-sorted subsets; each admissible subset appears exactly once.
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    stack.reverse();
    while let Some(current) = stack.pop() {
        out.push(current.clone());
        if out.len() > cap {
            return Err(RipsError::Explosion { cap });
        }
        let last = *current.last().unwrap();
        for next in (last + 1)..n {
            if current.iter().all(|&i| dist[i * n + next] <= d) {
                let mut grown = current.clone();
                grown.push(next);
                stack.push(grown);
            }
        }
    }
    let mut vertices: Vec<RipsVertex> = out
        .into_iter()
        .map(|idx| RipsVertex::new(idx.into_iter().map(|i| ball[i].clone()).collect()))
        .collect();
    vertices.sort();
    vertices.dedup();
    Ok(vertices)
}

/// The cutoff partition of unity on the discretized complex: the indicator
/// of supports inside B(e, 2d), normalized by the translate count.
pub struct CutoffFunction {
    pub d: f64,
    group: Arc<GeneratedGroup>,
    values: BTreeMap<RipsVertex, f64>,
}

impl CutoffFunction {
    /// Number of translates of F that stay inside B(e, 2d); positive for
    /// every vertex since some translate moves F into B(e, d).
    fn translate_count(group: &GeneratedGroup, d: f64, f: &RipsVertex) -> Result<usize, RipsError> {
        let radius = (2.0 * d).floor() as u32;
        let ball = group.ball(radius)?;
        let x = &f.support()[0];
        let x_inv = group.inverse(x);
        let mut candidates = BTreeSet::new();
        for y in &ball {
            if let Ok(g) = group.mul(y, &x_inv) {
                candidates.insert(g);
            }
        }
        let mut count = 0usize;
        for gamma in candidates {
            if in_w_hat(group, d, &f.translate(group, &gamma)?) {
                count += 1;
            }
        }
        if count == 0 {
            return Err(RipsError::Inconsistent("translate count must be positive".into()));
        }
        Ok(count)
    }

    /// Value on an arbitrary vertex (not just enumerated ones).
    pub fn eval(&self, f: &RipsVertex) -> Result<f64, RipsError> {
        if let Some(&v) = self.values.get(f) {
            return Ok(v);
        }
        if !in_w_hat(&self.group, self.d, f) {
            return Ok(0.0);
        }
        Ok(1.0 / Self::translate_count(&self.group, self.d, f)? as f64)
    }

    /// The enumerated support inside B(e, 2d).
    pub fn support(&self) -> impl Iterator<Item = (&RipsVertex, f64)> {
        self.values.iter().map(|(v, &x)| (v, x))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// `sum_gamma phi(gamma^{-1} F)`; equal to one for every vertex.
    pub fn partition_sum(&self, f: &RipsVertex) -> Result<f64, RipsError> {
        let radius = (2.0 * self.d).floor() as u32;
        let ball = self.group.ball(radius)?;
        let x = &f.support()[0];
        let mut candidates = BTreeSet::new();
        for y in &ball {
            // gamma^{-1} must send x into B(e, 2d): gamma = x y^{-1}.
            if let Ok(g) = self.group.mul(x, &self.group.inverse(y)) {
                candidates.insert(g);
            }
        }
        let mut sum = 0.0;
        for gamma in candidates {
            let translated = f.translate(&self.group, &self.group.inverse(&gamma))?;
            sum += self.eval(&translated)?;
        }
        Ok(sum)
    }
}

fn in_w_hat(group: &GeneratedGroup, d: f64, f: &RipsVertex) -> bool {
    let radius = (2.0 * d).floor() as u32;
    f.support().iter().all(|x| match group.word_length(x) {
        Ok(l) => l <= radius,
        Err(_) => false,
    })
}

/// Builds the cutoff function at scale d.
pub fn cutoff(group: &Arc<GeneratedGroup>, d: f64) -> Result<CutoffFunction, RipsError> {
    let vertices = rips_vertices(group, d, 2.0 * d)?;
    let mut values = BTreeMap::new();
    for v in vertices {
        let count = CutoffFunction::translate_count(group, d, &v)?;
        values.insert(v, 1.0 / count as f64);
    }
    Ok(CutoffFunction { d, group: group.clone(), values })
}

/// The canonical projection generated by a cutoff function, as a kernel of
/// diagonal operators on the vertex set.
pub struct EPhiProjection {
    pub d: f64,
    /// Number of vertices carrying the cutoff (the support window).
    pub vertex_count: usize,
    /// Certified upper bound on the projection defect (an l1-type bound
    /// dominating the operator norm of e*e - e).
    pub defect: f64,
    /// Entrywise self-adjointness defect.
    pub adjoint_defect: f64,
    /// Exact propagation: largest word length carrying a nonzero coefficient.
    pub propagation: f64,
    kernel: BTreeMap<GroupElement, BTreeMap<RipsVertex, f64>>,
    group: Arc<GeneratedGroup>,
}

impl EPhiProjection {
    pub fn coefficient(&self, gamma: &GroupElement, f: &RipsVertex) -> f64 {
        self.kernel
            .get(gamma)
            .and_then(|m| m.get(f).copied())
            .unwrap_or(0.0)
    }

    pub fn support_size(&self) -> usize {
        self.kernel.len()
    }

    /// The kernel as a group-convolution element with diagonal blocks over
    /// the enumerated vertex window (storage form; the crossed-product
    /// multiplication itself is action-aware and lives in this module).
    pub fn as_group_kernel(&self) -> Result<FilteredElement, RipsError> {
        let vertices: Vec<&RipsVertex> = self
            .kernel
            .values()
            .flat_map(|m| m.keys())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let dim = vertices.len().max(1);
        let mut coeffs = BTreeMap::new();
        for (gamma, values) in &self.kernel {
            let mut m = CMatrix::zeros(dim, dim);
            for (i, v) in vertices.iter().enumerate() {
                if let Some(&x) = values.get(*v) {
                    m.set(i, i, C64::new(x, 0.0));
                }
            }
            coeffs.insert(gamma.clone(), m);
        }
        FilteredElement::group_kernel(self.group.clone(), dim, coeffs)
            .map_err(|e| RipsError::Inconsistent(e.to_string()))
    }
}

/// Builds the projection e_phi at scale d and certifies its invariants:
/// kernel `gamma -> phi^(1/2) . (phi^(1/2) o gamma^(-1))`, an exact
/// projection for the crossed-product convolution with propagation at most
/// the translate-overlap constant.
pub fn e_phi(group: &Arc<GeneratedGroup>, d: f64) -> Result<EPhiProjection, RipsError> {
    let phi = cutoff(group, d)?;
    let sqrt_phi: BTreeMap<RipsVertex, f64> =
        phi.support().map(|(v, x)| (v.clone(), x.sqrt())).collect();

    // Kernel support: for F in the cutoff support and gamma^{-1} F also in
    // it, e(gamma)[F] = sqrt(phi(F)) sqrt(phi(gamma^{-1} F)).
    let mut kernel: BTreeMap<GroupElement, BTreeMap<RipsVertex, f64>> = BTreeMap::new();
    // Candidates gamma with F in W and gamma^{-1} F in W: gamma in F . B(2d).
    let ball = group.ball((2.0 * d).floor() as u32)?;
    let mut cand_per_vertex: BTreeMap<RipsVertex, Vec<GroupElement>> = BTreeMap::new();
    for (f, _) in phi.support() {
        let mut cands = BTreeSet::new();
        let x = &f.support()[0];
        for y in &ball {
            if let Ok(g) = group.mul(x, &group.inverse(y)) {
                cands.insert(g);
            }
        }
        let mut kept = Vec::new();
        for gamma in cands {
            let translated = f.translate(group, &group.inverse(&gamma))?;
            if let Some(&root) = sqrt_phi.get(&translated) {
                let value = sqrt_phi[f] * root;
                if value > TAU {
                    kernel.entry(gamma.clone()).or_default().insert(f.clone(), value);
                    kept.push(gamma);
                }
            }
        }
        cand_per_vertex.insert(f.clone(), kept);
    }

    // Convolution square, exact: (e*e)(gamma)[F] =
    // sum_alpha e(alpha)[F] . e(alpha^{-1} gamma)[alpha^{-1} F].
    let mut square: BTreeMap<GroupElement, BTreeMap<RipsVertex, f64>> = BTreeMap::new();
    for (f, alphas) in &cand_per_vertex {
        for alpha in alphas {
            let a = sqrt_phi[f]
                * sqrt_phi[&f.translate(group, &group.inverse(alpha))?];
            let shifted = f.translate(group, &group.inverse(alpha))?;
            for beta in &cand_per_vertex[&shifted] {
                let b = sqrt_phi[&shifted]
                    * sqrt_phi[&shifted.translate(group, &group.inverse(beta))?];
                let gamma = group.mul(alpha, beta)?;
                *square
                    .entry(gamma)
                    .or_default()
                    .entry(f.clone())
                    .or_insert(0.0) += a * b;
            }
        }
    }

    // Certified defect: sum over gamma of the sup over F of |e*e - e|,
    // which dominates the crossed-product norm of the difference.
    let mut per_gamma_sup: BTreeMap<GroupElement, f64> = BTreeMap::new();
    let mut keys: BTreeSet<GroupElement> = kernel.keys().cloned().collect();
    keys.extend(square.keys().cloned());
    for gamma in &keys {
        let mut sup: f64 = 0.0;
        let mut vs: BTreeSet<&RipsVertex> = BTreeSet::new();
        if let Some(m) = kernel.get(gamma) {
            vs.extend(m.keys());
        }
        if let Some(m) = square.get(gamma) {
            vs.extend(m.keys());
        }
        for f in vs {
            let e1 = kernel.get(gamma).and_then(|m| m.get(f).copied()).unwrap_or(0.0);
            let e2 = square.get(gamma).and_then(|m| m.get(f).copied()).unwrap_or(0.0);
            sup = sup.max((e2 - e1).abs());
        }
        per_gamma_sup.insert(gamma.clone(), sup);
    }
    let defect: f64 = per_gamma_sup.values().sum();

    // Self-adjointness: e(gamma)[F] = conj(e(gamma^{-1})[gamma^{-1} F]).
    let mut adjoint_defect: f64 = 0.0;
    for (gamma, values) in &kernel {
        for (f, &v) in values {
            let mirrored = kernel
                .get(&group.inverse(gamma))
                .and_then(|m| m.get(&f.translate(group, &group.inverse(gamma)).ok()?).copied())
                .unwrap_or(0.0);
            adjoint_defect = adjoint_defect.max((v - mirrored).abs());
        }
    }

    let propagation = kernel
        .iter()
        .filter(|(_, m)| m.values().any(|&v| v > TAU))
        .map(|(g, _)| group.word_length(g).expect("kernel support is reachable") as f64)
        .fold(0.0, f64::max);

    Ok(EPhiProjection {
        d,
        vertex_count: phi.support_len(),
        defect,
        adjoint_defect,
        propagation,
        kernel,
        group: group.clone(),
    })
}

/// The translate-overlap constant: the number of group elements whose
/// translate of the 2d-window meets it. In the discretized model this is
/// exactly the ball of radius 4d, and both descriptions are computed and
/// compared.
pub fn s_const(group: &Arc<GeneratedGroup>, d: f64) -> Result<usize, RipsError> {
    let ball_2d = group.ball((2.0 * d).floor() as u32)?;
    let mut overlaps: BTreeSet<GroupElement> = BTreeSet::new();
    for x in &ball_2d {
        let x_inv = group.inverse(x);
        for y in &ball_2d {
            if let Ok(g) = group.mul(y, &x_inv) {
                overlaps.insert(g);
            }
        }
    }
    let ball_4d = group.ball((4.0 * d).floor() as u32)?;
    if overlaps.len() != ball_4d.len() {
        return Err(RipsError::Inconsistent(format!(
            "overlap count {} disagrees with the 4d ball {}",
            overlaps.len(),
            ball_4d.len()
        )));
    }
    Ok(overlaps.len())
}
