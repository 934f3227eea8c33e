//! Finitely generated groups with a word metric: finite Cayley tables,
//! free abelian groups and free groups on a radius-capped window.
//!
//! Word lengths are computed by breadth-first search on the Cayley graph and
//! memoized ball by ball; all enumerations are deterministic.

use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("element outside the radius window (cap {cap})")]
    OutOfWindow { cap: u32 },
    #[error("invalid group data: {0}")]
    InvalidData(String),
}

/// A group element in one of the supported representations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum GroupElement {
    /// Index into a finite Cayley table.
    Finite(usize),
    /// Coordinates in a free abelian group.
    Abelian(Vec<i64>),
    /// Reduced word in a free group; letter `i+1` is generator `i`,
    /// `-(i+1)` its inverse.
    Free(Vec<i32>),
}

#[derive(Clone, Debug)]
enum GroupKind {
    FiniteCayley {
        order: usize,
        table: Vec<Vec<usize>>,
        inverses: Vec<usize>,
    },
    FreeAbelian {
        rank: usize,
        radius_cap: u32,
    },
    Free {
        rank: usize,
        radius_cap: u32,
    },
}

/// A finitely generated group together with a symmetric generating set.
pub struct GeneratedGroup {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    lengths: Mutex<LengthCache>,
}

#[derive(Default)]
struct LengthCache {
    known: BTreeMap<GroupElement, u32>,
    frontier: Vec<GroupElement>,
    radius: u32,
    saturated: bool,
}

impl PartialEq for GeneratedGroup {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators
            && match (&self.kind, &other.kind) {
                (
                    GroupKind::FiniteCayley { table: a, .. },
                    GroupKind::FiniteCayley { table: b, .. },
                ) => a == b,
                (
                    GroupKind::FreeAbelian { rank: a, .. },
                    GroupKind::FreeAbelian { rank: b, .. },
                ) => a == b,
                (GroupKind::Free { rank: a, .. }, GroupKind::Free { rank: b, .. }) => a == b,
                _ => false,
            }
    }
}

impl std::fmt::Debug for GeneratedGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            GroupKind::FiniteCayley { order, .. } => write!(f, "FiniteCayley(order={order})"),
            GroupKind::FreeAbelian { rank, .. } => write!(f, "FreeAbelian(rank={rank})"),
            GroupKind::Free { rank, .. } => write!(f, "Free(rank={rank})"),
        }
    }
}

impl GeneratedGroup {
    /// Finite group given by a full Cayley table; element 0 must be the
    /// identity and the generating set must be symmetric.
    pub fn from_cayley_table(
        order: usize,
        generators: Vec<usize>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, GroupError> {
        if order == 0 || table.len() != order || table.iter().any(|r| r.len() != order) {
            return Err(GroupError::InvalidData("table is not order x order".into()));
        }
        if table.iter().flatten().any(|&v| v >= order) {
            return Err(GroupError::InvalidData("table entry out of range".into()));
        }
        for j in 0..order {
            if table[0][j] != j || table[j][0] != j {
                return Err(GroupError::InvalidData("element 0 is not the identity".into()));
            }
        }
        let mut inverses = vec![usize::MAX; order];
        for (a, row) in table.iter().enumerate() {
            for (b, &ab) in row.iter().enumerate() {
                if ab == 0 {
                    inverses[a] = b;
                }
            }
        }
        if inverses.iter().any(|&v| v == usize::MAX) {
            return Err(GroupError::InvalidData("an element has no inverse".into()));
        }
        if order <= 64 {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if table[table[a][b]][c] != table[a][table[b][c]] {
                            return Err(GroupError::InvalidData("table is not associative".into()));
                        }
                    }
                }
            }
        }
        let mut gens: Vec<usize> = generators;
        gens.sort_unstable();
        gens.dedup();
        if (gens.is_empty() && order > 1) || gens.contains(&0) {
            return Err(GroupError::InvalidData(
                "generators must be non-empty and exclude the identity".into(),
            ));
        }
        for &g in &gens {
            if !gens.contains(&inverses[g]) {
                return Err(GroupError::InvalidData("generating set is not symmetric".into()));
            }
        }
        let generators = gens.into_iter().map(GroupElement::Finite).collect();
        Ok(GeneratedGroup {
            kind: GroupKind::FiniteCayley { order, table, inverses },
            generators,
            lengths: Mutex::new(LengthCache::default()),
        })
    }

    /// Finite permutation group generated by the given permutations of
    /// `0..degree` (closure by breadth-first multiplication).
    pub fn from_permutations(degree: usize, gens: &[Vec<usize>]) -> Result<Self, GroupError> {
        for g in gens {
            let mut seen = vec![false; degree];
            if g.len() != degree {
                return Err(GroupError::InvalidData("permutation has wrong degree".into()));
            }
            for &v in g {
                if v >= degree || seen[v] {
                    return Err(GroupError::InvalidData("not a permutation".into()));
                }
                seen[v] = true;
            }
        }
        let compose = |a: &Vec<usize>, b: &Vec<usize>| -> Vec<usize> {
            (0..degree).map(|i| a[b[i]]).collect()
        };
        let invert = |a: &Vec<usize>| -> Vec<usize> {
            let mut r = vec![0; degree];
            for (i, &v) in a.iter().enumerate() {
                r[v] = i;
            }
            r
        };
        let mut sym_gens: Vec<Vec<usize>> = gens.to_vec();
        for g in gens {
            sym_gens.push(invert(g));
        }
        sym_gens.sort();
        sym_gens.dedup();
        let identity: Vec<usize> = (0..degree).collect();
        sym_gens.retain(|g| *g != identity);
        if sym_gens.is_empty() {
            return Err(GroupError::InvalidData("no non-trivial generators".into()));
        }
        let mut elements = vec![identity.clone()];
        let mut frontier = vec![identity];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for e in &frontier {
                for g in &sym_gens {
                    let prod = compose(e, g);
                    if !elements.contains(&prod) {
                        elements.push(prod.clone());
                        next.push(prod);
                    }
                }
            }
            frontier = next;
            if elements.len() > 100_000 {
                return Err(GroupError::InvalidData("permutation closure too large".into()));
            }
        }
        elements.sort();
        let index = |p: &Vec<usize>| elements.iter().position(|e| e == p).unwrap();
        let order = elements.len();
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index(&compose(a, b))).collect())
            .collect();
        let gen_ids = sym_gens.iter().map(|g| index(g)).collect();
        Self::from_cayley_table(order, gen_ids, table)
    }

    /// The cyclic group of the given order with generators +-1.
    pub fn cyclic(n: usize) -> Self {
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let gens = match n {
            1 => vec![],
            2 => vec![1],
            _ => vec![1, n - 1],
        };
        Self::from_cayley_table(n, gens, table).expect("cyclic table is valid")
    }

    /// The one-element group.
    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// Free abelian group of the given rank with generators +-e_i; all
    /// operations stay within the word-length cap.
    pub fn free_abelian(rank: usize, radius_cap: u32) -> Self {
        let mut generators = Vec::new();
        for i in 0..rank {
            for sign in [1i64, -1] {
                let mut v = vec![0i64; rank];
                v[i] = sign;
                generators.push(GroupElement::Abelian(v));
            }
        }
        generators.sort();
        GeneratedGroup {
            kind: GroupKind::FreeAbelian { rank, radius_cap },
            generators,
            lengths: Mutex::new(LengthCache::default()),
        }
    }

    /// The integers with generators +-1.
    pub fn integers(radius_cap: u32) -> Self {
        Self::free_abelian(1, radius_cap)
    }

    /// Free group of the given rank on a radius-capped window.
    pub fn free(rank: usize, radius_cap: u32) -> Self {
        let mut generators = Vec::new();
        for i in 0..rank as i32 {
            generators.push(GroupElement::Free(vec![i + 1]));
            generators.push(GroupElement::Free(vec![-(i + 1)]));
        }
        generators.sort();
        GeneratedGroup {
            kind: GroupKind::Free { rank, radius_cap },
            generators,
            lengths: Mutex::new(LengthCache::default()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match &self.kind {
            GroupKind::FiniteCayley { .. } => GroupElement::Finite(0),
            GroupKind::FreeAbelian { rank, .. } => GroupElement::Abelian(vec![0; *rank]),
            GroupKind::Free { .. } => GroupElement::Free(vec![]),
        }
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Order of the group when finite.
    pub fn finite_order(&self) -> Option<usize> {
        match &self.kind {
            GroupKind::FiniteCayley { order, .. } => Some(*order),
            _ => None,
        }
    }

    fn radius_cap(&self) -> u32 {
        match &self.kind {
            GroupKind::FiniteCayley { .. } => u32::MAX,
            GroupKind::FreeAbelian { radius_cap, .. } | GroupKind::Free { radius_cap, .. } => {
                *radius_cap
            }
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        let out = match (&self.kind, a, b) {
            (GroupKind::FiniteCayley { table, .. }, GroupElement::Finite(x), GroupElement::Finite(y)) => {
                GroupElement::Finite(table[*x][*y])
            }
            (GroupKind::FreeAbelian { .. }, GroupElement::Abelian(x), GroupElement::Abelian(y)) => {
                GroupElement::Abelian(x.iter().zip(y).map(|(u, v)| u + v).collect())
            }
            (GroupKind::Free { .. }, GroupElement::Free(x), GroupElement::Free(y)) => {
                let mut word = x.clone();
                for &l in y {
                    if word.last() == Some(&-l) {
                        word.pop();
                    } else {
                        word.push(l);
                    }
                }
                GroupElement::Free(word)
            }
            _ => return Err(GroupError::InvalidData("element kind mismatch".into())),
        };
        self.check_window(&out)?;
        Ok(out)
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        match (&self.kind, a) {
            (GroupKind::FiniteCayley { inverses, .. }, GroupElement::Finite(x)) => {
                GroupElement::Finite(inverses[*x])
            }
            (_, GroupElement::Abelian(x)) => GroupElement::Abelian(x.iter().map(|v| -v).collect()),
            (_, GroupElement::Free(x)) => {
                GroupElement::Free(x.iter().rev().map(|l| -l).collect())
            }
            _ => unreachable!("element kind mismatch"),
        }
    }

    fn check_window(&self, g: &GroupElement) -> Result<(), GroupError> {
        let cap = self.radius_cap();
        let cheap = match g {
            GroupElement::Finite(_) => 0,
            GroupElement::Abelian(x) => x.iter().map(|v| v.unsigned_abs()).sum::<u64>() as u32,
            GroupElement::Free(w) => w.len() as u32,
        };
        if cheap > cap {
            return Err(GroupError::OutOfWindow { cap });
        }
        Ok(())
    }

    /// Exact word length by breadth-first search on the Cayley graph,
    /// memoized per ball.
    pub fn word_length(&self, g: &GroupElement) -> Result<u32, GroupError> {
        self.check_window(g)?;
        let mut cache = self.lengths.lock().unwrap();
        loop {
            if let Some(&l) = cache.known.get(g) {
                return Ok(l);
            }
            if cache.saturated || cache.radius >= self.radius_cap() {
                return Err(GroupError::OutOfWindow { cap: self.radius_cap() });
            }
            self.expand_one_layer(&mut cache)?;
        }
    }

    /// All elements of word length at most `radius`, sorted by
    /// (length, element); deterministic.
    pub fn ball(&self, radius: u32) -> Result<Vec<GroupElement>, GroupError> {
        if radius > self.radius_cap() {
            return Err(GroupError::OutOfWindow { cap: self.radius_cap() });
        }
        let mut cache = self.lengths.lock().unwrap();
        while cache.radius < radius && !cache.saturated {
            self.expand_one_layer(&mut cache)?;
        }
        let mut out: Vec<(u32, GroupElement)> = cache
            .known
            .iter()
            .filter(|(_, &l)| l <= radius)
            .map(|(g, &l)| (l, g.clone()))
            .collect();
        out.sort();
        Ok(out.into_iter().map(|(_, g)| g).collect())
    }

    /// Whether the ball of the given radius already covers the whole group.
    pub fn ball_saturates(&self, radius: u32) -> bool {
        let mut cache = self.lengths.lock().unwrap();
        while !cache.saturated && cache.radius <= radius {
            if self.expand_one_layer(&mut cache).is_err() {
                return false;
            }
        }
        cache.saturated && cache.known.values().all(|&l| l <= radius)
    }

    fn expand_one_layer(&self, cache: &mut LengthCache) -> Result<(), GroupError> {
        if cache.known.is_empty() {
            cache.known.insert(self.identity(), 0);
            cache.frontier = vec![self.identity()];
            cache.radius = 0;
            return Ok(());
        }
        let next_radius = cache.radius + 1;
        let mut next = Vec::new();
        for e in std::mem::take(&mut cache.frontier) {
            for g in &self.generators {
                // Frontier products sit at length <= radius + 1, inside any
                // window that admits next_radius.
                let prod = match self.mul(&e, g) {
                    Ok(p) => p,
                    Err(GroupError::OutOfWindow { .. }) => continue,
                    Err(e) => return Err(e),
                };
                if !cache.known.contains_key(&prod) {
                    cache.known.insert(prod.clone(), next_radius);
                    next.push(prod);
                }
            }
        }
        next.sort();
        cache.saturated = next.is_empty();
        cache.frontier = next;
        cache.radius = next_radius;
        Ok(())
    }
}

/// JSON ingestion format for groups: either a full Cayley table or a builtin.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Cayley {
        order: usize,
        generators: Vec<usize>,
        table: Vec<Vec<usize>>,
    },
    Builtin {
        #[serde(rename = "type")]
        kind: String,
        rank: usize,
        #[serde(default = "default_radius_cap")]
        radius_cap: u32,
    },
}

fn default_radius_cap() -> u32 {
    64
}

impl GroupSpec {
    pub fn build(self) -> Result<GeneratedGroup, GroupError> {
        match self {
            GroupSpec::Cayley { order, generators, table } => {
                GeneratedGroup::from_cayley_table(order, generators, table)
            }
            GroupSpec::Builtin { kind, rank, radius_cap } => match kind.as_str() {
                "Z^d" => Ok(GeneratedGroup::free_abelian(rank, radius_cap)),
                "free" => Ok(GeneratedGroup::free(rank, radius_cap)),
                other => Err(GroupError::InvalidData(format!("unknown builtin group {other}"))),
            },
        }
    }
}
