//! Finite metric spaces over which band algebras are built.

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("invalid metric: {0}")]
    Invalid(String),
}

/// A finite metric space given by its full distance matrix.
///
/// The metric axioms are required to hold exactly on the stored values.
#[derive(Clone, PartialEq, Debug)]
pub struct FiniteMetricSpace {
    size: usize,
    distances: Vec<f64>,
}

impl FiniteMetricSpace {
    pub fn new(distances: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = distances.len();
        if distances.iter().any(|r| r.len() != n) {
            return Err(MetricError::Invalid("distance matrix is not square".into()));
        }
        let flat: Vec<f64> = distances.into_iter().flatten().collect();
        let d = |i: usize, j: usize| flat[i * n + j];
        for i in 0..n {
            if d(i, i) != 0.0 {
                return Err(MetricError::Invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                if !d(i, j).is_finite() || d(i, j) < 0.0 {
                    return Err(MetricError::Invalid(format!("bad distance at ({i},{j})")));
                }
                if d(i, j) != d(j, i) {
                    return Err(MetricError::Invalid(format!("asymmetry at ({i},{j})")));
                }
                if i != j && d(i, j) == 0.0 {
                    return Err(MetricError::Invalid(format!("zero distance at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if d(i, k) > d(i, j) + d(j, k) {
                        return Err(MetricError::Invalid(format!(
                            "triangle inequality fails at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { size: n, distances: flat })
    }

    /// Euclidean metric on a list of coordinate points.
    pub fn from_coordinates(points: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = points.len();
        let dim = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != dim) {
            return Err(MetricError::Invalid("ragged coordinates".into()));
        }
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..dim).map(|k| (points[i][k] - points[j][k]).powi(2)).sum();
                rows[i][j] = s.sqrt();
            }
        }
        // Symmetrize bit-exactly; sqrt of identical sums already is, but make
        // the invariant unconditional.
        for i in 0..n {
            for j in 0..i {
                rows[j][i] = rows[i][j];
            }
        }
        Self::new(rows)
    }

    /// Discrete metric: every pair of distinct points at distance one.
    pub fn discrete(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(rows).expect("discrete metric is valid")
    }

    /// Path metric on a line of n points: d(i, j) = |i - j|.
    pub fn line(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        Self::new(rows).expect("line metric is valid")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.size + j]
    }

    pub fn diameter(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// JSON ingestion format: either an explicit distance matrix or coordinates.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Distances { points: usize, distances: Vec<Vec<f64>> },
    Coordinates { coordinates: Vec<Vec<f64>> },
}

impl MetricSpec {
    pub fn build(self) -> Result<FiniteMetricSpace, MetricError> {
        match self {
            MetricSpec::Distances { points, distances } => {
                if distances.len() != points {
                    return Err(MetricError::Invalid("points field disagrees with matrix".into()));
                }
                FiniteMetricSpace::new(distances)
            }
            MetricSpec::Coordinates { coordinates } => {
                FiniteMetricSpace::from_coordinates(&coordinates)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_metric_axioms() {
        let m = FiniteMetricSpace::line(5);
        assert_eq!(m.distance(0, 4), 4.0);
        assert_eq!(m.diameter(), 4.0);
    }

    #[test]
    fn rejects_triangle_violation() {
        let rows = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        assert!(FiniteMetricSpace::new(rows).is_err());
    }

    #[test]
    fn coordinates_ingestion() {
        let spec: MetricSpec =
            serde_json::from_str(r#"{"coordinates": [[0.0, 0.0], [3.0, 4.0]]}"#).unwrap();
        let m = spec.build().unwrap();
        assert!((m.distance(0, 1) - 5.0).abs() < 1e-15);
    }
}
