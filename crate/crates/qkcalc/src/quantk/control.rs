//! Control pairs: a norm-relaxation factor and a propagation-dilation
//! table, with the composition law used to combine measured pipelines.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("lambda must exceed one, got {0}")]
    BadLambda(f64),
    #[error("table entry outside the admissible domain (0, 1/(4 lambda))")]
    OutOfDomain,
    #[error("empty table")]
    Empty,
}

/// A pair (lambda, h): lambda > 1 and a finite table of (eps, h_eps) whose
/// dominating interpolant is non-increasing in eps.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPair {
    lambda: f64,
    /// Sorted by eps ascending.
    table: Vec<(f64, f64)>,
}

impl ControlPair {
    pub fn new(lambda: f64, mut table: Vec<(f64, f64)>) -> Result<Self, ControlError> {
        if !(lambda > 1.0) {
            return Err(ControlError::BadLambda(lambda));
        }
        if table.is_empty() {
            return Err(ControlError::Empty);
        }
        table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if table.iter().any(|&(e, h)| e <= 0.0 || e >= 0.25 / lambda || h <= 0.0) {
            return Err(ControlError::OutOfDomain);
        }
        Ok(ControlPair { lambda, table })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn table(&self) -> &[(f64, f64)] {
        &self.table
    }

    /// The non-increasing dominating interpolant: the largest tabulated
    /// value at or beyond eps (extended constantly below the first entry).
    pub fn eval(&self, eps: f64) -> f64 {
        let mut best: Option<f64> = None;
        for &(e, h) in self.table.iter().rev() {
            if e >= eps {
                best = Some(best.map_or(h, |b: f64| b.max(h)));
            } else {
                break;
            }
        }
        // Beyond the last tabulated point the interpolant continues at the
        // last value; below the first it is the running maximum, which the
        // loop above already produces.
        best.unwrap_or_else(|| self.table.last().expect("non-empty table").1)
    }

    /// Composition `(lambda lambda', h * h')` with
    /// `(h * h')_eps = h_{lambda' eps} h'_eps`.
    pub fn compose(&self, inner: &ControlPair) -> Result<ControlPair, ControlError> {
        let lambda = self.lambda * inner.lambda;
        let mut eps_grid: Vec<f64> = inner
            .table
            .iter()
            .map(|&(e, _)| e)
            .chain(self.table.iter().map(|&(e, _)| e / inner.lambda))
            .filter(|&e| e > 0.0 && e < 0.25 / lambda)
            .collect();
        eps_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eps_grid.dedup();
        if eps_grid.is_empty() {
            // Fall back to a single evaluation point inside the domain.
            eps_grid.push(0.125 / lambda);
        }
        let table = eps_grid
            .into_iter()
            .map(|e| (e, self.eval(inner.lambda * e) * inner.eval(e)))
            .collect();
        ControlPair::new(lambda, table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lambda() {
        assert!(ControlPair::new(1.0, vec![(0.01, 2.0)]).is_err());
    }

    #[test]
    fn interpolant_is_non_increasing() {
        let cp = ControlPair::new(3.0, vec![(0.01, 10.0), (0.02, 6.0), (0.05, 7.0)]).unwrap();
        let grid = [0.005, 0.01, 0.015, 0.02, 0.03, 0.05, 0.07];
        for pair in grid.windows(2) {
            assert!(cp.eval(pair[0]) >= cp.eval(pair[1]) - 1e-12);
        }
        // Dominates the table.
        for &(e, h) in cp.table() {
            assert!(cp.eval(e) >= h);
        }
    }

    #[test]
    fn composition_law() {
        let outer = ControlPair::new(2.0, vec![(0.01, 4.0), (0.05, 3.0)]).unwrap();
        let inner = ControlPair::new(3.0, vec![(0.005, 5.0), (0.02, 2.0)]).unwrap();
        let composed = outer.compose(&inner).unwrap();
        assert!((composed.lambda() - 6.0).abs() < 1e-12);
        for &(e, h) in composed.table() {
            assert!((h - outer.eval(3.0 * e) * inner.eval(e)).abs() < 1e-12);
        }
    }
}
