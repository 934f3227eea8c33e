//! Configuration and error surface of the verification suites.

use serde::Deserialize;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input error: {0}")]
    Input(String),
}

/// Configuration of a verification run. Every suite derives its per-trial
/// randomness from the seed alone, so reports are reproducible byte for
/// byte.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub epsilons: Vec<f64>,
    /// Base population; checks scale it to their documented counts.
    pub trials: usize,
    /// Points of the line metric space used for band-algebra suites.
    pub band_points: usize,
    /// Propagation radius of generated band witnesses.
    pub band_radius: f64,
    /// Grid for boundary-construction paths.
    pub boundary_grid: usize,
    /// Grid for the winding anchor.
    pub anchor_grid: usize,
    /// Interior window of the Toeplitz pairing.
    pub toeplitz_window: usize,
    /// Enumeration window reported for the integers.
    pub z_window: u32,
    /// Enumeration window reported for the rank-two free abelian group.
    pub z2_window: u32,
    /// Output path for the JSON report (a .csv sibling is written too).
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            epsilons: vec![0.01, 0.05, 0.1],
            trials: 1000,
            band_points: 10,
            band_radius: 2.0,
            boundary_grid: 128,
            anchor_grid: 256,
            toeplitz_window: 256,
            z_window: 8,
            z2_window: 4,
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.trials == 0 {
            return Err(SuiteError::Config("trials must be at least one".into()));
        }
        if self.epsilons.is_empty() {
            return Err(SuiteError::Config("at least one epsilon is required".into()));
        }
        if self.epsilons.iter().any(|&e| e <= 0.0 || e >= 0.25) {
            return Err(SuiteError::Config("epsilons must lie in (0, 1/4)".into()));
        }
        if self.band_points < 2 || self.band_points > 64 {
            return Err(SuiteError::Config("band_points must be in 2..=64".into()));
        }
        if self.boundary_grid < 8 || self.anchor_grid < 8 {
            return Err(SuiteError::Config("grids must have at least 8 intervals".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self, SuiteError> {
        let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: SuiteConfig = serde_json::from_str(&text)
            .map_err(|e| SuiteError::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
