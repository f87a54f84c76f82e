use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Configuration of one experiment run. The seed fully determines every
/// random choice a suite makes, so identical configs give byte-identical
/// CSV artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Suite to run when `--suite` is not given on the command line.
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Base sample count; suites scale their case groups from this.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Grid resolution per axis for torus quadratures.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Restrict model-sweeping suites to one model tag.
    #[serde(default)]
    pub model: Option<String>,
    /// Output directory for CSV artifacts and summaries.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Named tolerance overrides; unknown names are rejected by the suite
    /// that consumes them.
    #[serde(default)]
    pub tolerance_overrides: BTreeMap<String, f64>,
}

fn default_seed() -> u64 {
    42
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: None,
            seed: default_seed(),
            samples: None,
            grid: None,
            model: None,
            out_dir: None,
            tolerance_overrides: BTreeMap::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn grid_or(&self, default: usize) -> usize {
        self.grid.unwrap_or(default)
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerance_overrides.get(name).copied().unwrap_or(default)
    }
}

/// Summary of a suite run; `pass` holds exactly when no case exceeded its
/// bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportSummary {
    pub suite: String,
    pub cases: usize,
    /// Largest `measured - bound` over all cases (negative when everything
    /// passes with margin).
    pub max_violation: f64,
    pub pass: bool,
    pub wall_time_s: f64,
}
