//! End-to-end drivers for the five experiments.
//!
//! Every driver is deterministic under its master seed: cells, realisations,
//! cascades and trees derive their own seeds through the counter scheme in
//! [`crate::seeds`], so the bounded worker pool never changes results. All
//! artifacts are written under the configured output directory together with
//! a run manifest.

mod exp1;
mod exp4;
mod exp5;
mod grid;
mod synth;

pub use exp1::{run_exp1, Exp1Output};
pub use exp4::{run_exp4, write_exp4, Exp4Config, Exp4Output, SeedParams, SweepPoint};
pub use exp5::{run_exp5, Exp5Output};
pub use grid::{emit_heatmap, emit_heatmap_svg, read_grid_csv, AccuracyGrid};
pub use synth::{
    compare_networks, default_comparison_specs, run_synthetic, write_synthetic, CellKey,
    MethodMeans, NetworkComparison, REstimator, SynthOutput,
};
pub use exp1::write_exp1;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgen::ModelSpec;

/// The default hashtag variant set used by fixtures and experiment 5.
pub const HASHTAG_VARIANTS: [&str; 9] = [
    "#GiletsJaunes",
    "#giletsjaunes",
    "#Giletsjaunes",
    "#GiletJaune",
    "#Giletjaune",
    "#giletjaune",
    "#giletsjaune",
    "#Giletsjaune",
    "#GJ",
];

/// Shared experiment configuration. Desk scale is the default; full scale
/// restores the paper-size realisation and sample counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub full_scale: bool,
    /// Stream per-cell progress to standard error.
    pub progress: bool,
    /// Parameter grid for beta and phi.
    pub grid_values: Vec<f64>,
    /// Neighbour adoption probability of the star experiment.
    pub r_nb: f64,
    /// Background spontaneous rate of the network experiments.
    pub r: f64,
    /// Star egos simulated per parameter value.
    pub exp1_egos_per_value: usize,
    /// Realisation batches for the star experiment statistics.
    pub exp1_batches: usize,
    /// Network substrate for experiments 2 and 3.
    pub network: ModelSpec,
    /// Network/resampling realisations for experiments 2 and 3.
    pub realisations: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Cap on cascades per cell when balancing classes.
    pub max_cascades_per_cell: usize,
    pub forest_trees: usize,
    /// Background-rate estimator used by the unknown-parameter classifier.
    pub r_estimator: synth::REstimator,
    pub exp4: Exp4Config,
    /// Observation window (days) for corpus classification.
    pub window_days: Option<u32>,
}

impl ExperimentConfig {
    pub fn desk(master_seed: u64) -> Self {
        ExperimentConfig {
            master_seed,
            full_scale: false,
            progress: false,
            grid_values: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            r_nb: 0.05,
            r: 0.005,
            exp1_egos_per_value: 10_000,
            exp1_batches: 5,
            network: ModelSpec::Er { n: 1000, p: 0.004 },
            realisations: 5,
            train_per_class: 6_000,
            test_per_class: 2_000,
            max_cascades_per_cell: 400,
            forest_trees: 100,
            r_estimator: synth::REstimator::Literal,
            exp4: Exp4Config::desk(),
            window_days: Some(7),
        }
    }

    pub fn full(master_seed: u64) -> Self {
        let mut cfg = Self::desk(master_seed);
        cfg.full_scale = true;
        cfg.realisations = 10;
        cfg.exp1_egos_per_value = 10_000;
        cfg.exp4.subsample_n = 100_000;
        cfg.exp4.base_network = ModelSpec::Ba {
            n: 300_000,
            m_attach: 2,
        };
        cfg.exp4.train_per_class = 6_000;
        cfg.exp4.test_per_class = 2_000;
        cfg
    }
}

/// Written next to every experiment's artifacts; sufficient to re-run the
/// experiment bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub experiment: u8,
    pub master_seed: u64,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub duration_secs: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, experiment: u8, cfg: &ExperimentConfig) -> Result<Self> {
        Ok(RunManifest {
            command: command.to_string(),
            experiment,
            master_seed: cfg.master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(cfg)?,
            duration_secs: 0.0,
            outputs: Vec::new(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("run_manifest.json");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(path)
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Spearman rank correlation; ties get mean ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut ranks = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let mean_rank = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = mean_rank;
            }
            i = j + 1;
        }
        ranks
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..xs.len() {
        num += (rx[i] - mean) * (ry[i] - mean);
        dx += (rx[i] - mean).powi(2);
        dy += (ry[i] - mean).powi(2);
    }
    if dx == 0.0 || dy == 0.0 {
        0.0
    } else {
        num / (dx * dy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_recovers_monotone_trends() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.2, 0.3, 0.4]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]), -1.0);
        let wobbly = spearman(&[1.0, 2.0, 3.0, 4.0], &[0.3, 0.1, 0.4, 0.9]);
        assert!(wobbly > 0.0 && wobbly < 1.0);
    }
}
