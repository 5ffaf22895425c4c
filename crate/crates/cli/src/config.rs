//! Run configuration: defaults, then a `--config` JSON file, then flags.

use clap::Args;
use fuzzyseg::affinity::{AffinityConfig, AffinityKind};
use fuzzyseg::autoseed::AutoseedConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Fully resolved settings of a `segment`, `autoseg` or `scale` run. Written
/// to `config.json` in the output directory and accepted back by `--config`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub affinity: AffinityConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub autoseed: Option<AutoseedConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Starts from `--config` when given and checks it was written for `command`.
    pub fn base(path: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let mut c = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        match &c.command {
            Some(other) if other != command => {
                return Err(CliError::Config(format!("config is for '{other}', not '{command}'")))
            }
            _ => c.command = Some(command.to_string()),
        }
        Ok(c)
    }

    pub fn require_image(&self) -> Result<&Path, CliError> {
        self.image.as_deref().ok_or_else(|| CliError::Config("--image is required".into()))
    }

    pub fn require_seeds(&self) -> Result<&Path, CliError> {
        self.seeds.as_deref().ok_or_else(|| CliError::Config("--seeds is required".into()))
    }

    pub fn require_output(&self) -> Result<&Path, CliError> {
        self.output.as_deref().ok_or_else(|| CliError::Config("--output is required".into()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct AffinityFlags {
    /// gaussian, gaussian-adaptive or skew
    #[arg(long)]
    pub affinity: Option<AffinityKind>,
    /// Skew divergence smoothing weight, in (0, 1)
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mean_thresh: Option<f64>,
    #[arg(long)]
    pub std_thresh: Option<f64>,
    #[arg(long)]
    pub div_thresh: Option<f64>,
    /// Largest window side the scale search may return (odd)
    #[arg(long)]
    pub max_scale: Option<usize>,
    /// Skip the scale search and use this odd window side
    #[arg(long)]
    pub fixed_scale: Option<usize>,
}

impl AffinityFlags {
    pub fn apply(&self, c: &mut AffinityConfig) {
        if let Some(v) = self.affinity {
            c.affinity = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.mean_thresh {
            c.mean_thresh = v;
        }
        if let Some(v) = self.std_thresh {
            c.std_thresh = v;
        }
        if let Some(v) = self.div_thresh {
            c.div_thresh = v;
        }
        if let Some(v) = self.max_scale {
            c.max_scale = v;
        }
        if self.fixed_scale.is_some() {
            c.fixed_scale = self.fixed_scale;
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct AutoseedFlags {
    /// Number of texture classes
    #[arg(long)]
    pub k: Option<usize>,
    /// Patch side in pixels
    #[arg(long)]
    pub patch_px: Option<usize>,
    /// Weight of patch position in the patch distance
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    /// Standard deviation of seed sampling around class centroids, in pixels
    #[arg(long)]
    pub seed_std: Option<f64>,
    #[arg(long)]
    pub kmeans_restarts: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
}

impl AutoseedFlags {
    pub fn apply(&self, c: &mut AutoseedConfig) {
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.patch_px {
            c.patch_px = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.samples_per_class {
            c.samples_per_class = v;
        }
        if let Some(v) = self.seed_std {
            c.seed_std = v;
        }
        if let Some(v) = self.kmeans_restarts {
            c.kmeans_restarts = v;
        }
        if let Some(v) = self.rng_seed {
            c.rng_seed = v;
        }
    }
}
