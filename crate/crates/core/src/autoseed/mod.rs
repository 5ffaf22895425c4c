//! Automatic seeding: patch histograms are compared by symmetrized KL
//! divergence plus a spatial term, embedded in 3-D by classical MDS and
//! clustered by k-means. Seeds are drawn around each class's mean patch center.

mod distance;
mod kmeans;
mod mds;
mod seeds;

pub use distance::{patch_distance_matrix, DistanceMatrix, HIST_SMOOTHING};
pub use kmeans::{kmeans, kmeans_restarts, Clustering, MAX_ITERATIONS};
pub use mds::{mds_embed, stress, Embedding};
pub use seeds::{class_centroids, sample_seeds, MAX_ATTEMPTS};

use crate::affinity::{AffinityConfig, AffinityError, AffinityModel};
use crate::image::{make_patch_grid, GrayImage, ImageError};
use crate::mofs::{segment_image, MofsError, SeedSpec, Semisegmentation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutoseedError {
    #[error("patch {index} has an empty histogram")]
    EmptyPatch { index: usize },
    #[error("degenerate distance matrix: {0}")]
    DegenerateMatrix(String),
    #[error("{points} points cannot be embedded in {dim} dimensions")]
    TooFewPoints { points: usize, dim: usize },
    #[error("k = {k} is invalid for {n} points")]
    BadK { k: usize, n: usize },
    #[error("class {class} has no patches")]
    EmptyClass { class: usize },
    #[error("could not place a seed for class {class}")]
    SamplingExhausted { class: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Affinity(#[from] AffinityError),
    #[error(transparent)]
    Mofs(#[from] MofsError),
}

pub const EMBEDDING_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct AutoseedConfig {
    pub k: usize,
    pub patch_px: usize,
    pub lambda: f64,
    pub samples_per_class: usize,
    /// Standard deviation of the seed sampling distribution, in pixels.
    pub seed_std: f64,
    /// Independent k-means++ starts; the lowest-inertia result is kept.
    pub kmeans_restarts: usize,
    pub rng_seed: u64,
}

impl Default for AutoseedConfig {
    fn default() -> Self {
        Self { k: 2, patch_px: 20, lambda: 0.5, samples_per_class: 3, seed_std: 1.0, kmeans_restarts: 10, rng_seed: 0 }
    }
}

impl AutoseedConfig {
    pub fn validate(&self) -> Result<(), AutoseedError> {
        if self.k == 0 {
            return Err(AutoseedError::BadK { k: 0, n: 0 });
        }
        if self.kmeans_restarts == 0 {
            return Err(AutoseedError::InvalidConfig("kmeans-restarts must be >= 1".into()));
        }
        if self.samples_per_class == 0 {
            return Err(AutoseedError::InvalidConfig("samples-per-class must be >= 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(AutoseedError::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.seed_std >= 0.0 && self.seed_std.is_finite()) {
            return Err(AutoseedError::InvalidConfig(format!("seed-std must be >= 0, got {}", self.seed_std)));
        }
        Ok(())
    }
}

/// Everything the automatic pipeline decided along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub k: usize,
    pub patch_px: usize,
    pub grid: (usize, usize),
    pub embedding: Vec<Vec<f64>>,
    /// Class per patch, `1..=k`.
    pub labels: Vec<usize>,
    pub kmeans_iterations: usize,
    /// `(x, y)` per class.
    pub centroids: Vec<(f64, f64)>,
    /// Sampled seed points per class, before dilation.
    pub seeds: Vec<Vec<(usize, usize)>>,
    pub scales: Vec<usize>,
}

/// Seeds chosen without segmenting.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoSeeds {
    pub clicks: Vec<Vec<crate::image::Spel>>,
    pub diagnostics: Diagnostics,
}

/// Patch grid, distances, embedding, clustering and seed sampling.
pub fn auto_seeds(img: &GrayImage, config: &AutoseedConfig) -> Result<AutoSeeds, AutoseedError> {
    config.validate()?;
    let grid = make_patch_grid(img, config.patch_px)?;
    if config.k > grid.len() {
        return Err(AutoseedError::BadK { k: config.k, n: grid.len() });
    }
    let d = patch_distance_matrix(&grid, config.lambda)?;
    let embedding = mds_embed(&d, EMBEDDING_DIM)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let clustering = kmeans_restarts(&embedding.points, config.k, config.kmeans_restarts, &mut rng)?;
    let centroids = class_centroids(&grid, &clustering.labels, config.k)?;
    let clicks =
        sample_seeds(&centroids, config.samples_per_class, img.width(), img.height(), config.seed_std, &mut rng)?;
    let diagnostics = Diagnostics {
        k: config.k,
        patch_px: config.patch_px,
        grid: (grid.cols, grid.rows),
        embedding: embedding.points,
        labels: clustering.labels.iter().map(|l| l + 1).collect(),
        kmeans_iterations: clustering.iterations,
        centroids,
        seeds: clicks.iter().map(|v| v.iter().map(|s| (s.x, s.y)).collect()).collect(),
        scales: Vec::new(),
    };
    Ok(AutoSeeds { clicks, diagnostics })
}

#[derive(Debug, Clone)]
pub struct AutoSegmentation {
    pub segmentation: Semisegmentation,
    pub seeds: SeedSpec,
    pub model: AffinityModel,
    pub diagnostics: Diagnostics,
}

/// [`auto_seeds`] followed by affinity fitting and segmentation. Needs `k >= 2`.
pub fn auto_segment(
    img: &GrayImage,
    config: &AutoseedConfig,
    affinity: &AffinityConfig,
) -> Result<AutoSegmentation, AutoseedError> {
    if config.k < 2 {
        return Err(AutoseedError::BadK { k: config.k, n: 0 });
    }
    let AutoSeeds { clicks, mut diagnostics } = auto_seeds(img, config)?;
    let seeds = SeedSpec::from_clicks(&clicks, img.width(), img.height());
    let model = AffinityModel::fit(img, &seeds.objects, affinity)?;
    let segmentation = segment_image(img, &seeds, &model)?;
    diagnostics.scales = model.scales();
    Ok(AutoSegmentation { segmentation, seeds, model, diagnostics })
}
