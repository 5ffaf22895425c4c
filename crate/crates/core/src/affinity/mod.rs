//! Fuzzy spel affinities.
//!
//! Three variants are available per object:
//!
//! * `gaussian`: pairwise brightness average and difference, fitted on the seeds.
//! * `gaussian-adaptive`: the difference term is replaced by the mean pair
//!   brightness over windows at the object's selected scale.
//! * `skew`: windows at the object's selected scale are compared with the
//!   pooled seed histogram through the skew divergence.
//!
//! All variants are zero for pairs that do not share an edge.

mod divergence;
mod gaussian;
mod scale;
mod skew;

pub use divergence::{kl_divergence, skew_divergence};
pub use gaussian::{
    adaptive_gaussian_affinity, fit_adaptive_gaussian_params, fit_gaussian_params,
    gaussian_affinity, rho, AdaptiveGaussianParams, GaussianAffinityParams,
};
pub use scale::{
    select_scale, ScaleMode, ScaleSelection, ScaleStep, ScaleThresholds, DEFAULT_MAX_SCALE,
    MIN_SIDE,
};
pub use skew::{fit_skew_params, skew_affinity, SkewAffinityParams};

use crate::image::{GrayImage, ImageError, PairStatsTable, Spel, Window};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Floor for standard deviations fed to `rho`.
pub const EPS_STD: f64 = 1e-4;
/// Floor for the skew-affinity divergence scale.
pub const EPS_DIV: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum AffinityError {
    #[error("standard deviation must be positive, got {0}")]
    NonPositiveStd(f64),
    #[error("divergence undefined: reference has zero mass at bin {bin}")]
    UndefinedDivergence { bin: usize },
    #[error("distributions differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("skew parameter must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("seed region contains no edge-adjacent pair")]
    NoAdjacentPairs,
    #[error("object has no seeds")]
    NoSeeds,
    #[error("invalid affinity configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AffinityKind {
    Gaussian,
    GaussianAdaptive,
    #[default]
    Skew,
}

impl std::str::FromStr for AffinityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "gaussian-adaptive" => Ok(Self::GaussianAdaptive),
            "skew" => Ok(Self::Skew),
            other => Err(format!("unknown affinity '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct AffinityConfig {
    pub affinity: AffinityKind,
    pub alpha: f64,
    pub mean_thresh: f64,
    pub std_thresh: f64,
    pub div_thresh: f64,
    pub max_scale: usize,
    /// Skip the scale search and use this odd window side for every object.
    pub fixed_scale: Option<usize>,
}

impl Default for AffinityConfig {
    fn default() -> Self {
        Self {
            affinity: AffinityKind::Skew,
            alpha: 0.99,
            mean_thresh: 0.06,
            std_thresh: 0.04,
            div_thresh: 0.8,
            max_scale: DEFAULT_MAX_SCALE,
            fixed_scale: None,
        }
    }
}

impl AffinityConfig {
    pub fn thresholds(&self) -> ScaleThresholds {
        ScaleThresholds {
            mean: self.mean_thresh,
            std: self.std_thresh,
            divergence: self.div_thresh,
            alpha: self.alpha,
            max_scale: self.max_scale,
        }
    }

    pub fn validate(&self) -> Result<(), AffinityError> {
        let bad = |m: String| Err(AffinityError::InvalidConfig(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(AffinityError::InvalidAlpha(self.alpha));
        }
        for (name, v) in [
            ("mean-thresh", self.mean_thresh),
            ("std-thresh", self.std_thresh),
            ("div-thresh", self.div_thresh),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_scale < MIN_SIDE || self.max_scale % 2 == 0 {
            return bad(format!("max-scale must be odd and >= 3, got {}", self.max_scale));
        }
        if let Some(s) = self.fixed_scale {
            if s < MIN_SIDE || s % 2 == 0 {
                return bad(format!("fixed-scale must be odd and >= 3, got {s}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AffinityParams {
    Gaussian(GaussianAffinityParams),
    GaussianAdaptive(AdaptiveGaussianParams),
    Skew(SkewAffinityParams),
}

/// Affinity of one object: fitted parameters and the window scale they use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectAffinity {
    /// 1-based object id.
    pub object: usize,
    pub scale: ScaleSelection,
    pub params: AffinityParams,
}

impl ObjectAffinity {
    /// Affinity of the ordered pair `(c, d)`.
    pub fn evaluate(&self, c: Spel, d: Spel, img: &GrayImage) -> f64 {
        match &self.params {
            AffinityParams::Gaussian(p) => gaussian_affinity(c, d, img, p),
            AffinityParams::GaussianAdaptive(p) => {
                adaptive_gaussian_affinity(c, d, img, p, &self.scale)
            }
            AffinityParams::Skew(p) => skew_affinity(c, d, img, p, &self.scale),
        }
    }
}

/// One affinity function per object, 4-neighbor adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityModel {
    pub objects: Vec<ObjectAffinity>,
}

impl AffinityModel {
    /// Selects a scale and fits parameters for every object. `seed_sets[m - 1]`
    /// holds the (dilated) seed spels of object `m`.
    pub fn fit(
        img: &GrayImage,
        seed_sets: &[Vec<Spel>],
        config: &AffinityConfig,
    ) -> Result<AffinityModel, AffinityError> {
        config.validate()?;
        let objects = seed_sets
            .par_iter()
            .enumerate()
            .map(|(i, seeds)| fit_object(img, i + 1, seeds, config))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AffinityModel { objects })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn scales(&self) -> Vec<usize> {
        self.objects.iter().map(|o| o.scale.side).collect()
    }

    /// Precomputes per-object lookup structures for fast link evaluation.
    pub fn prepare<'a>(&self, img: &'a GrayImage) -> PreparedAffinity<'a> {
        let needs_table =
            self.objects.iter().any(|o| matches!(o.params, AffinityParams::GaussianAdaptive(_)));
        let table = needs_table.then(|| Arc::new(PairStatsTable::new(img)));
        let objects = self
            .objects
            .par_iter()
            .map(|o| match &o.params {
                AffinityParams::Gaussian(p) => Prepared::Gaussian(*p),
                AffinityParams::GaussianAdaptive(p) => Prepared::Adaptive {
                    params: *p,
                    side: o.scale.side,
                    table: table.clone().expect("table built for adaptive objects"),
                },
                AffinityParams::Skew(p) => Prepared::Skew {
                    field: skew::divergence_field(img, o.scale.side, &p.seed_distribution, p.alpha),
                    div_scale: p.div_scale,
                },
            })
            .collect();
        PreparedAffinity { img, objects }
    }
}

fn fit_object(
    img: &GrayImage,
    object: usize,
    seeds: &[Spel],
    config: &AffinityConfig,
) -> Result<ObjectAffinity, AffinityError> {
    if seeds.is_empty() {
        return Err(AffinityError::NoSeeds);
    }
    let search = |mode| match config.fixed_scale {
        Some(side) => Ok(ScaleSelection::fixed(side)),
        None => select_scale(img, seeds, mode, &config.thresholds()),
    };
    let (scale, params) = match config.affinity {
        AffinityKind::Gaussian => (
            ScaleSelection::fixed(config.fixed_scale.unwrap_or(MIN_SIDE)),
            AffinityParams::Gaussian(fit_gaussian_params(img, seeds)?),
        ),
        AffinityKind::GaussianAdaptive => {
            let scale = search(ScaleMode::Gaussian)?;
            let p = fit_adaptive_gaussian_params(img, seeds, &scale)?;
            (scale, AffinityParams::GaussianAdaptive(p))
        }
        AffinityKind::Skew => {
            let scale = search(ScaleMode::Skew)?;
            let p = fit_skew_params(img, seeds, &scale, config.alpha)?;
            (scale, AffinityParams::Skew(p))
        }
    };
    Ok(ObjectAffinity { object, scale, params })
}

enum Prepared {
    Gaussian(GaussianAffinityParams),
    Adaptive { params: AdaptiveGaussianParams, side: usize, table: Arc<PairStatsTable> },
    Skew { field: Vec<f64>, div_scale: f64 },
}

/// An [`AffinityModel`] bound to an image, ready for the segmentation engine.
pub struct PreparedAffinity<'a> {
    img: &'a GrayImage,
    objects: Vec<Prepared>,
}

impl PreparedAffinity<'_> {
    pub fn objects(&self) -> usize {
        self.objects.len()
    }

    /// Affinity of object `object` (0-based) for the edge-adjacent pixel
    /// indices `c` and `d`.
    #[inline]
    pub fn link(&self, object: usize, c: usize, d: usize) -> f64 {
        let data = self.img.data();
        match &self.objects[object] {
            Prepared::Gaussian(p) => gaussian::pair_terms(data[c], data[d], p),
            Prepared::Adaptive { params, side, table } => {
                let (w, h) = (self.img.width(), self.img.height());
                let rect = Window::with_side(self.img.spel(c), *side)
                    .clip(w, h)
                    .union(&Window::with_side(self.img.spel(d), *side).clip(w, h));
                let mean = table.rect_mean(rect).unwrap_or(params.window_mean);
                gaussian::adaptive_terms(data[c], data[d], mean, params)
            }
            Prepared::Skew { field, div_scale } => skew::skew_link(field[c], field[d], *div_scale),
        }
    }
}
