//! Scoring and rendering of segmentations.

mod metrics;
mod render;

pub use metrics::{dice, label_dice, match_labels, weighted_dice, LabelMatch, ObjectScore};
pub use render::{encode_rgb_png, palette, render_connectedness};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("{objects} objects but only {palette} palette colors")]
    PaletteTooSmall { objects: usize, palette: usize },
}
