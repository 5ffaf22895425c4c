//! Per-object neighborhood scale search.
//!
//! Starting from 3x3, windows around every seed grow by two pixels per side
//! until the statistics of two consecutive sizes agree within thresholds.

use super::divergence::skew_divergence;
use super::AffinityError;
use crate::image::{window_histogram, window_stats, GrayImage, Histogram, Spel, Window};
use serde::{Deserialize, Serialize};

pub const MIN_SIDE: usize = 3;
pub const DEFAULT_MAX_SCALE: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    /// Compare mean and std of window pair brightness.
    Gaussian,
    /// Compare pooled window histograms by skew divergence.
    Skew,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleThresholds {
    pub mean: f64,
    pub std: f64,
    pub divergence: f64,
    pub alpha: f64,
    pub max_scale: usize,
}

impl Default for ScaleThresholds {
    fn default() -> Self {
        Self { mean: 0.06, std: 0.04, divergence: 0.8, alpha: 0.99, max_scale: DEFAULT_MAX_SCALE }
    }
}

/// Statistics recorded for one window side during the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleStep {
    pub side: usize,
    /// Seed-averaged window pair mean and std.
    pub mean_pairs: f64,
    pub std_pairs: f64,
    /// Skew divergence of the pooled histogram at `side + 2` from the one at
    /// `side` (skew mode only).
    pub divergence_to_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSelection {
    /// Odd window side.
    pub side: usize,
    pub trace: Vec<ScaleStep>,
}

impl ScaleSelection {
    /// A preset scale with no search trace.
    pub fn fixed(side: usize) -> Self {
        assert!(side % 2 == 1 && side >= MIN_SIDE, "window side must be odd and >= 3");
        Self { side, trace: Vec::new() }
    }

    pub fn halfwidth(&self) -> usize {
        self.side / 2
    }
}

fn averaged_pair_stats(img: &GrayImage, seeds: &[Spel], side: usize) -> Result<(f64, f64), AffinityError> {
    let (mut m, mut s) = (0.0, 0.0);
    for &seed in seeds {
        let st = window_stats(img, Window::with_side(seed, side))?;
        m += st.mean;
        s += st.std;
    }
    let n = seeds.len() as f64;
    Ok((m / n, s / n))
}

fn pooled_histogram(img: &GrayImage, seeds: &[Spel], side: usize) -> Vec<f64> {
    let mut h = Histogram::new();
    for &seed in seeds {
        h.merge(&window_histogram(img, Window::with_side(seed, side)));
    }
    h.normalized()
}

/// Returns the first side `k + 2` whose statistics differ from those at `k`
/// by less than the thresholds, or `max_scale` when none does.
pub fn select_scale(
    img: &GrayImage,
    seeds: &[Spel],
    mode: ScaleMode,
    t: &ScaleThresholds,
) -> Result<ScaleSelection, AffinityError> {
    if seeds.is_empty() {
        return Err(AffinityError::NoSeeds);
    }
    if t.max_scale < MIN_SIDE || t.max_scale % 2 == 0 {
        return Err(AffinityError::InvalidConfig(format!(
            "max scale must be odd and >= 3, got {}",
            t.max_scale
        )));
    }
    let mut trace = Vec::new();
    let mut k = MIN_SIDE;
    let (mut mean, mut std) = averaged_pair_stats(img, seeds, k)?;
    let mut hist = match mode {
        ScaleMode::Skew => Some(pooled_histogram(img, seeds, k)),
        ScaleMode::Gaussian => None,
    };
    while k + 2 <= t.max_scale {
        let next = k + 2;
        let (next_mean, next_std) = averaged_pair_stats(img, seeds, next)?;
        let (stable, divergence, next_hist) = match (&hist, mode) {
            (Some(h), ScaleMode::Skew) => {
                let nh = pooled_histogram(img, seeds, next);
                let d = skew_divergence(h, &nh, t.alpha)?;
                (d < t.divergence, Some(d), Some(nh))
            }
            _ => (
                (next_mean - mean).abs() < t.mean && (next_std - std).abs() < t.std,
                None,
                None,
            ),
        };
        trace.push(ScaleStep { side: k, mean_pairs: mean, std_pairs: std, divergence_to_next: divergence });
        if stable {
            trace.push(ScaleStep { side: next, mean_pairs: next_mean, std_pairs: next_std, divergence_to_next: None });
            return Ok(ScaleSelection { side: next, trace });
        }
        k = next;
        mean = next_mean;
        std = next_std;
        hist = next_hist;
    }
    trace.push(ScaleStep { side: k, mean_pairs: mean, std_pairs: std, divergence_to_next: None });
    Ok(ScaleSelection { side: t.max_scale, trace })
}
