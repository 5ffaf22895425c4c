use super::{AffinityError, ScaleSelection, EPS_STD};
use crate::image::{rect_pair_stats, window_stats, GrayImage, Spel, Window};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Unnormalized Gaussian with peak 1: `exp(-(x - r)^2 / (2 s^2))`.
pub fn rho(x: f64, r: f64, s: f64) -> Result<f64, AffinityError> {
    if !(s > 0.0) {
        return Err(AffinityError::NonPositiveStd(s));
    }
    Ok(rho_unchecked(x, r, s))
}

#[inline]
pub(crate) fn rho_unchecked(x: f64, r: f64, s: f64) -> f64 {
    let z = (x - r) / s;
    (-0.5 * z * z).exp()
}

/// Brightness statistics of the edge-adjacent pairs inside a seed region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianAffinityParams {
    /// Mean of pair average brightness.
    pub g_mean: f64,
    pub g_std: f64,
    /// Mean of pair absolute brightness difference.
    pub a_mean: f64,
    pub a_std: f64,
}

/// Gaussian parameters plus the pair statistics of the seed windows at the
/// object's selected scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveGaussianParams {
    pub base: GaussianAffinityParams,
    pub window_mean: f64,
    pub window_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits `(g, h, a, b)` over every edge-adjacent pair with both spels in `seeds`.
/// Standard deviations below [`EPS_STD`] are raised to it.
pub fn fit_gaussian_params(
    img: &GrayImage,
    seeds: &[Spel],
) -> Result<GaussianAffinityParams, AffinityError> {
    let set: HashSet<Spel> = seeds.iter().copied().collect();
    let mut avgs = Vec::new();
    let mut diffs = Vec::new();
    let mut sorted: Vec<Spel> = set.iter().copied().collect();
    sorted.sort_unstable();
    for s in sorted {
        for n in [Spel::new(s.x + 1, s.y), Spel::new(s.x, s.y + 1)] {
            if set.contains(&n) {
                let (u, v) = (img.get(s), img.get(n));
                avgs.push(0.5 * (u + v));
                diffs.push((u - v).abs());
            }
        }
    }
    if avgs.is_empty() {
        return Err(AffinityError::NoAdjacentPairs);
    }
    let (g_mean, g_std) = mean_std(&avgs);
    let (a_mean, a_std) = mean_std(&diffs);
    Ok(GaussianAffinityParams {
        g_mean,
        g_std: g_std.max(EPS_STD),
        a_mean,
        a_std: a_std.max(EPS_STD),
    })
}

/// Averages the window pair statistics over the seed spels at the selected scale.
pub fn fit_adaptive_gaussian_params(
    img: &GrayImage,
    seeds: &[Spel],
    scale: &ScaleSelection,
) -> Result<AdaptiveGaussianParams, AffinityError> {
    let base = fit_gaussian_params(img, seeds)?;
    let mut means = 0.0;
    let mut stds = 0.0;
    for &s in seeds {
        let st = window_stats(img, Window::with_side(s, scale.side))?;
        means += st.mean;
        stds += st.std;
    }
    let n = seeds.len() as f64;
    Ok(AdaptiveGaussianParams {
        base,
        window_mean: means / n,
        window_std: (stds / n).max(EPS_STD),
    })
}

/// Pairwise Gaussian affinity: mean of the brightness-average and
/// brightness-difference terms, zero unless `c` and `d` share an edge.
pub fn gaussian_affinity(c: Spel, d: Spel, img: &GrayImage, p: &GaussianAffinityParams) -> f64 {
    if !c.edge_adjacent(d) {
        return 0.0;
    }
    let (u, v) = (img.get(c), img.get(d));
    pair_terms(u, v, p)
}

#[inline]
pub(crate) fn pair_terms(u: f64, v: f64, p: &GaussianAffinityParams) -> f64 {
    let g = 0.5 * (u + v);
    let a = (u - v).abs();
    0.5 * (rho_unchecked(g, p.g_mean, p.g_std.max(EPS_STD))
        + rho_unchecked(a, p.a_mean, p.a_std.max(EPS_STD)))
}

/// Adaptive variant: the first term stays pairwise; the second term compares
/// the mean pair brightness over the union of the windows around `c` and `d`
/// with the seed-window statistics.
pub fn adaptive_gaussian_affinity(
    c: Spel,
    d: Spel,
    img: &GrayImage,
    p: &AdaptiveGaussianParams,
    scale: &ScaleSelection,
) -> f64 {
    if !c.edge_adjacent(d) {
        return 0.0;
    }
    let (w, h) = (img.width(), img.height());
    let union = Window::with_side(c, scale.side)
        .clip(w, h)
        .union(&Window::with_side(d, scale.side).clip(w, h));
    let x = rect_pair_stats(img, union).map(|s| s.mean).unwrap_or(p.window_mean);
    adaptive_terms(img.get(c), img.get(d), x, p)
}

#[inline]
pub(crate) fn adaptive_terms(u: f64, v: f64, window_mean: f64, p: &AdaptiveGaussianParams) -> f64 {
    let g = 0.5 * (u + v);
    0.5 * (rho_unchecked(g, p.base.g_mean, p.base.g_std.max(EPS_STD))
        + rho_unchecked(window_mean, p.window_mean, p.window_std.max(EPS_STD)))
}
