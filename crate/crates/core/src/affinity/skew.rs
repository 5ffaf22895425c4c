use super::divergence::{skew_divergence, skew_term};
use super::{AffinityError, ScaleSelection, EPS_DIV};
use crate::image::{bin_of, window_histogram, GrayImage, Histogram, Spel, Window, BINS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Seed texture model for the skew-divergence affinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewAffinityParams {
    /// Histogram pooled over every seed window at the selected scale.
    #[serde(skip)]
    pub seed_histogram: Histogram,
    /// `seed_histogram`, normalized.
    #[serde(skip)]
    pub seed_distribution: Vec<f64>,
    pub alpha: f64,
    /// Divergence that maps to affinity `e^-1`.
    pub div_scale: f64,
}

/// Pools the seed windows into one model and calibrates `div_scale` to the
/// mean divergence of the individual seed windows from it.
pub fn fit_skew_params(
    img: &GrayImage,
    seeds: &[Spel],
    scale: &ScaleSelection,
    alpha: f64,
) -> Result<SkewAffinityParams, AffinityError> {
    if seeds.is_empty() {
        return Err(AffinityError::NoSeeds);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AffinityError::InvalidAlpha(alpha));
    }
    let windows: Vec<Histogram> =
        seeds.iter().map(|&s| window_histogram(img, Window::with_side(s, scale.side))).collect();
    let mut pooled = Histogram::new();
    for h in &windows {
        pooled.merge(h);
    }
    let q = pooled.normalized();
    let mut sum = 0.0;
    for h in &windows {
        sum += skew_divergence(&q, &h.normalized(), alpha)?;
    }
    let div_scale = (sum / windows.len() as f64).max(EPS_DIV);
    Ok(SkewAffinityParams { seed_histogram: pooled, seed_distribution: q, alpha, div_scale })
}

/// `exp(-s / div_scale)` where `s` averages the divergences of the windows
/// around `c` and `d` from the seed model; zero unless `c` and `d` share an edge.
pub fn skew_affinity(
    c: Spel,
    d: Spel,
    img: &GrayImage,
    p: &SkewAffinityParams,
    scale: &ScaleSelection,
) -> f64 {
    if !c.edge_adjacent(d) {
        return 0.0;
    }
    let div = |s: Spel| {
        let h = window_histogram(img, Window::with_side(s, scale.side)).normalized();
        skew_divergence(&p.seed_distribution, &h, p.alpha).expect("alpha validated at fit time")
    };
    skew_link(div(c), div(d), p.div_scale)
}

#[inline]
pub(crate) fn skew_link(dc: f64, dd: f64, div_scale: f64) -> f64 {
    (-(0.5 * (dc + dd)) / div_scale).exp()
}

/// Divergence of every spel's window from the seed model, row-major.
///
/// Uses a sliding histogram per row. Full-size windows look their summands up
/// in a `(bin, count)` table; clipped border windows are summed directly.
pub(crate) fn divergence_field(img: &GrayImage, side: usize, q: &[f64], alpha: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let hw = side / 2;
    let levels: Vec<u8> = img.data().iter().map(|&v| bin_of(v) as u8).collect();
    let full = side * side;
    let mut table = vec![0.0; BINS * (full + 1)];
    for (y, row) in table.chunks_mut(full + 1).enumerate() {
        for (c, t) in row.iter_mut().enumerate() {
            *t = skew_term(q[y], c as f64 / full as f64, alpha);
        }
    }

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row_out)| {
        let y0 = y.saturating_sub(hw);
        let y1 = (y + hw + 1).min(h);
        let mut counts = [0u32; BINS];
        let mut n = 0usize;
        let add_col = |counts: &mut [u32; BINS], x: usize, sign: bool| {
            for yy in y0..y1 {
                let b = levels[yy * w + x] as usize;
                if sign {
                    counts[b] += 1;
                } else {
                    counts[b] -= 1;
                }
            }
        };
        for x in 0..(hw + 1).min(w) {
            add_col(&mut counts, x, true);
            n += y1 - y0;
        }
        for (x, slot) in row_out.iter_mut().enumerate() {
            let mut sum = 0.0;
            if n == full {
                for (b, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        sum += table[b * (full + 1) + c as usize];
                    }
                }
            } else {
                let nf = n as f64;
                for (b, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        sum += skew_term(q[b], f64::from(c) / nf, alpha);
                    }
                }
            }
            *slot = sum.max(0.0);
            if x >= hw {
                add_col(&mut counts, x - hw, false);
                n -= y1 - y0;
            }
            if x + hw + 1 < w {
                add_col(&mut counts, x + hw + 1, true);
                n += y1 - y0;
            }
        }
    });
    out
}
