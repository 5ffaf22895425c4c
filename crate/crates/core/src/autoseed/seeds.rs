use super::AutoseedError;
use crate::image::{PatchGrid, Spel};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub const MAX_ATTEMPTS: usize = 100;

/// Mean patch center of every class, in image coordinates.
pub fn class_centroids(grid: &PatchGrid, labels: &[usize], k: usize) -> Result<Vec<(f64, f64)>, AutoseedError> {
    let mut sums = vec![(0.0, 0.0); k];
    let mut counts = vec![0usize; k];
    for (p, &l) in grid.patches.iter().zip(labels) {
        if l >= k {
            return Err(AutoseedError::BadK { k, n: grid.len() });
        }
        sums[l].0 += p.center.0;
        sums[l].1 += p.center.1;
        counts[l] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(c, (s, n))| {
            if n == 0 {
                Err(AutoseedError::EmptyClass { class: c + 1 })
            } else {
                Ok((s.0 / n as f64, s.1 / n as f64))
            }
        })
        .collect()
}

/// Draws `per_class` points around every centroid from `N(mu, std^2 I)`,
/// rounded and clamped to the image.
///
/// A draw is redrawn when it repeats a point of its own class or when its
/// 3x3 neighborhood would touch another class's. With `std == 0` every
/// point of a class is the rounded centroid and repeats are kept.
pub fn sample_seeds(
    centroids: &[(f64, f64)],
    per_class: usize,
    width: usize,
    height: usize,
    std: f64,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<Spel>>, AutoseedError> {
    if width == 0 || height == 0 {
        return Err(AutoseedError::InvalidConfig("empty image".into()));
    }
    if !(std >= 0.0 && std.is_finite()) {
        return Err(AutoseedError::InvalidConfig(format!("seed std must be >= 0, got {std}")));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let place = |x: f64, max: usize| x.round().clamp(0.0, (max - 1) as f64) as usize;
    let mut out: Vec<Vec<Spel>> = Vec::with_capacity(centroids.len());
    for (c, &(mx, my)) in centroids.iter().enumerate() {
        let mut pts: Vec<Spel> = Vec::with_capacity(per_class);
        while pts.len() < per_class {
            let mut accepted = None;
            for _ in 0..MAX_ATTEMPTS {
                let x = mx + std * normal.sample(rng);
                let y = my + std * normal.sample(rng);
                let s = Spel::new(place(x, width), place(y, height));
                let repeats = std > 0.0 && pts.contains(&s);
                let touches = out.iter().flatten().any(|o| o.x.abs_diff(s.x) <= 2 && o.y.abs_diff(s.y) <= 2);
                if !repeats && !touches {
                    accepted = Some(s);
                    break;
                }
            }
            pts.push(accepted.ok_or(AutoseedError::SamplingExhausted { class: c + 1 })?);
        }
        out.push(pts);
    }
    Ok(out)
}
