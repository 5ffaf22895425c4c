//! Multi-object fuzzy segmentation.
//!
//! Each object `m` has seed spels `V_m` and an affinity `psi_m`. The strength of
//! a chain is its weakest link, and a spel belongs to every object whose
//! strongest chain (through spels of that object) reaches it at the highest
//! grade. Grades are kept on a 0.001 grid so the engine can use a bucket array
//! instead of a heap.

mod engine;
mod queue;
mod seeds_file;
mod semiseg;

pub use engine::{segment, segment_image, segment_observed, LinkStrength, LinkTable};
pub use queue::BucketQueue;
pub use seeds_file::{SeedObject, SeedsFile};
pub use semiseg::{Semisegmentation, TieRule};

use crate::image::{ImageError, Spel};
use thiserror::Error;

/// Number of quantized grades above zero.
pub const LEVELS: u16 = 1000;

/// Largest supported object count (memberships are a 64-bit mask).
pub const MAX_OBJECTS: usize = 64;

#[derive(Debug, Error)]
pub enum MofsError {
    #[error("value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("object {object} has no seed spels")]
    EmptySeeds { object: usize },
    #[error("at least one object is required")]
    NoObjects,
    #[error("{count} objects requested, at most {MAX_OBJECTS} are supported")]
    TooManyObjects { count: usize },
    #[error("seed ({x}, {y}) lies outside the {width}x{height} image")]
    SeedOutOfBounds { x: i64, y: i64, width: usize, height: usize },
    #[error("spel ({x}, {y}) is a seed of both object {first} and object {second}")]
    ConflictingSeeds { x: usize, y: usize, first: usize, second: usize },
    #[error("object id {0} does not exist")]
    BadObjectId(usize),
    #[error("spel ({x}, {y}) is not reached by any object")]
    UnsegmentedSpel { x: usize, y: usize },
    #[error("affinity model has {model} objects but {seeds} seed sets were given")]
    ObjectCountMismatch { model: usize, seeds: usize },
    #[error("invalid seeds file: {0}")]
    BadSeedsFile(String),
    #[error("malformed semisegmentation data: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Rounds `v` to three decimals (half-up) and returns the grade in thousandths.
pub fn quantize(v: f64) -> Result<u16, MofsError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(MofsError::OutOfRange(v));
    }
    Ok(quantize_clamped(v))
}

/// [`quantize`] for values already known to be in range; NaN maps to 0.
#[inline]
pub fn quantize_clamped(v: f64) -> u16 {
    // The small offset keeps decimal ties such as 0.9995 rounding up despite
    // their binary representation falling just below.
    let q = (v * 1000.0 + 0.5 + 1e-9).floor();
    if q >= 1000.0 {
        LEVELS
    } else if q > 0.0 {
        q as u16
    } else {
        0
    }
}

/// Grade in thousandths back to `[0, 1]`.
#[inline]
pub fn level_value(level: u16) -> f64 {
    f64::from(level) / 1000.0
}

/// Seed spels per object; `objects[m - 1]` is `V_m`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeedSpec {
    pub objects: Vec<Vec<Spel>>,
}

impl SeedSpec {
    pub fn new(objects: Vec<Vec<Spel>>) -> Self {
        Self { objects }
    }

    /// Dilates every clicked point with its eight neighbors, clipped to the image.
    pub fn from_clicks(clicks: &[Vec<Spel>], width: usize, height: usize) -> Self {
        let objects = clicks
            .iter()
            .map(|pts| {
                let mut set: Vec<Spel> = pts
                    .iter()
                    .flat_map(|p| dilate(*p, width, height))
                    .collect();
                set.sort_by_key(|s| (s.y, s.x));
                set.dedup();
                set
            })
            .collect();
        Self { objects }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Checks bounds, emptiness and cross-object overlap.
    pub fn validate(&self, width: usize, height: usize) -> Result<(), MofsError> {
        if self.objects.is_empty() {
            return Err(MofsError::NoObjects);
        }
        if self.objects.len() > MAX_OBJECTS {
            return Err(MofsError::TooManyObjects { count: self.objects.len() });
        }
        let mut owner = vec![0usize; width * height];
        for (i, set) in self.objects.iter().enumerate() {
            let m = i + 1;
            if set.is_empty() {
                return Err(MofsError::EmptySeeds { object: m });
            }
            for s in set {
                if s.x >= width || s.y >= height {
                    return Err(MofsError::SeedOutOfBounds { x: s.x as i64, y: s.y as i64, width, height });
                }
                let o = &mut owner[s.y * width + s.x];
                if *o != 0 && *o != m {
                    return Err(MofsError::ConflictingSeeds { x: s.x, y: s.y, first: *o, second: m });
                }
                *o = m;
            }
        }
        Ok(())
    }
}

fn dilate(p: Spel, width: usize, height: usize) -> impl Iterator<Item = Spel> {
    let xs = p.x.saturating_sub(1)..=(p.x + 1).min(width.saturating_sub(1));
    let ys = p.y.saturating_sub(1)..=(p.y + 1).min(height.saturating_sub(1));
    ys.flat_map(move |y| xs.clone().map(move |x| Spel::new(x, y)))
        .filter(move |_| p.x < width && p.y < height)
}
