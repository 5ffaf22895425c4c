//! Grayscale images, windows, histograms, patch grids and mosaics.
//!
//! Intensities are stored as `f64` in `[0, 1]`. 8-bit sources are divided by
//! 255 on load and multiplied back (with rounding) on save, so an 8-bit image
//! survives a save/load cycle unchanged.

mod histogram;
mod io;
mod labels;
mod mosaic;
mod patch;
mod window;

pub use histogram::{bin_of, Histogram, BINS};
pub use io::{decode_image, encode_png, load_image, save_png};
pub use labels::{LabelMap, DEFAULT_PALETTE};
pub use mosaic::{compose_mosaic, load_layout, LayoutEntry, TilePlacement};
pub use patch::{make_patch_grid, Patch, PatchGrid};
pub use window::{rect_pair_stats, window_histogram, window_stats, PairStats, PairStatsTable};

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("image has invalid dimensions {width}x{height} for {len} samples")]
    InvalidDimensions { width: usize, height: usize, len: usize },
    #[error("intensity {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("window around ({x}, {y}) covers fewer than two pixels")]
    EmptyWindow { x: usize, y: usize },
    #[error("patch size {patch_px} is invalid for a {width}x{height} image")]
    PatchTooLarge { patch_px: usize, width: usize, height: usize },
    #[error("mosaic layout leaves pixel ({x}, {y}) uncovered")]
    LayoutGap { x: usize, y: usize },
    #[error("mosaic tiles overlap at pixel ({x}, {y})")]
    LayoutOverlap { x: usize, y: usize },
    #[error("invalid mosaic layout: {0}")]
    InvalidLayout(String),
}

/// A spatial element: one pixel, addressed by column `x` and row `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spel {
    pub x: usize,
    pub y: usize,
}

impl Spel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// True when the two spels share an edge (4-neighborhood).
    pub fn edge_adjacent(self, other: Spel) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, s: Spel) -> bool {
        s.x >= self.x0 && s.x < self.x1 && s.y >= self.y0 && s.y < self.y1
    }

    /// Smallest rectangle containing both.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn spels(&self) -> impl Iterator<Item = Spel> + '_ {
        (self.y0..self.y1).flat_map(move |y| (self.x0..self.x1).map(move |x| Spel::new(x, y)))
    }
}

/// Square neighborhood of side `2 * halfwidth + 1` centered on a spel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub center: Spel,
    pub halfwidth: usize,
}

impl Window {
    pub fn new(center: Spel, halfwidth: usize) -> Self {
        Self { center, halfwidth }
    }

    /// Window with the given odd side length.
    pub fn with_side(center: Spel, side: usize) -> Self {
        debug_assert!(side % 2 == 1, "window side must be odd");
        Self { center, halfwidth: side / 2 }
    }

    pub fn side(&self) -> usize {
        2 * self.halfwidth + 1
    }

    /// Intersection of the window with a `width x height` image.
    pub fn clip(&self, width: usize, height: usize) -> Rect {
        let c = self.center;
        Rect {
            x0: c.x.saturating_sub(self.halfwidth),
            y0: c.y.saturating_sub(self.halfwidth),
            x1: (c.x + self.halfwidth + 1).min(width),
            y1: (c.y + self.halfwidth + 1).min(height),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(ImageError::InvalidDimensions { width, height, len: data.len() });
        }
        if let Some((index, &value)) =
            data.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ImageError::ValueOutOfRange { index, value });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("valid constant image")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, data).expect("from_fn produces a valid image")
    }

    /// Builds an image from 8-bit levels, scaling by 1/255.
    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Result<Self, ImageError> {
        Self::new(width, height, levels.iter().map(|&l| f64::from(l) / 255.0).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, s: Spel) -> f64 {
        self.data[self.index(s)]
    }

    pub fn contains(&self, s: Spel) -> bool {
        s.x < self.width && s.y < self.height
    }

    pub fn index(&self, s: Spel) -> usize {
        s.y * self.width + s.x
    }

    pub fn spel(&self, index: usize) -> Spel {
        Spel::new(index % self.width, index / self.width)
    }

    pub fn bounds(&self) -> Rect {
        Rect { x0: 0, y0: 0, x1: self.width, y1: self.height }
    }

    /// 8-bit quantized levels, `round(v * 255)`.
    pub fn levels(&self) -> Vec<u8> {
        self.data.iter().map(|&v| bin_of(v) as u8).collect()
    }

    /// Copies the pixels of `rect` into a new image.
    pub fn crop(&self, rect: Rect) -> GrayImage {
        let mut data = Vec::with_capacity(rect.area());
        for y in rect.y0..rect.y1 {
            data.extend_from_slice(&self.data[y * self.width + rect.x0..y * self.width + rect.x1]);
        }
        GrayImage { width: rect.width(), height: rect.height(), data }
    }
}
