use super::{load_image, GrayImage, ImageError, LabelMap};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Where a tile goes on the canvas. `scale` resamples the tile with
/// nearest-neighbor interpolation before placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TilePlacement {
    pub x: usize,
    pub y: usize,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl TilePlacement {
    pub fn at(x: usize, y: usize) -> Self {
        Self { x, y, scale: 1.0 }
    }

    fn extent(&self, tile: &GrayImage) -> (usize, usize) {
        (
            (tile.width() as f64 * self.scale).round() as usize,
            (tile.height() as f64 * self.scale).round() as usize,
        )
    }
}

/// One entry of a JSON mosaic layout file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LayoutEntry {
    pub tile_path: PathBuf,
    pub x: usize,
    pub y: usize,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

/// Reads a layout file; relative tile paths resolve against the layout's directory.
pub fn load_layout(
    path: impl AsRef<Path>,
) -> Result<(Vec<GrayImage>, Vec<TilePlacement>), ImageError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ImageError::Io { path: path.to_path_buf(), source })?;
    let entries: Vec<LayoutEntry> =
        serde_json::from_str(&text).map_err(|e| ImageError::InvalidLayout(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut tiles = Vec::with_capacity(entries.len());
    let mut placements = Vec::with_capacity(entries.len());
    for e in entries {
        let tile_path =
            if e.tile_path.is_absolute() { e.tile_path.clone() } else { base.join(&e.tile_path) };
        tiles.push(load_image(tile_path)?);
        placements.push(TilePlacement { x: e.x, y: e.y, scale: e.scale });
    }
    Ok((tiles, placements))
}

/// Pastes tiles onto a canvas sized to their bounding box. Tile `i` gets
/// ground-truth label `i + 1`. Every canvas pixel must be covered exactly once.
pub fn compose_mosaic(
    tiles: &[GrayImage],
    placements: &[TilePlacement],
) -> Result<(GrayImage, LabelMap), ImageError> {
    if tiles.is_empty() || tiles.len() != placements.len() {
        return Err(ImageError::InvalidLayout(format!(
            "{} tiles for {} placements",
            tiles.len(),
            placements.len()
        )));
    }
    if tiles.len() > 255 {
        return Err(ImageError::InvalidLayout("at most 255 tiles".into()));
    }
    let mut width = 0;
    let mut height = 0;
    for (tile, p) in tiles.iter().zip(placements) {
        if !(p.scale.is_finite() && p.scale > 0.0) {
            return Err(ImageError::InvalidLayout(format!("bad scale {}", p.scale)));
        }
        let (w, h) = p.extent(tile);
        if w == 0 || h == 0 {
            return Err(ImageError::InvalidLayout("tile scaled to zero size".into()));
        }
        width = width.max(p.x + w);
        height = height.max(p.y + h);
    }

    let mut data = vec![0.0; width * height];
    let mut labels = vec![0u8; width * height];
    for (i, (tile, p)) in tiles.iter().zip(placements).enumerate() {
        let (w, h) = p.extent(tile);
        for ty in 0..h {
            let sy = ((ty as f64 / p.scale) as usize).min(tile.height() - 1);
            for tx in 0..w {
                let sx = ((tx as f64 / p.scale) as usize).min(tile.width() - 1);
                let (x, y) = (p.x + tx, p.y + ty);
                let k = y * width + x;
                if labels[k] != 0 {
                    return Err(ImageError::LayoutOverlap { x, y });
                }
                labels[k] = (i + 1) as u8;
                data[k] = tile.data()[sy * tile.width() + sx];
            }
        }
    }
    if let Some(k) = labels.iter().position(|&l| l == 0) {
        return Err(ImageError::LayoutGap { x: k % width, y: k / width });
    }
    Ok((GrayImage::new(width, height, data)?, LabelMap::new(width, height, labels)?))
}
