use super::{GrayImage, Histogram, ImageError, Rect};

#[derive(Debug, Clone)]
pub struct Patch {
    pub index: usize,
    pub rect: Rect,
    pub histogram: Histogram,
    /// Mean pixel coordinate `(x, y)` of the patch.
    pub center: (f64, f64),
}

/// Non-overlapping tiling of an image into square patches, row-major.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    pub cols: usize,
    pub rows: usize,
    pub width: usize,
    pub height: usize,
    pub patches: Vec<Patch>,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Patch centers scaled per axis to `[0, 1]` by the image extent.
    pub fn normalized_center(&self, i: usize) -> (f64, f64) {
        let (x, y) = self.patches[i].center;
        let sx = (self.width.max(2) - 1) as f64;
        let sy = (self.height.max(2) - 1) as f64;
        (x / sx, y / sy)
    }
}

/// Splits the image into `ceil(w / p) x ceil(h / p)` patches; the last row and
/// column are truncated when the size does not divide evenly.
pub fn make_patch_grid(img: &GrayImage, patch_px: usize) -> Result<PatchGrid, ImageError> {
    let (w, h) = (img.width(), img.height());
    if patch_px < 2 || patch_px > w.min(h) {
        return Err(ImageError::PatchTooLarge { patch_px, width: w, height: h });
    }
    let cols = w.div_ceil(patch_px);
    let rows = h.div_ceil(patch_px);
    let mut patches = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            let rect = Rect {
                x0: c * patch_px,
                y0: r * patch_px,
                x1: ((c + 1) * patch_px).min(w),
                y1: ((r + 1) * patch_px).min(h),
            };
            let histogram = Histogram::from_values(rect.spels().map(|s| img.get(s)));
            debug_assert_eq!(histogram.total() as usize, rect.area());
            let center = (
                (rect.x0 + rect.x1 - 1) as f64 / 2.0,
                (rect.y0 + rect.y1 - 1) as f64 / 2.0,
            );
            patches.push(Patch { index: patches.len(), rect, histogram, center });
        }
    }
    Ok(PatchGrid { cols, rows, width: w, height: h, patches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn paper_scale_grid_has_4096_patches() {
        let img = GrayImage::filled(1280, 1280, 0.5);
        let g = make_patch_grid(&img, 20).unwrap();
        assert_eq!((g.cols, g.rows, g.len()), (64, 64, 4096));
    }

    #[test]
    fn centers_are_mean_coordinates() {
        let img = GrayImage::filled(40, 20, 0.5);
        let g = make_patch_grid(&img, 20).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.patches[0].center, (9.5, 9.5));
        assert_eq!(g.patches[1].center, (29.5, 9.5));
    }

    #[test]
    fn edge_patches_are_truncated() {
        let img = GrayImage::filled(45, 20, 0.5);
        let g = make_patch_grid(&img, 20).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.patches[2].rect.width(), 5);
        assert_eq!(g.patches[2].histogram.total(), 100);
    }

    #[test]
    fn oversized_patch_is_rejected() {
        let img = GrayImage::filled(30, 10, 0.5);
        assert!(matches!(make_patch_grid(&img, 11), Err(ImageError::PatchTooLarge { .. })));
        assert!(matches!(make_patch_grid(&img, 1), Err(ImageError::PatchTooLarge { .. })));
    }

    proptest! {
        #[test]
        fn patches_tile_the_image(w in 2usize..60, h in 2usize..60, p in 2usize..20) {
            let img = GrayImage::filled(w, h, 0.1);
            prop_assume!(p <= w.min(h));
            let g = make_patch_grid(&img, p).unwrap();
            let mut hits = vec![0u8; w * h];
            for patch in &g.patches {
                for s in patch.rect.spels() {
                    hits[s.y * w + s.x] += 1;
                }
            }
            prop_assert!(hits.iter().all(|&c| c == 1));
            let total: u64 = g.patches.iter().map(|p| p.histogram.total()).sum();
            prop_assert_eq!(total as usize, w * h);
        }
    }
}
