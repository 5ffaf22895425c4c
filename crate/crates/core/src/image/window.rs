use super::{bin_of, GrayImage, Histogram, ImageError, Rect, Window};
use serde::{Deserialize, Serialize};

/// Mean and population standard deviation of the average brightness of all
/// edge-adjacent pixel pairs inside a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub mean: f64,
    pub std: f64,
    pub pairs: usize,
}

/// Pair statistics of the window clipped to the image.
pub fn window_stats(img: &GrayImage, w: Window) -> Result<PairStats, ImageError> {
    let rect = w.clip(img.width(), img.height());
    rect_pair_stats(img, rect)
        .ok_or(ImageError::EmptyWindow { x: w.center.x, y: w.center.y })
}

/// Pair statistics over a rectangle by direct enumeration. `None` when the
/// rectangle holds no edge-adjacent pair.
pub fn rect_pair_stats(img: &GrayImage, rect: Rect) -> Option<PairStats> {
    let mut avgs = Vec::with_capacity(2 * rect.area());
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let v = img.data()[y * img.width() + x];
            if x + 1 < rect.x1 {
                avgs.push(0.5 * (v + img.data()[y * img.width() + x + 1]));
            }
            if y + 1 < rect.y1 {
                avgs.push(0.5 * (v + img.data()[(y + 1) * img.width() + x]));
            }
        }
    }
    if avgs.is_empty() {
        return None;
    }
    let n = avgs.len() as f64;
    let mean = avgs.iter().sum::<f64>() / n;
    let var = avgs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    Some(PairStats { mean, std: var.sqrt(), pairs: avgs.len() })
}

/// 256-bin histogram of the window clipped to the image.
pub fn window_histogram(img: &GrayImage, w: Window) -> Histogram {
    let rect = w.clip(img.width(), img.height());
    let mut h = Histogram::new();
    for y in rect.y0..rect.y1 {
        for &v in &img.data()[y * img.width() + rect.x0..y * img.width() + rect.x1] {
            h.add(bin_of(v));
        }
    }
    h
}

/// Summed-area table over a `w x h` grid of values.
#[derive(Debug, Clone)]
struct Integral {
    stride: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn build(w: usize, h: usize, value: impl Fn(usize, usize) -> f64) -> Self {
        let stride = w + 1;
        let mut sums = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += value(x, y);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    /// Sum over `[x0, x1) x [y0, y1)`; empty ranges sum to zero.
    #[inline]
    fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let s = self.stride;
        self.sums[y1 * s + x1] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
            + self.sums[y0 * s + x0]
    }
}

/// Constant-time pair statistics over arbitrary rectangles.
#[derive(Debug, Clone)]
pub struct PairStatsTable {
    horiz: Integral,
    horiz_sq: Integral,
    vert: Integral,
    vert_sq: Integral,
}

impl PairStatsTable {
    pub fn new(img: &GrayImage) -> Self {
        let (w, h, d) = (img.width(), img.height(), img.data());
        let hv = |x: usize, y: usize| 0.5 * (d[y * w + x] + d[y * w + x + 1]);
        let vv = |x: usize, y: usize| 0.5 * (d[y * w + x] + d[(y + 1) * w + x]);
        let hw = w.saturating_sub(1);
        let vh = h.saturating_sub(1);
        Self {
            horiz: Integral::build(hw, h, hv),
            horiz_sq: Integral::build(hw, h, |x, y| hv(x, y).powi(2)),
            vert: Integral::build(w, vh, vv),
            vert_sq: Integral::build(w, vh, |x, y| vv(x, y).powi(2)),
        }
    }

    pub fn rect_stats(&self, r: Rect) -> Option<PairStats> {
        let hx1 = r.x1.saturating_sub(1).max(r.x0);
        let vy1 = r.y1.saturating_sub(1).max(r.y0);
        let n_h = (hx1 - r.x0) * r.height();
        let n_v = r.width() * (vy1 - r.y0);
        let n = n_h + n_v;
        if n == 0 {
            return None;
        }
        let s = self.horiz.sum(r.x0, r.y0, hx1, r.y1) + self.vert.sum(r.x0, r.y0, r.x1, vy1);
        let sq =
            self.horiz_sq.sum(r.x0, r.y0, hx1, r.y1) + self.vert_sq.sum(r.x0, r.y0, r.x1, vy1);
        let mean = s / n as f64;
        let var = (sq / n as f64 - mean * mean).max(0.0);
        Some(PairStats { mean, std: var.sqrt(), pairs: n })
    }

    /// Mean pair average over a rectangle.
    #[inline]
    pub fn rect_mean(&self, r: Rect) -> Option<f64> {
        self.rect_stats(r).map(|s| s.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Spel;
    use proptest::prelude::*;

    fn checker3() -> GrayImage {
        GrayImage::from_fn(3, 3, |x, y| ((x + y) % 2) as f64)
    }

    #[test]
    fn constant_image_has_zero_spread() {
        let img = GrayImage::filled(9, 9, 0.5);
        let s = window_stats(&img, Window::new(Spel::new(4, 4), 2)).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn single_pair_window() {
        let img = GrayImage::new(2, 1, vec![0.0, 1.0]).unwrap();
        let s = window_stats(&img, Window::new(Spel::new(0, 0), 1)).unwrap();
        assert_eq!(s.pairs, 1);
        assert_eq!((s.mean, s.std), (0.5, 0.0));
    }

    #[test]
    fn checkerboard_pairs_enumerated_by_hand() {
        // 6 horizontal + 6 vertical pairs, each joins a 0 and a 1
        let s = window_stats(&checker3(), Window::new(Spel::new(1, 1), 1)).unwrap();
        assert_eq!(s.pairs, 12);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn single_pixel_image_is_empty_window() {
        let img = GrayImage::filled(1, 1, 0.3);
        assert!(matches!(
            window_stats(&img, Window::new(Spel::new(0, 0), 1)),
            Err(ImageError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn histogram_totals() {
        let img = GrayImage::filled(20, 20, 0.25);
        let h = window_histogram(&img, Window::new(Spel::new(10, 10), 5));
        assert_eq!(h.total(), 121);
        assert_eq!(h.bins().iter().filter(|&&c| c > 0).count(), 1);
        let corner = window_histogram(&img, Window::new(Spel::new(0, 0), 1));
        assert_eq!(corner.total(), 4);
    }

    proptest! {
        #[test]
        fn table_matches_enumeration(
            w in 1usize..9, h in 1usize..9,
            seed in prop::collection::vec(0.0f64..=1.0, 81),
            a in 0usize..9, b in 0usize..9, c in 0usize..9, d in 0usize..9,
        ) {
            let img = GrayImage::new(w, h, seed[..w * h].to_vec()).unwrap();
            let (x0, x1) = (a.min(c) % w, (a.max(c) % w) + 1);
            let (y0, y1) = (b.min(d) % h, (b.max(d) % h) + 1);
            let r = Rect { x0: x0.min(x1 - 1), y0: y0.min(y1 - 1), x1, y1 };
            let table = PairStatsTable::new(&img);
            match (rect_pair_stats(&img, r), table.rect_stats(r)) {
                (None, None) => {}
                (Some(e), Some(t)) => {
                    prop_assert_eq!(e.pairs, t.pairs);
                    prop_assert!((e.mean - t.mean).abs() < 1e-12);
                    prop_assert!((e.std - t.std).abs() < 1e-6);
                }
                (e, t) => prop_assert!(false, "mismatch {:?} vs {:?}", e, t),
            }
        }

        #[test]
        fn histogram_total_is_clipped_area(
            w in 1usize..30, h in 1usize..30, x in 0usize..30, y in 0usize..30, hw in 1usize..8,
        ) {
            let img = GrayImage::filled(w, h, 0.7);
            let win = Window::new(Spel::new(x % w, y % h), hw);
            let rect = win.clip(w, h);
            prop_assert_eq!(window_histogram(&img, win).total(), rect.area() as u64);
        }

        #[test]
        fn stats_are_translation_invariant(
            vals in prop::collection::vec(0.0f64..=1.0, 49), dx in 0usize..5, dy in 0usize..5,
        ) {
            let base = GrayImage::new(7, 7, vals.clone()).unwrap();
            let shifted = GrayImage::from_fn(7 + dx + 3, 7 + dy + 3, |x, y| {
                if x >= dx && y >= dy && x - dx < 7 && y - dy < 7 { vals[(y - dy) * 7 + x - dx] } else { 0.9 }
            });
            let a = window_stats(&base, Window::new(Spel::new(3, 3), 2)).unwrap();
            let b = window_stats(&shifted, Window::new(Spel::new(3 + dx, 3 + dy), 2)).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-15);
            prop_assert!((a.std - b.std).abs() < 1e-15);
        }
    }
}
