//! Synthetic textures and mosaics used as stand-ins for photographic texture
//! albums. Every generator is deterministic in its seed and produces values
//! on the 8-bit grid, so images survive a PNG round trip unchanged.

use crate::image::{compose_mosaic, GrayImage, LabelMap, Spel, TilePlacement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn quantize8(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

/// I.i.d. Gaussian noise with the given mean and standard deviation.
pub fn noise(width: usize, height: usize, mean: f64, std: f64, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(mean, std.max(0.0)).expect("finite noise parameters");
    GrayImage::from_fn(width, height, |_, _| quantize8(n.sample(&mut rng)))
}

/// Checkerboard whose pattern repeats every `period` pixels (cells of
/// `period / 2` pixels).
pub fn checkerboard(width: usize, height: usize, period: usize, lo: f64, hi: f64) -> GrayImage {
    let cell = (period / 2).max(1);
    GrayImage::from_fn(width, height, |x, y| {
        quantize8(if (x / cell + y / cell) % 2 == 0 { lo } else { hi })
    })
}

/// [`checkerboard`] plus Gaussian noise of standard deviation `amp`.
pub fn noisy_checkerboard(
    width: usize,
    height: usize,
    period: usize,
    lo: f64,
    hi: f64,
    amp: f64,
    seed: u64,
) -> GrayImage {
    let base = checkerboard(width, height, period, lo, hi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, amp.max(0.0)).expect("finite noise amplitude");
    GrayImage::from_fn(width, height, |x, y| {
        quantize8(base.get(Spel::new(x, y)) + n.sample(&mut rng))
    })
}

/// Stripes of `period` pixels (half bright, half dark), vertical when
/// `vertical` is set, plus Gaussian noise.
#[allow(clippy::too_many_arguments)]
pub fn noisy_stripes(
    width: usize,
    height: usize,
    period: usize,
    lo: f64,
    hi: f64,
    vertical: bool,
    amp: f64,
    seed: u64,
) -> GrayImage {
    let half = (period / 2).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, amp.max(0.0)).expect("finite noise amplitude");
    GrayImage::from_fn(width, height, |x, y| {
        let t = if vertical { x } else { y };
        let base = if (t / half) % 2 == 0 { lo } else { hi };
        quantize8(base + n.sample(&mut rng))
    })
}

/// Sparse bright dots on a darker noisy background.
pub fn speckle(width: usize, height: usize, density: f64, bg: f64, fg: f64, amp: f64, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, amp.max(0.0)).expect("finite noise amplitude");
    GrayImage::from_fn(width, height, |_, _| {
        let base = if rng.random::<f64>() < density { fg } else { bg };
        quantize8(base + n.sample(&mut rng))
    })
}

/// A textured image together with its ground truth and suggested clicks per object.
#[derive(Debug, Clone)]
pub struct SyntheticMosaic {
    pub image: GrayImage,
    pub ground_truth: LabelMap,
    /// Clicked points per object (`clicks[m - 1]` for object `m`).
    pub clicks: Vec<Vec<(usize, usize)>>,
}

/// Smooth periodic texture `cos(2 pi x / period) * cos(2 pi y / period)` mapped
/// onto `[lo, hi]`, plus Gaussian noise of standard deviation `amp`.
///
/// At period 2 it samples only the extremes and becomes a checkerboard; longer
/// periods sample the intermediate levels as well.
pub fn noisy_cosine_grid(
    width: usize,
    height: usize,
    period: usize,
    lo: f64,
    hi: f64,
    amp: f64,
    seed: u64,
) -> GrayImage {
    let period = period.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, amp.max(0.0)).expect("finite noise amplitude");
    let tau = std::f64::consts::TAU;
    GrayImage::from_fn(width, height, |x, y| {
        let u = (x % period) as f64 / period as f64;
        let v = (y % period) as f64 / period as f64;
        let base = 0.5 * (lo + hi) + 0.5 * (hi - lo) * (tau * u).cos() * (tau * v).cos();
        quantize8(base + n.sample(&mut rng))
    })
}

/// Square mosaic of one texture at two scales: the left half holds a noisy
/// [`noisy_cosine_grid`] of period 2, the right half the same texture at
/// period 8. Two clicks per object.
pub fn two_scale_mosaic(size: usize, seed: u64) -> SyntheticMosaic {
    let half = size / 2;
    let fine = noisy_cosine_grid(half, size, 2, 0.3, 0.7, 0.02, seed);
    let coarse = noisy_cosine_grid(size - half, size, 8, 0.3, 0.7, 0.02, seed ^ 0x5eed);
    let (image, ground_truth) =
        compose_mosaic(&[fine, coarse], &[TilePlacement::at(0, 0), TilePlacement::at(half, 0)])
            .expect("two-scale layout tiles the canvas");
    let q = size / 4;
    SyntheticMosaic {
        image,
        ground_truth,
        clicks: vec![vec![(q, q), (q, 3 * q)], vec![(half + q, q), (half + q, 3 * q)]],
    }
}

/// Five noisy textures with distinct gray-level distributions, in the
/// order used by [`five_texture_mosaic`].
pub fn five_textures(seed: u64) -> [GrayImage; 5] {
    [
        noise(200, 120, 0.15, 0.05, seed),
        noisy_stripes(120, 200, 6, 0.27, 0.43, true, 0.03, seed + 1),
        noisy_cosine_grid(200, 120, 8, 0.45, 0.65, 0.02, seed + 2),
        speckle(120, 200, 0.25, 0.68, 0.82, 0.02, seed + 3),
        noisy_checkerboard(80, 80, 4, 0.82, 0.96, 0.02, seed + 4),
    ]
}

/// 320x320 pinwheel of five textures: four 200x120 / 120x200 arms around an
/// 80x80 center square.
pub fn five_texture_mosaic(seed: u64) -> SyntheticMosaic {
    let places = [
        TilePlacement::at(0, 0),
        TilePlacement::at(200, 0),
        TilePlacement::at(120, 200),
        TilePlacement::at(0, 120),
        TilePlacement::at(120, 120),
    ];
    let (image, ground_truth) = compose_mosaic(&five_textures(seed), &places).expect("pinwheel tiles the canvas");
    let clicks = vec![
        vec![(60, 40), (140, 80)],
        vec![(260, 60), (260, 140)],
        vec![(180, 280), (260, 260)],
        vec![(40, 180), (60, 280)],
        vec![(150, 150), (170, 170)],
    ];
    SyntheticMosaic { image, ground_truth, clicks }
}

/// 256x128 image: noise on the left, vertical stripes on the right.
pub fn two_texture_mosaic(seed: u64) -> SyntheticMosaic {
    let left = noise(128, 128, 0.3, 0.05, seed);
    let right = noisy_stripes(128, 128, 6, 0.55, 0.8, true, 0.03, seed + 1);
    let (image, ground_truth) =
        compose_mosaic(&[left, right], &[TilePlacement::at(0, 0), TilePlacement::at(128, 0)]).expect("two halves");
    SyntheticMosaic { image, ground_truth, clicks: vec![vec![(40, 40), (60, 90)], vec![(190, 40), (210, 90)]] }
}
