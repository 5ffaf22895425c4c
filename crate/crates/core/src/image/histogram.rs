use serde::{Deserialize, Serialize};

pub const BINS: usize = 256;

/// Histogram bin of an intensity in `[0, 1]`: `round(v * 255)`.
#[inline]
pub fn bin_of(v: f64) -> usize {
    (v * 255.0).round().clamp(0.0, 255.0) as usize
}

/// 256-bin intensity histogram.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    bins: Vec<u32>,
    total: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for Histogram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nonzero: Vec<(usize, u32)> =
            self.bins.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect();
        f.debug_struct("Histogram").field("total", &self.total).field("nonzero", &nonzero).finish()
    }
}

impl Histogram {
    pub fn new() -> Self {
        Self { bins: vec![0; BINS], total: 0 }
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Self::new();
        for v in values {
            h.add(bin_of(v));
        }
        h
    }

    #[inline]
    pub fn add(&mut self, bin: usize) {
        self.bins[bin] += 1;
        self.total += 1;
    }

    #[inline]
    pub fn remove(&mut self, bin: usize) {
        debug_assert!(self.bins[bin] > 0, "removing from an empty bin");
        self.bins[bin] -= 1;
        self.total -= 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn bins(&self) -> &[u32] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, bin: usize) -> u32 {
        self.bins[bin]
    }

    /// Probability vector; all zeros when the histogram is empty.
    pub fn normalized(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; BINS];
        }
        let n = self.total as f64;
        self.bins.iter().map(|&c| f64::from(c) / n).collect()
    }

    /// Normalized histogram mixed with a uniform floor: `(p + eps) / (1 + BINS * eps)`.
    pub fn smoothed(&self, eps: f64) -> Vec<f64> {
        let z = 1.0 + BINS as f64 * eps;
        self.normalized().into_iter().map(|p| (p + eps) / z).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bin_rounds_to_nearest_level() {
        assert_eq!(bin_of(0.0), 0);
        assert_eq!(bin_of(1.0), 255);
        assert_eq!(bin_of(128.0 / 255.0), 128);
        assert_eq!(bin_of(0.5), 128);
    }

    #[test]
    fn empty_histogram_normalizes_to_zeros() {
        assert!(Histogram::new().normalized().iter().all(|&p| p == 0.0));
    }

    proptest! {
        #[test]
        fn totals_and_normalization(values in prop::collection::vec(0.0f64..=1.0, 1..400)) {
            let h = Histogram::from_values(values.iter().copied());
            prop_assert_eq!(h.total(), values.len() as u64);
            prop_assert_eq!(h.bins().iter().map(|&c| u64::from(c)).sum::<u64>(), h.total());
            let s: f64 = h.normalized().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let s: f64 = h.smoothed(1.0 / 256.0).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
