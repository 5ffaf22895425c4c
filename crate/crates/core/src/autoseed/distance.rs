use super::AutoseedError;
use crate::image::PatchGrid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Additive smoothing per bin before the symmetrized KL divergence.
pub const HIST_SMOOTHING: f64 = 1.0 / 256.0;

/// Dense symmetric dissimilarity matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, AutoseedError> {
        if data.len() != n * n {
            return Err(AutoseedError::DegenerateMatrix(format!("{} entries for n = {n}", data.len())));
        }
        Ok(Self { n, data })
    }

    /// Euclidean distances between the given points.
    pub fn euclidean(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = euclidean(&points[i], &points[j]);
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `D_ij = (KL(H_i || H_j) + KL(H_j || H_i)) / 2 + lambda * |c_i - c_j|` over
/// smoothed patch histograms and per-axis normalized patch centers.
pub fn patch_distance_matrix(grid: &PatchGrid, lambda: f64) -> Result<DistanceMatrix, AutoseedError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(AutoseedError::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
    }
    if let Some(p) = grid.patches.iter().find(|p| p.histogram.total() == 0) {
        return Err(AutoseedError::EmptyPatch { index: p.index });
    }
    let n = grid.len();
    let hists: Vec<Vec<f64>> = grid.patches.iter().map(|p| p.histogram.smoothed(HIST_SMOOTHING)).collect();
    let logs: Vec<Vec<f64>> = hists.iter().map(|h| h.iter().map(|v| v.ln()).collect()).collect();
    let centers: Vec<(f64, f64)> = (0..n).map(|i| grid.normalized_center(i)).collect();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        for j in 0..n {
            if i == j {
                continue;
            }
            // KL(p||q) + KL(q||p) = sum (p - q)(ln p - ln q)
            let j_div: f64 = hists[i]
                .iter()
                .zip(&hists[j])
                .zip(logs[i].iter().zip(&logs[j]))
                .map(|((p, q), (lp, lq))| (p - q) * (lp - lq))
                .sum();
            let (dx, dy) = (centers[i].0 - centers[j].0, centers[i].1 - centers[j].1);
            row[j] = 0.5 * j_div.max(0.0) + lambda * (dx * dx + dy * dy).sqrt();
        }
    });
    Ok(DistanceMatrix { n, data })
}
