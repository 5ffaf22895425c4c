use super::{AutoseedError, DistanceMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Above this many points the top eigenpairs come from block power iteration
/// instead of a full decomposition.
const FULL_EIGEN_LIMIT: usize = 1024;

/// Points in `dim`-dimensional space, one per row of the distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

/// Classical (Torgerson) multidimensional scaling.
///
/// Double-centers `-D.^2 / 2`, keeps the `dim` largest eigenpairs (negative
/// eigenvalues clamped to zero) and scales eigenvectors by the root of their
/// eigenvalue. Each axis is flipped so its largest-magnitude coordinate is
/// positive.
pub fn mds_embed(d: &DistanceMatrix, dim: usize) -> Result<Embedding, AutoseedError> {
    let n = d.len();
    if dim == 0 || n < dim + 1 {
        return Err(AutoseedError::TooFewPoints { points: n, dim });
    }
    if let Some(v) = d.data().iter().find(|v| !v.is_finite()) {
        return Err(AutoseedError::DegenerateMatrix(format!("non-finite distance {v}")));
    }
    let b = double_centered(d);
    let (values, vectors) = if n <= FULL_EIGEN_LIMIT { full_top(b, dim) } else { block_power_top(&b, dim) };
    let mut points = vec![vec![0.0; dim]; n];
    for (axis, (lambda, v)) in values.iter().zip(&vectors).enumerate() {
        let scale = lambda.max(0.0).sqrt();
        let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (p, &x) in points.iter_mut().zip(v) {
            p[axis] = sign * scale * x;
        }
    }
    Ok(Embedding { dim, points })
}

fn double_centered(d: &DistanceMatrix) -> DMatrix<f64> {
    let n = d.len();
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let col_means: Vec<f64> = (0..n).map(|j| sq.column(j).mean()).collect();
    let total = sq.mean();
    DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - col_means[j] + total))
}

fn full_top(b: DMatrix<f64>, dim: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    order
        .into_iter()
        .take(dim)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .unzip()
}

/// Orthogonal iteration with Rayleigh-Ritz extraction on a block a few
/// columns wider than `dim`.
fn block_power_top(b: &DMatrix<f64>, dim: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = b.nrows();
    let p = (dim + 6).min(n);
    // deterministic, well-spread start block
    let mut q = DMatrix::from_fn(n, p, |i, j| (((i + 1) * (j + 3)) as f64 * 0.618_033_988_75).fract() - 0.5);
    q = q.qr().q();
    let mut last = vec![f64::INFINITY; dim];
    let mut values = Vec::new();
    let mut vectors = DMatrix::zeros(n, p);
    for _ in 0..3000 {
        let y = par_mul(b, &q);
        q = y.qr().q();
        let t = q.transpose() * par_mul(b, &q);
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let rot = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        vectors = &q * rot;
        let converged = (0..dim).all(|i| (values[i] - last[i]).abs() <= 1e-12 * values[0].abs().max(1e-300));
        last = values[..dim].to_vec();
        if converged {
            break;
        }
    }
    let vecs = (0..dim).map(|c| vectors.column(c).iter().copied().collect()).collect();
    (values[..dim].to_vec(), vecs)
}

fn par_mul(b: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = (b.nrows(), q.ncols());
    let cols: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|c| {
            let v = q.column(c);
            (0..n).map(|r| b.row(r).iter().zip(v.iter()).map(|(a, x)| a * x).sum()).collect()
        })
        .collect();
    DMatrix::from_fn(n, p, |r, c| cols[c][r])
}

/// Kruskal stress-1 of an embedding against `d`.
pub fn stress(d: &DistanceMatrix, e: &Embedding) -> f64 {
    let n = d.len();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let diff = d.get(i, j) - super::distance::euclidean(&e.points[i], &e.points[j]);
            num += diff * diff;
            den += d.get(i, j).powi(2);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_iteration_agrees_with_full_decomposition() {
        let points: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.37).sin() * 5.0, (t * 0.11).cos() * 3.0, (t * 0.07).sin(), (t * 0.53).cos() * 0.2]
            })
            .collect();
        let d = DistanceMatrix::euclidean(&points);
        let b = double_centered(&d);
        let (fv, _) = full_top(b.clone(), 3);
        let (pv, pvec) = block_power_top(&b, 3);
        for i in 0..3 {
            assert!((fv[i] - pv[i]).abs() < 1e-8 * fv[0], "{fv:?} vs {pv:?}");
            let bv = &b * DMatrix::from_column_slice(60, 1, &pvec[i]);
            let resid: f64 = (0..60).map(|r| (bv[(r, 0)] - pv[i] * pvec[i][r]).powi(2)).sum::<f64>().sqrt();
            assert!(resid < 1e-6 * fv[0]);
        }
    }
}
