use super::EvalError;
use crate::image::LabelMap;
use serde::{Deserialize, Serialize};

fn check_dims(a: &LabelMap, b: &LabelMap) -> Result<(), EvalError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(EvalError::DimensionMismatch {
            left: (a.width(), a.height()),
            right: (b.width(), b.height()),
        });
    }
    Ok(())
}

/// Dice coefficient of two pixel masks; 1 when both are empty.
pub fn dice(a: &[bool], b: &[bool]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::DimensionMismatch { left: (a.len(), 1), right: (b.len(), 1) });
    }
    let (mut na, mut nb, mut both) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        na += usize::from(x);
        nb += usize::from(y);
        both += usize::from(x && y);
    }
    Ok(if na + nb == 0 { 1.0 } else { 2.0 * both as f64 / (na + nb) as f64 })
}

/// Dice of label `m` in `pred` against label `m` in `gt`.
pub fn label_dice(pred: &LabelMap, gt: &LabelMap, m: u8) -> Result<f64, EvalError> {
    check_dims(pred, gt)?;
    let a: Vec<bool> = pred.labels().iter().map(|&l| l == m).collect();
    let b: Vec<bool> = gt.labels().iter().map(|&l| l == m).collect();
    dice(&a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScore {
    pub label: u8,
    pub pixels: usize,
    pub weight: f64,
    pub dice: f64,
}

/// Per-object Dice over the ground-truth objects (labels > 0), weighted by
/// ground-truth object size. Prediction label 0 is in no object.
pub fn weighted_dice(pred: &LabelMap, gt: &LabelMap) -> Result<(f64, Vec<ObjectScore>), EvalError> {
    check_dims(pred, gt)?;
    let mut gt_count = [0usize; 256];
    let mut pred_count = [0usize; 256];
    let mut both = [0usize; 256];
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        gt_count[g as usize] += 1;
        pred_count[p as usize] += 1;
        if p == g {
            both[g as usize] += 1;
        }
    }
    let total: usize = gt_count[1..].iter().sum();
    let mut scores = Vec::new();
    let mut sum = 0.0;
    for m in 1..256 {
        if gt_count[m] == 0 {
            continue;
        }
        let d = 2.0 * both[m] as f64 / (gt_count[m] + pred_count[m]) as f64;
        let weight = gt_count[m] as f64 / total as f64;
        sum += weight * d;
        scores.push(ObjectScore { label: m as u8, pixels: gt_count[m], weight, dice: d });
    }
    Ok((if total == 0 { 1.0 } else { sum }, scores))
}

/// Correspondence from predicted labels to ground-truth labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMatch {
    /// `(predicted, ground truth)` for every predicted label > 0.
    pub pairs: Vec<(u8, u8)>,
    /// True when the assignment maximizes total overlap; false when the
    /// greedy fallback was used for many labels.
    pub exact: bool,
}

impl LabelMatch {
    pub fn table(&self) -> [u8; 256] {
        let mut t = [0u8; 256];
        for &(p, g) in &self.pairs {
            t[p as usize] = g;
        }
        t
    }

    pub fn apply(&self, pred: &LabelMap) -> LabelMap {
        pred.relabeled(&self.table())
    }
}

const EXACT_LIMIT: usize = 12;

/// Assigns predicted labels to ground-truth labels maximizing total overlap.
///
/// Exact for up to 12 labels on either side, greedy by largest overlap
/// beyond. Predicted labels left without a partner get fresh ids above every
/// ground-truth label, so they stay wrong for every object.
pub fn match_labels(pred: &LabelMap, gt: &LabelMap) -> Result<LabelMatch, EvalError> {
    check_dims(pred, gt)?;
    let p_labels: Vec<u8> = pred.objects();
    let g_labels: Vec<u8> = gt.objects();
    let mut overlap = vec![vec![0usize; g_labels.len()]; p_labels.len()];
    let mut p_index = [usize::MAX; 256];
    let mut g_index = [usize::MAX; 256];
    for (i, &l) in p_labels.iter().enumerate() {
        p_index[l as usize] = i;
    }
    for (i, &l) in g_labels.iter().enumerate() {
        g_index[l as usize] = i;
    }
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        let (pi, gi) = (p_index[p as usize], g_index[g as usize]);
        if pi != usize::MAX && gi != usize::MAX {
            overlap[pi][gi] += 1;
        }
    }
    let exact = p_labels.len() <= EXACT_LIMIT || g_labels.len() <= EXACT_LIMIT;
    let assignment = if exact { best_assignment(&overlap, g_labels.len()) } else { greedy_assignment(&overlap) };
    let mut next = g_labels.last().copied().unwrap_or(0);
    let pairs = p_labels
        .iter()
        .zip(assignment)
        .map(|(&p, a)| match a {
            Some(gi) => (p, g_labels[gi]),
            None => {
                next = next.saturating_add(1);
                (p, next)
            }
        })
        .collect();
    Ok(LabelMatch { pairs, exact })
}

/// Maximum-weight matching by dynamic programming over subsets of the
/// smaller side.
fn best_assignment(overlap: &[Vec<usize>], cols: usize) -> Vec<Option<usize>> {
    let rows = overlap.len();
    if cols <= EXACT_LIMIT {
        return subset_dp(rows, cols, |r, c| overlap[r][c]);
    }
    let mut out = vec![None; rows];
    for (c, r) in subset_dp(cols, rows, |c, r| overlap[r][c]).into_iter().enumerate() {
        if let Some(r) = r {
            out[r] = Some(c);
        }
    }
    out
}

/// Assigns each of `rows` items to a distinct one of `cols` (<= 12) slots or to
/// none, maximizing the summed weight.
fn subset_dp(rows: usize, cols: usize, w: impl Fn(usize, usize) -> usize) -> Vec<Option<usize>> {
    let states = 1usize << cols;
    // best[r][mask]: best total for rows r.. given used columns mask
    let mut best = vec![vec![0usize; states]; rows + 1];
    for r in (0..rows).rev() {
        for mask in 0..states {
            let mut b = best[r + 1][mask];
            for c in 0..cols {
                if mask >> c & 1 == 0 {
                    b = b.max(w(r, c) + best[r + 1][mask | 1 << c]);
                }
            }
            best[r][mask] = b;
        }
    }
    let mut out = vec![None; rows];
    let mut mask = 0usize;
    for (r, slot) in out.iter_mut().enumerate() {
        if best[r][mask] == best[r + 1][mask] {
            continue;
        }
        for c in 0..cols {
            if mask >> c & 1 == 0 && best[r][mask] == w(r, c) + best[r + 1][mask | 1 << c] {
                *slot = Some(c);
                mask |= 1 << c;
                break;
            }
        }
    }
    // rows left unassigned but with free columns still take one, so every
    // predicted label maps onto a ground-truth id when enough exist
    for slot in out.iter_mut() {
        if slot.is_none() {
            if let Some(c) = (0..cols).find(|&c| mask >> c & 1 == 0) {
                *slot = Some(c);
                mask |= 1 << c;
            }
        }
    }
    out
}

fn greedy_assignment(overlap: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut cells: Vec<(usize, usize, usize)> = overlap
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (v, r, c)))
        .collect();
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let cols = overlap.first().map_or(0, Vec::len);
    let mut out = vec![None; overlap.len()];
    let mut used = vec![false; cols];
    for (_, r, c) in cells {
        if out[r].is_none() && !used[c] {
            out[r] = Some(c);
            used[c] = true;
        }
    }
    out
}
