//! Unsupervised composers.

use std::collections::HashSet;

use super::{FeatureRow, RankedList};

/// Effective `(R, S, H)` weights of the fixed-weight composer:
/// `b·H + (1−b)·(a·R + (1−a)·S)`.
pub fn fixed_coefficients(a: f64, b: f64) -> (f64, f64, f64) {
    ((1.0 - b) * a, (1.0 - b) * (1.0 - a), b)
}

pub fn fuse_fixed(bug_id: &str, rows: &[FeatureRow], a: f64, b: f64) -> RankedList {
    RankedList::from_scores(
        bug_id,
        rows.iter()
            .map(|r| (r.file_path.clone(), b * r.susp_h + (1.0 - b) * (a * r.susp_r + (1.0 - a) * r.susp_s)))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombVariant {
    Sum,
    /// Sum times the number of nonzero components.
    Mnz,
    /// Sum over the number of nonzero components.
    Anz,
}

pub fn fuse_comb(bug_id: &str, rows: &[FeatureRow], variant: CombVariant) -> RankedList {
    RankedList::from_scores(
        bug_id,
        rows.iter()
            .map(|r| {
                let f = r.features();
                let sum: f64 = f.iter().sum();
                let nonzero = f.iter().filter(|v| **v > 0.0).count() as f64;
                let score = match variant {
                    CombVariant::Sum => sum,
                    CombVariant::Mnz => sum * nonzero,
                    CombVariant::Anz if nonzero == 0.0 => 0.0,
                    CombVariant::Anz => sum / nonzero,
                };
                (r.file_path.clone(), score)
            })
            .collect(),
    )
}

/// Row indices of one component ordered by the standard tie-break.
fn component_order(rows: &[FeatureRow], component: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (rows[i].features()[component] + 0.0, rows[j].features()[component] + 0.0);
        b.total_cmp(&a).then_with(|| rows[i].file_path.cmp(&rows[j].file_path))
    });
    idx
}

/// Borda count: each component awards `m − rank` points; the points are summed.
pub fn fuse_borda(bug_id: &str, rows: &[FeatureRow]) -> RankedList {
    let m = rows.len();
    let mut points = vec![0.0; m];
    for component in 0..3 {
        for (pos, i) in component_order(rows, component).into_iter().enumerate() {
            points[i] += (m - (pos + 1)) as f64;
        }
    }
    RankedList::from_scores(bug_id, rows.iter().zip(points).map(|(r, p)| (r.file_path.clone(), p)).collect())
}

/// Per-component CorrB weights `½(1 + mean_{j≠i} |top_i ∩ top_j| / N)` with `N = min(top_n, m)`.
pub fn corrb_weights(rows: &[FeatureRow], top_n: usize) -> [f64; 3] {
    let n = top_n.min(rows.len());
    if n == 0 {
        return [1.0; 3];
    }
    let tops: Vec<HashSet<usize>> =
        (0..3).map(|c| component_order(rows, c).into_iter().take(n).collect()).collect();
    let mut weights = [0.0; 3];
    for i in 0..3 {
        let overlap: f64 = (0..3)
            .filter(|&j| j != i)
            .map(|j| tops[i].intersection(&tops[j]).count() as f64 / n as f64)
            .sum();
        weights[i] = 0.5 * (1.0 + overlap / 2.0);
    }
    weights
}

pub fn fuse_corrb(bug_id: &str, rows: &[FeatureRow], top_n: usize) -> RankedList {
    let w = corrb_weights(rows, top_n);
    RankedList::from_scores(
        bug_id,
        rows.iter()
            .map(|r| {
                let f = r.features();
                (r.file_path.clone(), w[0] * f[0] + w[1] * f[1] + w[2] * f[2])
            })
            .collect(),
    )
}
