//! Error measures and summary statistics.

use alloc::vec::Vec;
use core::fmt;

use crate::kinematics::JointPositions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

impl fmt::Display for LengthMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "length mismatch: {} vs {}", self.left, self.right)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LengthMismatch {}

/// Mean Euclidean distance between corresponding joints, mm.
pub fn average_joint_error(estimated: &JointPositions, truth: &JointPositions) -> Result<f64, LengthMismatch> {
    if estimated.len() != truth.len() {
        return Err(LengthMismatch { left: estimated.len(), right: truth.len() });
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = estimated.0.iter().zip(&truth.0).map(|(a, b)| a.distance(*b)).sum();
    Ok(sum / truth.len() as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Cumulative error distribution: for each threshold, the fraction of
/// `errors` that are `<=` it.
pub fn ced(errors: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    thresholds
        .iter()
        .map(|&t| {
            let k = sorted.partition_point(|e| *e <= t);
            (t, if sorted.is_empty() { 0.0 } else { k as f64 / sorted.len() as f64 })
        })
        .collect()
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / crate::math::sqrt(saa * sbb)
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64, LengthMismatch> {
    if a.len() != b.len() {
        return Err(LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(pearson(&average_ranks(a), &average_ranks(b)))
}
