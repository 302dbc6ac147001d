//! Optimal assignment between estimated and true frequencies.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{circular_distance, FrequencyVector};

/// Minimum-cost perfect assignment on a square `n x n` cost matrix given in
/// row-major order. Returns `col[row]`.
///
/// Shortest augmenting path with potentials, `O(n^3)`.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let at = |i: usize, j: usize| cost[(i - 1) * n + (j - 1)];
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = at(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0usize; n];
    for j in 1..=n {
        col[row_of[j] - 1] = j - 1;
    }
    col
}

/// Outcome of pairing estimates with ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatch {
    /// `est_index[l]` is the estimate paired with true frequency `l`.
    pub est_index: Vec<usize>,
    /// Circular error of each true frequency against its paired estimate.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub mse: f64,
}

impl FrequencyMatch {
    /// Success when every matched error is strictly below `eps`.
    pub fn succeeds(&self, eps: f64) -> bool {
        self.max_error < eps
    }
}

/// Pairs `est` with `truth` minimizing the total circular distance.
pub fn match_frequencies(est: &FrequencyVector, truth: &FrequencyVector) -> FrequencyMatch {
    assert_eq!(est.len(), truth.len(), "estimate and truth lengths differ");
    let n = truth.len();
    let (e, t) = (est.as_slice(), truth.as_slice());
    let mut cost = Vec::with_capacity(n * n);
    for &tl in t {
        for &ek in e {
            cost.push(circular_distance(tl, ek));
        }
    }
    let est_index = min_cost_assignment(&cost, n);
    let errors: Vec<f64> = est_index
        .iter()
        .enumerate()
        .map(|(l, &k)| circular_distance(t[l], e[k]))
        .collect();
    let max_error = errors.iter().cloned().fold(0.0, f64::max);
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n as f64;
    FrequencyMatch {
        est_index,
        errors,
        max_error,
        mse,
    }
}
