//! Median-IQR normalization and weighted logistic frame scoring.

use serde::{Deserialize, Serialize};

use crate::features::{dim, FeatureMatrix, FEATURE_DIM};

/// IQR floor in max(q, EPSILON).
pub const IQR_EPSILON: f64 = 1e-6;

/// Logistic model weights, one per feature dimension, plus bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringWeights {
    pub w: [f64; FEATURE_DIM],
    pub b: f64,
}

/// Default weights: motion residuals 0.8, gradient kurtosis 0.6, histogram
/// distance 1.0; remaining dimensions unused (0). Bias 0 puts the median
/// frame at p = 0.5.
pub fn default_weights() -> ScoringWeights {
    let mut w = [0.0; FEATURE_DIM];
    w[dim::DIFF_MEAN] = 0.8;
    w[dim::GRAD_KURTOSIS] = 0.6;
    w[dim::HIST_DIST_PREV] = 1.0;
    ScoringWeights { w, b: 0.0 }
}

/// Per-frame artifact probabilities, 1-based frame indices, strictly in (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProbabilities {
    pub entries: Vec<(usize, f64)>,
}

impl FrameProbabilities {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, p)| p).collect()
    }

    pub fn from_values(values: &[f64]) -> Self {
        FrameProbabilities {
            entries: values.iter().enumerate().map(|(i, &p)| (i + 1, p)).collect(),
        }
    }
}

/// Type-7 quantile (linear interpolation between order statistics) of a
/// sorted slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and IQR of a column, type-7 quantiles.
pub fn median_iqr(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = quantile_sorted(&sorted, 0.5);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    (median, iqr)
}

/// Per-dimension median-IQR normalization: x~ = (x - m) / max(q, epsilon).
pub fn robust_normalize(matrix: &FeatureMatrix) -> FeatureMatrix {
    let mut rows = matrix.rows.clone();
    for i in 0..FEATURE_DIM {
        let col = matrix.column(i);
        let (m, q) = median_iqr(&col);
        let scale = q.max(IQR_EPSILON);
        for row in rows.iter_mut() {
            row[i] = (row[i] - m) / scale;
        }
    }
    FeatureMatrix { rows }
}

/// Logistic sigmoid.
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// p_t = sigma(w . x~_t + b) per frame, ordered by t.
pub fn logistic_score(normalized: &FeatureMatrix, weights: &ScoringWeights) -> FrameProbabilities {
    let entries = normalized
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let z: f64 = row
                .iter()
                .zip(&weights.w)
                .map(|(x, w)| x * w)
                .sum::<f64>()
                + weights.b;
            (i + 1, sigmoid(z))
        })
        .collect();
    FrameProbabilities { entries }
}
