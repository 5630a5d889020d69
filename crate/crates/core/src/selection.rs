//! Diversified frame selection: top-K by probability, farthest-point
//! sampling in HSV space, and mandatory shot-boundary frames.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::extractor::FrameProbabilities;
use crate::features::{bhattacharyya, dim, FeatureMatrix};
use crate::media::HsvHistogram;

/// Top-K and farthest-point budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionBudget {
    pub k_top: usize,
    pub k_fps: usize,
}

impl Default for SelectionBudget {
    fn default() -> Self {
        SelectionBudget { k_top: 8, k_fps: 8 }
    }
}

/// Default shot-boundary threshold on hist_dist_prev.
pub const DEFAULT_THETA_SHOT: f64 = 0.5;

/// Frame indices flagged as shot boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShotBoundarySet {
    pub indices: BTreeSet<usize>,
}

/// Final sorted, deduplicated frame subset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SelectedFrames {
    pub indices: Vec<usize>,
}

impl SelectedFrames {
    pub fn contains(&self, t: usize) -> bool {
        self.indices.binary_search(&t).is_ok()
    }
}

/// The k frames with the largest probabilities; ties toward the smaller
/// frame index. k > T returns all frames.
pub fn top_k(probs: &FrameProbabilities, k: usize) -> BTreeSet<usize> {
    let mut order: Vec<(usize, f64)> = probs.entries.clone();
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    order.into_iter().take(k).map(|(t, _)| t).collect()
}

/// Greedy farthest-point sampling over per-frame HSV histograms.
///
/// Seeds with the highest-probability candidate, then repeatedly picks the
/// candidate maximizing the minimum Bhattacharyya distance to the selected
/// set. All ties break toward the lower frame index. `histograms` is indexed
/// by t - 1.
pub fn fps_hsv(
    candidates: &[usize],
    histograms: &[HsvHistogram],
    probs: &FrameProbabilities,
    k: usize,
) -> Result<BTreeSet<usize>, Error> {
    let mut selected = BTreeSet::new();
    if k == 0 || candidates.is_empty() {
        return Ok(selected);
    }
    let prob_of = |t: usize| probs.entries[t - 1].1;
    let seed = *candidates
        .iter()
        .min_by(|&&a, &&b| {
            prob_of(b)
                .partial_cmp(&prob_of(a))
                .unwrap()
                .then_with(|| a.cmp(&b))
        })
        .unwrap();
    selected.insert(seed);
    let mut remaining: Vec<usize> = candidates.iter().copied().filter(|&t| t != seed).collect();
    while selected.len() < k && !remaining.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for &t in &remaining {
            let mut min_d = f64::INFINITY;
            for &s in &selected {
                let d = bhattacharyya(&histograms[t - 1], &histograms[s - 1])?;
                if d < min_d {
                    min_d = d;
                }
            }
            let better = match best {
                None => true,
                Some((bt, bd)) => min_d > bd || (min_d == bd && t < bt),
            };
            if better {
                best = Some((t, min_d));
            }
        }
        let (pick, _) = best.unwrap();
        selected.insert(pick);
        remaining.retain(|&t| t != pick);
    }
    Ok(selected)
}

/// Frames whose hist_dist_prev exceeds theta_shot.
pub fn shot_boundaries(matrix: &FeatureMatrix, theta_shot: f64) -> ShotBoundarySet {
    let indices = matrix
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row[dim::HIST_DIST_PREV] > theta_shot)
        .map(|(i, _)| i + 1)
        .collect();
    ShotBoundarySet { indices }
}

/// Union of top-K, FPS, and shot-boundary frames, deduplicated and sorted.
pub fn diversified_selection(
    probs: &FrameProbabilities,
    histograms: &[HsvHistogram],
    matrix: &FeatureMatrix,
    budget: SelectionBudget,
    theta_shot: f64,
) -> Result<SelectedFrames, Error> {
    let all_frames: Vec<usize> = probs.entries.iter().map(|&(t, _)| t).collect();
    let mut union = top_k(probs, budget.k_top);
    union.extend(fps_hsv(&all_frames, histograms, probs, budget.k_fps)?);
    union.extend(shot_boundaries(matrix, theta_shot).indices);
    Ok(SelectedFrames {
        indices: union.into_iter().collect(),
    })
}
