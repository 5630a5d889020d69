//! Score fusion and quality-report assembly.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::localization::ClipResult;
use crate::routing::RoutingPlan;

/// Fusion rule selected by the score-range gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusionMethod {
    WeightedMean,
    WeightedMedian,
    /// Tier-0 plans bypass fusion entirely.
    SingleExpert,
}

impl FusionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FusionMethod::WeightedMean => "weighted_mean",
            FusionMethod::WeightedMedian => "weighted_median",
            FusionMethod::SingleExpert => "single-expert",
        }
    }
}

/// Range gate: strictly more than 20 points of disagreement switches to the
/// weighted median.
pub fn choose_method(scores: &[f64]) -> Result<FusionMethod, Error> {
    if scores.is_empty() {
        return Err(Error::Fusion("empty score list".into()));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if max - min > 20.0 {
        FusionMethod::WeightedMedian
    } else {
        FusionMethod::WeightedMean
    })
}

fn check_lengths(scores: &[f64], weights: &[f64]) -> Result<(), Error> {
    if scores.len() != weights.len() {
        return Err(Error::LengthMismatch(format!(
            "{} scores vs {} weights",
            scores.len(),
            weights.len()
        )));
    }
    Ok(())
}

pub fn weighted_mean(scores: &[f64], weights: &[f64]) -> Result<f64, Error> {
    check_lengths(scores, weights)?;
    Ok(scores.iter().zip(weights).map(|(s, w)| s * w).sum())
}

/// Sort pairs by score ascending (ties keep input order, i.e. expert
/// registration order) and return the first score where the cumulative
/// weight reaches 0.5.
pub fn weighted_median(scores: &[f64], weights: &[f64]) -> Result<f64, Error> {
    check_lengths(scores, weights)?;
    if scores.is_empty() {
        return Err(Error::Fusion("empty score list".into()));
    }
    let mut pairs: Vec<(f64, f64)> = scores.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap()); // stable sort keeps ties in order
    let mut cum = 0.0;
    for &(s, w) in &pairs {
        cum += w;
        if cum >= 0.5 {
            return Ok(s);
        }
    }
    Ok(pairs.last().unwrap().0)
}

/// Round half away from zero, clamp to [0, 100].
pub fn final_score(fused: f64) -> u32 {
    let rounded = if fused >= 0.0 {
        (fused + 0.5).floor()
    } else {
        (fused - 0.5).ceil()
    };
    rounded.clamp(0.0, 100.0) as u32
}

/// 1 - min(1, weighted standard deviation / 50).
pub fn confidence(scores: &[f64], weights: &[f64]) -> Result<f64, Error> {
    check_lengths(scores, weights)?;
    let mean = weighted_mean(scores, weights)?;
    let var: f64 = scores
        .iter()
        .zip(weights)
        .map(|(s, w)| w * (s - mean).powi(2))
        .sum();
    Ok(1.0 - (var.sqrt() / 50.0).min(1.0))
}

/// One row of the per-model breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerModelEntry {
    pub name: String,
    pub score: f64,
    pub weight: f64,
    pub specialty_match: f64,
    pub notes: String,
}

/// Evidence block: keyframes, detected issue classes, and the optional
/// Tier-2 localization summary.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Evidence {
    pub keyframes: Vec<usize>,
    pub detected_issues: Vec<String>,
    pub localization: Option<Vec<ClipResult>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub score_range: f64,
    pub fusion_method: String,
    pub routing_reasons: Vec<String>,
    pub suggested_next_actions: Vec<String>,
}

/// The strictly-formatted report. Exactly these seven fields, always present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    pub final_score: u32,
    pub summary_en: String,
    pub chosen_experts: Vec<String>,
    pub per_model: Vec<PerModelEntry>,
    pub evidence: Evidence,
    pub diagnostics: Diagnostics,
    pub confidence: f64,
}

/// Maximum summary length in characters.
pub const SUMMARY_MAX: usize = 120;

/// Truncate at a word boundary with an ellipsis, never exceeding `max`.
fn truncate_summary(text: &str, max: usize) -> String {
    if text.chars().count() <= max {
        return text.to_string();
    }
    let budget = max - 1; // room for the ellipsis
    let mut cut = 0;
    for (count, (idx, ch)) in text.char_indices().enumerate() {
        if count >= budget {
            break;
        }
        if ch == ' ' {
            cut = idx;
        }
    }
    if cut == 0 {
        cut = text
            .char_indices()
            .nth(budget)
            .map(|(i, _)| i)
            .unwrap_or(text.len());
    }
    format!("{}…", &text[..cut])
}

/// Assemble the full report. `scores` pairs with `plan.chosen_experts`.
pub fn build_report(
    plan: &RoutingPlan,
    scores: &[f64],
    fused: f64,
    method: FusionMethod,
    specialty_matches: &[f64],
    notes: &[String],
    evidence: Evidence,
    suggested_next_actions: Vec<String>,
) -> Result<QualityReport, Error> {
    if scores.len() != plan.chosen_experts.len() {
        return Err(Error::LengthMismatch(
            "plan and scores are inconsistent".into(),
        ));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let score = final_score(fused);
    let conf = confidence(scores, &plan.weights)?;
    let top_issue = evidence
        .detected_issues
        .first()
        .cloned()
        .unwrap_or_else(|| "none".to_string());
    let summary = truncate_summary(
        &format!(
            "Quality {}/100 via {} over {} expert(s); top issue: {}",
            score,
            method.as_str(),
            plan.chosen_experts.len(),
            top_issue
        ),
        SUMMARY_MAX,
    );
    let per_model = plan
        .chosen_experts
        .iter()
        .enumerate()
        .map(|(i, name)| PerModelEntry {
            name: name.clone(),
            score: scores[i],
            weight: plan.weights[i],
            specialty_match: specialty_matches.get(i).copied().unwrap_or(0.0),
            notes: notes.get(i).cloned().unwrap_or_default(),
        })
        .collect();
    Ok(QualityReport {
        final_score: score,
        summary_en: summary,
        chosen_experts: plan.chosen_experts.clone(),
        per_model,
        evidence,
        diagnostics: Diagnostics {
            score_range: max - min,
            fusion_method: method.as_str().to_string(),
            routing_reasons: plan.reasons.clone(),
            suggested_next_actions,
        },
        confidence: conf,
    })
}
