//! Expert pool, video-type classification, and adjusted weight computation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Video content classes used by the prior table. CG content maps onto the
/// Gaming priors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VideoType {
    Ugc,
    ShortForm,
    Gaming,
    AiGenerated,
}

impl VideoType {
    pub fn as_str(&self) -> &'static str {
        match self {
            VideoType::Ugc => "ugc",
            VideoType::ShortForm => "short_form",
            VideoType::Gaming => "gaming",
            VideoType::AiGenerated => "ai_generated",
        }
    }

    /// Map a classifier response onto a prior row. Accepts the taxonomy
    /// labels plus common spellings; CG uses the Gaming priors.
    pub fn parse(text: &str) -> Option<VideoType> {
        match text.trim().to_ascii_lowercase().as_str() {
            "ugc" | "user_generated" | "user generated content" => Some(VideoType::Ugc),
            "short" | "shortform" | "short_form" | "short-form" | "social" => {
                Some(VideoType::ShortForm)
            }
            "gaming" | "cg" | "computer graphics" => Some(VideoType::Gaming),
            "aigc" | "ai_generated" | "ai-generated" | "ai generated content" => {
                Some(VideoType::AiGenerated)
            }
            _ => None,
        }
    }
}

/// How well an expert matches a video type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchGrade {
    Full,
    Partial,
    None,
}

impl MatchGrade {
    /// specialty_match term in {1, 0.5, 0}.
    pub fn specialty_match(&self) -> f64 {
        match self {
            MatchGrade::Full => 1.0,
            MatchGrade::Partial => 0.5,
            MatchGrade::None => 0.0,
        }
    }
}

/// Whether an expert's score participates in fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoringRole {
    Scorer,
    ExplanationOnly,
}

/// Expert metadata driving routing decisions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelCard {
    pub name: String,
    pub specialties: BTreeMap<VideoType, MatchGrade>,
    pub confidence_prior: f64,
    pub scoring_role: ScoringRole,
    /// Issue classes this expert is known to be insensitive to
    /// (e.g. "image_artifact"); drives the out-of-band penalty.
    pub insensitive_issues: Vec<String>,
    pub notes: String,
}

impl ModelCard {
    pub fn match_grade(&self, vtype: VideoType) -> MatchGrade {
        self.specialties
            .get(&vtype)
            .copied()
            .unwrap_or(MatchGrade::None)
    }
}

/// Per-type base weights over expert names.
pub type BaselinePriors = BTreeMap<VideoType, Vec<(String, f64)>>;

/// Immutable registered pool: cards in registration order plus the raw
/// prior table.
#[derive(Debug, Clone)]
pub struct ExpertPool {
    cards: Vec<ModelCard>,
    priors: BaselinePriors,
}

/// Routing outcome: chosen experts with normalized weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutingPlan {
    pub tier: u8,
    pub chosen_experts: Vec<String>,
    pub weights: Vec<f64>,
    pub reasons: Vec<String>,
}

fn card(
    name: &str,
    specialties: &[(VideoType, MatchGrade)],
    role: ScoringRole,
    insensitive: &[&str],
    notes: &str,
) -> ModelCard {
    ModelCard {
        name: name.to_string(),
        specialties: specialties.iter().copied().collect(),
        confidence_prior: 0.5,
        scoring_role: role,
        insensitive_issues: insensitive.iter().map(|s| s.to_string()).collect(),
        notes: notes.to_string(),
    }
}

/// The six-expert pool with its published prior table. RQ-VQA appears in the
/// priors but carries no card, so registration drops it.
pub fn default_pool() -> ExpertPool {
    use MatchGrade::{Full, Partial};
    use VideoType::*;
    let cards = vec![
        card(
            "COVER",
            &[(Ugc, Full), (ShortForm, Partial), (Gaming, Partial), (AiGenerated, Partial)],
            ScoringRole::Scorer,
            &[],
            "technical/aesthetic/semantic branches with cross-gating",
        ),
        card(
            "DOVER",
            &[(Ugc, Partial)],
            ScoringRole::Scorer,
            &[],
            "consistency reference overlapping COVER branches",
        ),
        card(
            "UVQ",
            &[(Ugc, Full), (ShortForm, Partial), (Gaming, Partial), (AiGenerated, Partial)],
            ScoringRole::Scorer,
            &[],
            "universal UGC-trained model, robust fallback",
        ),
        card(
            "MaxVQA",
            &[(Ugc, Partial), (ShortForm, Partial), (Gaming, Partial), (AiGenerated, Partial)],
            ScoringRole::ExplanationOnly,
            &[],
            "explanation and weight hints only, not scoring",
        ),
        card(
            "ModularBVQA",
            &[(Ugc, Partial), (ShortForm, Partial), (Gaming, Partial), (AiGenerated, Partial)],
            ScoringRole::Scorer,
            &["image_artifact"],
            "lightweight fallback, modest sensitivity to capture distortions",
        ),
        card(
            "T2VQA",
            &[(AiGenerated, Full)],
            ScoringRole::Scorer,
            &[],
            "text-to-video alignment for AI-generated content",
        ),
    ];
    let mut priors: BaselinePriors = BTreeMap::new();
    priors.insert(
        Ugc,
        vec![
            ("UVQ".into(), 0.25),
            ("COVER".into(), 0.25),
            ("ModularBVQA".into(), 0.15),
            ("RQ-VQA".into(), 0.10),
            ("MaxVQA".into(), 0.15),
        ],
    );
    priors.insert(
        ShortForm,
        vec![
            ("RQ-VQA".into(), 0.30),
            ("COVER".into(), 0.30),
            ("UVQ".into(), 0.20),
            ("ModularBVQA".into(), 0.10),
            ("MaxVQA".into(), 0.10),
        ],
    );
    priors.insert(
        Gaming,
        vec![
            ("COVER".into(), 0.35),
            ("UVQ".into(), 0.25),
            ("ModularBVQA".into(), 0.20),
            ("MaxVQA".into(), 0.10),
            ("RQ-VQA".into(), 0.05),
        ],
    );
    priors.insert(
        AiGenerated,
        vec![
            ("T2VQA".into(), 0.35),
            ("COVER".into(), 0.20),
            ("UVQ".into(), 0.15),
            ("MaxVQA".into(), 0.15),
            ("ModularBVQA".into(), 0.10),
            ("RQ-VQA".into(), 0.05),
        ],
    );
    ExpertPool { cards, priors }
}

impl ExpertPool {
    pub fn new(cards: Vec<ModelCard>, priors: BaselinePriors) -> Result<Self, Error> {
        if cards.is_empty() {
            return Err(Error::Routing("empty expert pool".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &cards {
            if !seen.insert(c.name.clone()) {
                return Err(Error::Routing(format!("duplicate expert name {}", c.name)));
            }
            if !(0.0..=1.0).contains(&c.confidence_prior) {
                return Err(Error::Routing(format!(
                    "confidence_prior out of range for {}",
                    c.name
                )));
            }
        }
        Ok(ExpertPool { cards, priors })
    }

    pub fn cards(&self) -> &[ModelCard] {
        &self.cards
    }

    pub fn card(&self, name: &str) -> Option<&ModelCard> {
        self.cards.iter().find(|c| c.name == name)
    }

    /// Scorer experts in registration order.
    pub fn scorers(&self) -> Vec<&ModelCard> {
        self.cards
            .iter()
            .filter(|c| c.scoring_role == ScoringRole::Scorer)
            .collect()
    }

    /// Prior-table weights restricted to registered Scorer experts, then
    /// renormalized to sum 1. Names without a card (e.g. RQ-VQA) and
    /// ExplanationOnly experts are dropped before renormalization.
    /// Returned in registration order.
    pub fn baseline_weights(&self, vtype: VideoType) -> Result<Vec<(String, f64)>, Error> {
        let row = self
            .priors
            .get(&vtype)
            .ok_or_else(|| Error::Routing(format!("no priors for {:?}", vtype)))?;
        let mut restricted: Vec<(String, f64)> = Vec::new();
        for c in self.scorers() {
            if let Some((_, w)) = row.iter().find(|(n, _)| n == &c.name) {
                if *w > 0.0 {
                    restricted.push((c.name.clone(), *w));
                }
            }
        }
        let total: f64 = restricted.iter().map(|(_, w)| w).sum();
        if restricted.is_empty() || total <= 0.0 {
            return Err(Error::Routing(format!(
                "no scorer expert has a prior for {:?}",
                vtype
            )));
        }
        for (_, w) in restricted.iter_mut() {
            *w /= total;
        }
        Ok(restricted)
    }
}

/// Video descriptor fed to the type classifier.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_ref: String,
    pub video_type: Option<String>,
    pub text_prompt: Option<String>,
}

/// Video-type classification client.
pub trait VideoTypeClassifier {
    fn classify(&self, meta: &VideoMeta) -> Result<VideoType, Error>;
}

/// Stub classifier: maps an explicit `video_type` metadata field directly,
/// defaulting to UGC when absent.
pub struct MetadataClassifier;

impl VideoTypeClassifier for MetadataClassifier {
    fn classify(&self, meta: &VideoMeta) -> Result<VideoType, Error> {
        match &meta.video_type {
            None => Ok(VideoType::Ugc),
            Some(s) => VideoType::parse(s)
                .ok_or_else(|| Error::Routing(format!("unmappable video type {:?}", s))),
        }
    }
}

pub fn classify_video(
    meta: &VideoMeta,
    client: &dyn VideoTypeClassifier,
) -> Result<VideoType, Error> {
    client.classify(meta)
}

/// Mean after dropping floor(trim_fraction * n) values at each end.
pub fn trimmed_mean(scores: &[f64], trim_fraction: f64) -> Result<f64, Error> {
    if scores.is_empty() {
        return Err(Error::Routing("trimmed_mean of empty list".into()));
    }
    assert!((0.0..0.5).contains(&trim_fraction));
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let drop = (trim_fraction * sorted.len() as f64).floor() as usize;
    let kept = &sorted[drop..sorted.len() - drop];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Default trim fraction for the agreement term.
pub const DEFAULT_TRIM: f64 = 0.2;

/// Adjustment multiplier
/// 1 + 0.5 * specialty_match + 0.3 * agreement_boost + 0.2 * confidence_prior
///   - 0.3 * oob_penalty.
/// Bounded below by 0.7.
pub fn adjustment_multiplier(sm: f64, ab: f64, cp: f64, oob: f64) -> f64 {
    1.0 + 0.5 * sm + 0.3 * ab + 0.2 * cp - 0.3 * oob
}

/// Agreement boost: max(0, 1 - |s - trimmed_mean| / 25).
pub fn agreement_boost(score: f64, trimmed: f64) -> f64 {
    (1.0 - (score - trimmed).abs() / 25.0).max(0.0)
}

/// Normalize nonnegative weights to sum 1.
pub fn normalize_weights(weights: &[f64]) -> Result<Vec<f64>, Error> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Routing("weights do not sum to a positive value".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Apply the full weight-adjustment formula and renormalize.
///
/// `base` pairs expert names (registration order) with baseline weights;
/// `scores` must contain a score for every weighted expert. oob is 1 when
/// the card's match grade is None for the video type or the card is
/// insensitive to a detected issue class.
pub fn adjust_weights(
    base: &[(String, f64)],
    scores: &BTreeMap<String, f64>,
    pool: &ExpertPool,
    vtype: VideoType,
    detected_issues: &[String],
) -> Result<Vec<(String, f64)>, Error> {
    let raw_scores: Vec<f64> = base
        .iter()
        .map(|(name, _)| {
            scores
                .get(name)
                .copied()
                .ok_or_else(|| Error::Routing(format!("missing score for expert {}", name)))
        })
        .collect::<Result<_, _>>()?;
    let trimmed = trimmed_mean(&raw_scores, DEFAULT_TRIM)?;
    let mut adjusted = Vec::with_capacity(base.len());
    for ((name, bw), score) in base.iter().zip(&raw_scores) {
        let card = pool
            .card(name)
            .ok_or_else(|| Error::Routing(format!("unknown expert {}", name)))?;
        let grade = card.match_grade(vtype);
        let sm = grade.specialty_match();
        let ab = agreement_boost(*score, trimmed);
        let cp = card.confidence_prior;
        let insensitive = detected_issues
            .iter()
            .any(|issue| card.insensitive_issues.contains(issue));
        let oob = if grade == MatchGrade::None || insensitive {
            1.0
        } else {
            0.0
        };
        adjusted.push(bw * adjustment_multiplier(sm, ab, cp, oob));
    }
    let normalized = normalize_weights(&adjusted)?;
    Ok(base
        .iter()
        .map(|(n, _)| n.clone())
        .zip(normalized)
        .collect())
}

/// Tier-0 single-expert selection: argmax of
/// base_i * (1 + 0.5 * sm_i + 0.2 * cp_i). Agreement and oob terms need
/// scores that do not exist yet, so they are excluded. Ties break toward
/// registration order.
pub fn tier0_route(pool: &ExpertPool, vtype: VideoType) -> Result<RoutingPlan, Error> {
    let base = pool.baseline_weights(vtype)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, (name, bw)) in base.iter().enumerate() {
        let card = pool.card(name).unwrap();
        let sm = card.match_grade(vtype).specialty_match();
        let value = bw * (1.0 + 0.5 * sm + 0.2 * card.confidence_prior);
        let better = match best {
            None => true,
            Some((_, bv)) => value > bv,
        };
        if better {
            best = Some((i, value));
        }
    }
    let (idx, _) = best.ok_or_else(|| Error::Routing("empty pool".into()))?;
    let name = base[idx].0.clone();
    Ok(RoutingPlan {
        tier: 0,
        chosen_experts: vec![name.clone()],
        weights: vec![1.0],
        reasons: vec![format!(
            "highest prior-and-specialty product for {} content",
            vtype.as_str()
        )],
    })
}

/// Tier-1 plan: all weighted scorers with adjusted weights.
pub fn tier1_route(
    pool: &ExpertPool,
    vtype: VideoType,
    scores: &BTreeMap<String, f64>,
    detected_issues: &[String],
) -> Result<RoutingPlan, Error> {
    let base = pool.baseline_weights(vtype)?;
    let adjusted = adjust_weights(&base, scores, pool, vtype, detected_issues)?;
    Ok(RoutingPlan {
        tier: 1,
        chosen_experts: adjusted.iter().map(|(n, _)| n.clone()).collect(),
        weights: adjusted.iter().map(|(_, w)| *w).collect(),
        reasons: adjusted
            .iter()
            .map(|(n, w)| {
                let grade = pool.card(n).unwrap().match_grade(vtype);
                format!("{}: {:?} match for {}, adjusted weight {:.4}", n, grade, vtype.as_str(), w)
            })
            .collect(),
    })
}
