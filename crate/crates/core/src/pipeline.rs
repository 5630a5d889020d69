//! End-to-end wiring for the score / localize / eval commands.

use std::collections::BTreeMap;
use std::path::Path;

use crate::clients::{
    ExpertRequest, ExpertScorer, FrameClassifier, HttpClassifier, HttpExpert, MockClassifier,
    MockExpert,
};
use crate::clips::hysteresis_clips;
use crate::config::RunConfig;
use crate::error::Error;
use crate::eval::{self, EvalResult, ManifestEntry};
use crate::extractor::{logistic_score, robust_normalize, FrameProbabilities};
use crate::features::{extract_features, sequence_histograms};
use crate::fusion::{
    choose_method, weighted_mean, weighted_median, build_report, Evidence, FusionMethod,
    QualityReport,
};
use crate::localization::{
    localize, restrict_clips, vlm_filter, BlockMatchingFlow, LocalizationSummary, ProxyMetric,
};
use crate::media::{load_frame_dir, FrameSequence};
use crate::routing::{
    classify_video, tier0_route, tier1_route, MetadataClassifier, RoutingPlan, VideoMeta, VideoType,
};
use crate::selection::{diversified_selection, SelectedFrames};

/// Artifact-probability pass shared by localization and diagnostics.
pub fn frame_probabilities(
    seq: &FrameSequence,
    config: &RunConfig,
) -> Result<FrameProbabilities, Error> {
    let matrix = extract_features(seq)?;
    let normalized = robust_normalize(&matrix);
    Ok(logistic_score(&normalized, &config.weights))
}

/// Tier-2 localization outcome fed into report evidence.
pub struct LocalizationOutcome {
    pub selected: SelectedFrames,
    pub summary: LocalizationSummary,
}

fn classifier_for(config: &RunConfig) -> Result<Box<dyn FrameClassifier>, Error> {
    if config.mock {
        return Ok(Box::new(MockClassifier::default()));
    }
    let endpoint = config
        .vlm_endpoint
        .clone()
        .ok_or_else(|| Error::Config("vlm_endpoint required when not in mock mode".into()))?;
    Ok(Box::new(HttpClassifier::new(endpoint)))
}

fn scorer_for(config: &RunConfig, name: &str) -> Result<Box<dyn ExpertScorer>, Error> {
    if config.mock {
        return Ok(Box::new(MockExpert::new(name, config.seed)));
    }
    let ep = config.expert_endpoint(name).ok_or_else(|| {
        Error::Config(format!("no endpoint configured for expert {}", name))
    })?;
    let mut client = HttpExpert::new(ep.endpoint);
    client.timeout = std::time::Duration::from_secs(config.timeout_secs);
    client.bearer_token = ep.bearer_token;
    Ok(Box::new(client))
}

/// Full localization pass: features, probabilities, clips, diversified
/// selection, VLM filtering, and per-clip heatmap emission.
pub fn run_localize(
    video_dir: &Path,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<LocalizationOutcome, Error> {
    // fail fast before any frame processing
    std::fs::create_dir_all(out_dir)?;
    let probe = out_dir.join(".write_probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;

    let seq = load_frame_dir(video_dir)?;
    let matrix = extract_features(&seq)?;
    let normalized = robust_normalize(&matrix);
    let probs = logistic_score(&normalized, &config.weights);
    let t = &config.thresholds;
    let clips = hysteresis_clips(&probs, t.tau_high, t.tau_low, t.l_min, t.padding)?;
    let histograms = sequence_histograms(&seq);
    let selected =
        diversified_selection(&probs, &histograms, &matrix, config.budget(), t.theta_shot)?;
    if clips.is_empty() {
        // nothing suspicious; still emit an empty summary for the caller
        let summary = LocalizationSummary::default();
        std::fs::write(
            out_dir.join("localization.json"),
            serde_json::to_vec_pretty(&summary)?,
        )?;
        return Ok(LocalizationOutcome { selected, summary });
    }
    let classifier = classifier_for(config)?;
    let labels = vlm_filter(&selected, &seq, classifier.as_ref())?;
    let retained = restrict_clips(&clips, &labels);
    let summary = localize(
        &seq,
        &retained,
        &labels,
        &BlockMatchingFlow::default(),
        &ProxyMetric::default(),
        config.alpha,
        out_dir,
    )?;
    Ok(LocalizationOutcome { selected, summary })
}

fn collect_scores(
    config: &RunConfig,
    names: &[String],
    meta: &VideoMeta,
    vtype: VideoType,
) -> Result<BTreeMap<String, f64>, Error> {
    let request = ExpertRequest {
        video_ref: meta.video_ref.clone(),
        video_type_hint: Some(vtype.as_str().to_string()),
        text_prompt: meta.text_prompt.clone(),
    };
    let mut scores = BTreeMap::new();
    for name in names {
        let client = scorer_for(config, name)?;
        let resp = client.score(&request)?;
        scores.insert(name.clone(), resp.score);
    }
    if scores.is_empty() {
        return Err(Error::Routing("all experts failed; no fusable score".into()));
    }
    Ok(scores)
}

fn plan_scores(plan: &RoutingPlan, scores: &BTreeMap<String, f64>) -> Vec<f64> {
    plan.chosen_experts
        .iter()
        .map(|n| scores[n])
        .collect()
}

/// Score a video at the configured tier and write `<out>/report.json`.
pub fn run_score(
    video_dir: &Path,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<QualityReport, Error> {
    config.validate()?;
    if !video_dir.is_dir() {
        return Err(Error::MissingDirectory(video_dir.display().to_string()));
    }
    std::fs::create_dir_all(out_dir)?;
    let pool = crate::routing::default_pool();
    let meta = VideoMeta {
        video_ref: video_dir.display().to_string(),
        video_type: config.video_type.clone(),
        text_prompt: config.text_prompt.clone(),
    };
    let vtype = classify_video(&meta, &MetadataClassifier)?;

    // Tier 2 runs localization first so detected issues can inform routing.
    let localization = if config.tier == 2 {
        Some(run_localize(video_dir, config, &out_dir.join("localization"))?)
    } else {
        None
    };
    let detected_issues: Vec<String> = localization
        .as_ref()
        .map(|l| {
            let mut issues: Vec<String> = l
                .summary
                .clips
                .iter()
                .map(|c| c.label.as_str().to_string())
                .filter(|s| s != "none")
                .collect();
            issues.sort();
            issues.dedup();
            issues
        })
        .unwrap_or_default();

    let (plan, scores_vec, fused, method) = if config.tier == 0 {
        let plan = tier0_route(&pool, vtype)?;
        let scores = collect_scores(config, &plan.chosen_experts, &meta, vtype)?;
        let sv = plan_scores(&plan, &scores);
        let fused = sv[0];
        (plan, sv, fused, FusionMethod::SingleExpert)
    } else {
        let base = pool.baseline_weights(vtype)?;
        let names: Vec<String> = base.iter().map(|(n, _)| n.clone()).collect();
        let scores = collect_scores(config, &names, &meta, vtype)?;
        let plan = tier1_route(&pool, vtype, &scores, &detected_issues)?;
        let sv = plan_scores(&plan, &scores);
        let method = choose_method(&sv)?;
        let fused = match method {
            FusionMethod::WeightedMedian => weighted_median(&sv, &plan.weights)?,
            _ => weighted_mean(&sv, &plan.weights)?,
        };
        (plan, sv, fused, method)
    };

    let specialty: Vec<f64> = plan
        .chosen_experts
        .iter()
        .map(|n| {
            pool.card(n)
                .map(|c| c.match_grade(vtype).specialty_match())
                .unwrap_or(0.0)
        })
        .collect();
    let notes: Vec<String> = plan
        .chosen_experts
        .iter()
        .map(|n| pool.card(n).map(|c| c.notes.clone()).unwrap_or_default())
        .collect();
    let evidence = Evidence {
        keyframes: localization
            .as_ref()
            .map(|l| l.selected.indices.clone())
            .unwrap_or_default(),
        detected_issues,
        localization: localization.map(|l| l.summary.clips),
    };
    let next_actions = suggested_actions(&scores_vec, &evidence);
    let report = build_report(&plan, &scores_vec, fused, method, &specialty, &notes, evidence, next_actions)?;
    std::fs::write(
        out_dir.join("report.json"),
        serde_json::to_vec_pretty(&report)?,
    )?;
    Ok(report)
}

fn suggested_actions(scores: &[f64], evidence: &Evidence) -> Vec<String> {
    let mut actions = Vec::new();
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min > 20.0 {
        actions.push("experts disagree strongly; consider tier 2 localization".to_string());
    }
    if !evidence.detected_issues.is_empty() {
        actions.push("review localization overlays for the flagged clips".to_string());
    }
    if actions.is_empty() {
        actions.push("none".to_string());
    }
    actions
}

/// Evaluate every manifest entry at the configured tier, emitting JSON and
/// a plain-text table.
pub fn run_eval(
    manifest_path: &Path,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<EvalResult, Error> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let entries = eval::read_manifest(manifest_path)?;
    let result = eval::evaluate_manifest(&entries, |entry: &ManifestEntry| {
        let video_out = out_dir.join(
            entry
                .video_dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "video".to_string()),
        );
        let report = run_score(&entry.video_dir, config, &video_out)?;
        Ok(report.final_score as f64)
    })?;
    std::fs::write(out_dir.join("eval.json"), serde_json::to_vec_pretty(&result)?)?;
    std::fs::write(out_dir.join("eval.txt"), eval::format_table(&result))?;
    Ok(result)
}
