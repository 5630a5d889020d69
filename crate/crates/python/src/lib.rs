//! Python bindings for the core scoring, localization, and fusion operations.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qrouter_core::clips;
use qrouter_core::config::RunConfig;
use qrouter_core::error::Error;
use qrouter_core::eval;
use qrouter_core::extractor::{robust_normalize, FrameProbabilities};
use qrouter_core::features::extract_features;
use qrouter_core::fusion;
use qrouter_core::media::load_frame_dir;
use qrouter_core::pipeline;
use qrouter_core::routing::{self, VideoType};

fn to_py_err(err: Error) -> PyErr {
    PyRuntimeError::new_err(err.to_string())
}

fn parse_config(config_json: Option<&str>) -> PyResult<RunConfig> {
    let cfg: RunConfig = match config_json {
        None => RunConfig::default(),
        Some(text) => serde_json::from_str(text)
            .map_err(|e| PyValueError::new_err(format!("bad config JSON: {}", e)))?,
    };
    cfg.validate().map_err(to_py_err)?;
    Ok(cfg)
}

/// Score a directory of numbered PPM frames; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (video_dir, out_dir, config_json=None))]
fn score(video_dir: &str, out_dir: &str, config_json: Option<&str>) -> PyResult<String> {
    let cfg = parse_config(config_json)?;
    let report =
        pipeline::run_score(Path::new(video_dir), &cfg, Path::new(out_dir)).map_err(to_py_err)?;
    serde_json::to_string_pretty(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Localize artifacts; returns the localization summary as a JSON string.
#[pyfunction]
#[pyo3(signature = (video_dir, out_dir, config_json=None))]
fn localize(video_dir: &str, out_dir: &str, config_json: Option<&str>) -> PyResult<String> {
    let cfg = parse_config(config_json)?;
    let outcome = pipeline::run_localize(Path::new(video_dir), &cfg, Path::new(out_dir))
        .map_err(to_py_err)?;
    serde_json::to_string_pretty(&outcome.summary)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Per-frame artifact probabilities for a frame directory.
#[pyfunction]
#[pyo3(signature = (video_dir, config_json=None))]
fn frame_probabilities(video_dir: &str, config_json: Option<&str>) -> PyResult<Vec<f64>> {
    let cfg = parse_config(config_json)?;
    let seq = load_frame_dir(Path::new(video_dir)).map_err(to_py_err)?;
    let probs = pipeline::frame_probabilities(&seq, &cfg).map_err(to_py_err)?;
    Ok(probs.values())
}

/// Hysteresis clip formation over a probability sequence.
/// Returns (start, end) pairs with 1-based inclusive indices.
#[pyfunction]
fn hysteresis_clips(
    probs: Vec<f64>,
    tau_high: f64,
    tau_low: f64,
    l_min: usize,
    padding: usize,
) -> PyResult<Vec<(usize, usize)>> {
    let fp = FrameProbabilities::from_values(&probs);
    let set = clips::hysteresis_clips(&fp, tau_high, tau_low, l_min, padding).map_err(to_py_err)?;
    Ok(set.clips.iter().map(|c| (c.start, c.end)).collect())
}

#[pyfunction]
fn weighted_mean(scores: Vec<f64>, weights: Vec<f64>) -> PyResult<f64> {
    fusion::weighted_mean(&scores, &weights).map_err(to_py_err)
}

#[pyfunction]
fn weighted_median(scores: Vec<f64>, weights: Vec<f64>) -> PyResult<f64> {
    fusion::weighted_median(&scores, &weights).map_err(to_py_err)
}

#[pyfunction]
fn plcc(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::plcc(&x, &y).map_err(to_py_err)
}

#[pyfunction]
fn srcc(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::srcc(&x, &y).map_err(to_py_err)
}

/// Baseline expert weights for a video type ("ugc", "short_form", "gaming",
/// "ai_generated"), after restriction to registered scorers.
#[pyfunction]
fn baseline_weights(video_type: &str) -> PyResult<BTreeMap<String, f64>> {
    let vt = VideoType::parse(video_type)
        .ok_or_else(|| PyValueError::new_err(format!("unknown video type {:?}", video_type)))?;
    let pool = routing::default_pool();
    Ok(pool
        .baseline_weights(vt)
        .map_err(to_py_err)?
        .into_iter()
        .collect())
}

/// Normalized feature matrix for a frame directory (one 7-vector per frame).
#[pyfunction]
fn normalized_features(video_dir: &str) -> PyResult<Vec<Vec<f64>>> {
    let seq = load_frame_dir(Path::new(video_dir)).map_err(to_py_err)?;
    let matrix = extract_features(&seq).map_err(to_py_err)?;
    let normalized = robust_normalize(&matrix);
    Ok(normalized.rows.iter().map(|r| r.to_vec()).collect())
}

#[pymodule]
fn qrouter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(localize, m)?)?;
    m.add_function(wrap_pyfunction!(frame_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(hysteresis_clips, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_mean, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_median, m)?)?;
    m.add_function(wrap_pyfunction!(plcc, m)?)?;
    m.add_function(wrap_pyfunction!(srcc, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_weights, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_features, m)?)?;
    Ok(())
}
