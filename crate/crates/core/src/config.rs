//! Run configuration: thresholds, budgets, endpoints, mock mode.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clips;
use crate::error::Error;
use crate::extractor::{default_weights, ScoringWeights};
use crate::selection::{SelectionBudget, DEFAULT_THETA_SHOT};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(default = "d_tau_high")]
    pub tau_high: f64,
    #[serde(default = "d_tau_low")]
    pub tau_low: f64,
    #[serde(default = "d_l_min")]
    pub l_min: usize,
    #[serde(default = "d_padding")]
    pub padding: usize,
    #[serde(default = "d_theta_shot")]
    pub theta_shot: f64,
}

fn d_tau_high() -> f64 {
    clips::DEFAULT_TAU_HIGH
}
fn d_tau_low() -> f64 {
    clips::DEFAULT_TAU_LOW
}
fn d_l_min() -> usize {
    clips::DEFAULT_L_MIN
}
fn d_padding() -> usize {
    clips::DEFAULT_PADDING
}
fn d_theta_shot() -> f64 {
    DEFAULT_THETA_SHOT
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_high: d_tau_high(),
            tau_low: d_tau_low(),
            l_min: d_l_min(),
            padding: d_padding(),
            theta_shot: d_theta_shot(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Budgets {
    #[serde(default = "d_k")]
    pub k_top: usize,
    #[serde(default = "d_k")]
    pub k_fps: usize,
}

fn d_k() -> usize {
    8
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { k_top: 8, k_fps: 8 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExpertEndpoint {
    pub endpoint: String,
    #[serde(default)]
    pub bearer_token: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "d_tier")]
    pub tier: u8,
    #[serde(default)]
    pub mock: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_weights")]
    pub weights: ScoringWeights,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    /// Expert endpoints keyed by card name; env var
    /// QROUTER_EXPERT_<NAME>_ENDPOINT overrides each entry.
    #[serde(default)]
    pub experts: BTreeMap<String, ExpertEndpoint>,
    #[serde(default)]
    pub vlm_endpoint: Option<String>,
    #[serde(default = "d_timeout")]
    pub timeout_secs: u64,
    /// Metadata hint consumed by the stub video-type classifier.
    #[serde(default)]
    pub video_type: Option<String>,
    #[serde(default)]
    pub text_prompt: Option<String>,
}

fn d_tier() -> u8 {
    1
}
fn d_alpha() -> f64 {
    0.5
}
fn d_timeout() -> u64 {
    crate::clients::DEFAULT_TIMEOUT_SECS
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.tier > 2 {
            return Err(Error::Config(format!("tier must be 0..2, got {}", self.tier)));
        }
        let t = &self.thresholds;
        if !(t.tau_low > 0.0 && t.tau_low <= t.tau_high && t.tau_high < 1.0) {
            return Err(Error::Config("thresholds must satisfy 0 < tau_low <= tau_high < 1".into()));
        }
        if t.l_min < 1 {
            return Err(Error::Config("l_min must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config("alpha must be in [0, 1]".into()));
        }
        if t.theta_shot <= 0.0 {
            return Err(Error::Config("theta_shot must be > 0".into()));
        }
        Ok(())
    }

    /// Endpoint for an expert after applying the env override.
    pub fn expert_endpoint(&self, name: &str) -> Option<ExpertEndpoint> {
        let env_key = format!(
            "QROUTER_EXPERT_{}_ENDPOINT",
            name.to_ascii_uppercase().replace('-', "_")
        );
        if let Ok(url) = std::env::var(&env_key) {
            let mut ep = self.experts.get(name).cloned().unwrap_or_default();
            ep.endpoint = url;
            return Some(ep);
        }
        self.experts.get(name).cloned()
    }

    pub fn budget(&self) -> SelectionBudget {
        SelectionBudget {
            k_top: self.budgets.k_top,
            k_fps: self.budgets.k_fps,
        }
    }
}
