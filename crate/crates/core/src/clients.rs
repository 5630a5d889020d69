//! Wire clients for expert scorers and the VLM frame filter, plus the
//! deterministic mocks used for offline runs and tests.

use std::io::Write;
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::localization::{parse_label, ArtifactLabel};
use crate::media::Frame;

/// Default request timeout.
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("timeout: {0}")]
    Timeout(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("score out of range: {0}")]
    OutOfRange(f64),
    #[error("transport error: {0}")]
    Transport(String),
}

/// Scoring request sent to an expert endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpertRequest {
    pub video_ref: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub video_type_hint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text_prompt: Option<String>,
}

/// Expert score on the [0, 100] scale with optional explanation factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpertResponse {
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<std::collections::BTreeMap<String, f64>>,
}

/// An expert scoring backend.
pub trait ExpertScorer {
    fn score(&self, request: &ExpertRequest) -> Result<ExpertResponse, ClientError>;
}

/// A VLM frame-classification backend.
pub trait FrameClassifier {
    fn classify(&self, frame: &Frame) -> Result<ArtifactLabel, ClientError>;
}

fn validate_score(resp: ExpertResponse) -> Result<ExpertResponse, ClientError> {
    if !(0.0..=100.0).contains(&resp.score) || !resp.score.is_finite() {
        return Err(ClientError::OutOfRange(resp.score));
    }
    Ok(resp)
}

/// HTTP expert client: POST the request as JSON, parse `{score, factors?}`.
/// Out-of-range scores are errors, never clamped.
pub struct HttpExpert {
    pub endpoint: String,
    pub timeout: Duration,
    pub bearer_token: Option<String>,
}

impl HttpExpert {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpExpert {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
            bearer_token: None,
        }
    }

    fn post(&self, body: &str) -> Result<String, ClientError> {
        let mut req = ureq::post(&self.endpoint)
            .timeout(self.timeout)
            .set("content-type", "application/json");
        if let Some(token) = &self.bearer_token {
            req = req.set("authorization", &format!("Bearer {}", token));
        }
        match req.send_string(body) {
            Ok(resp) => resp
                .into_string()
                .map_err(|e| ClientError::Transport(e.to_string())),
            Err(ureq::Error::Status(code, resp)) => Err(ClientError::Protocol(format!(
                "status {}: {}",
                code,
                resp.into_string().unwrap_or_default()
            ))),
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                if msg.contains("timed out") || msg.contains("timeout") {
                    Err(ClientError::Timeout(msg))
                } else {
                    Err(ClientError::Transport(msg))
                }
            }
        }
    }
}

impl ExpertScorer for HttpExpert {
    fn score(&self, request: &ExpertRequest) -> Result<ExpertResponse, ClientError> {
        let body = serde_json::to_string(request)
            .map_err(|e| ClientError::Protocol(e.to_string()))?;
        let text = self.post(&body)?;
        let resp: ExpertResponse = serde_json::from_str(&text)
            .map_err(|e| ClientError::Protocol(format!("malformed body: {}", e)))?;
        validate_score(resp)
    }
}

/// HTTP VLM classifier: POSTs `{frame_ppm_base64}` and expects one of the
/// closed responses "1"/"2"/"3"/"no".
pub struct HttpClassifier {
    pub endpoint: String,
    pub timeout: Duration,
    pub bearer_token: Option<String>,
}

impl HttpClassifier {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpClassifier {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
            bearer_token: None,
        }
    }
}

fn frame_to_ppm_bytes(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.pixels.len() + 32);
    write!(out, "P6\n{} {}\n255\n", frame.width, frame.height).unwrap();
    out.extend_from_slice(&frame.pixels);
    out
}

impl FrameClassifier for HttpClassifier {
    fn classify(&self, frame: &Frame) -> Result<ArtifactLabel, ClientError> {
        let encoded = base64::engine::general_purpose::STANDARD.encode(frame_to_ppm_bytes(frame));
        let body = serde_json::json!({ "frame_ppm_base64": encoded }).to_string();
        let mut req = ureq::post(&self.endpoint)
            .timeout(self.timeout)
            .set("content-type", "application/json");
        if let Some(token) = &self.bearer_token {
            req = req.set("authorization", &format!("Bearer {}", token));
        }
        let text = match req.send_string(&body) {
            Ok(resp) => resp
                .into_string()
                .map_err(|e| ClientError::Transport(e.to_string()))?,
            Err(ureq::Error::Status(code, _)) => {
                return Err(ClientError::Protocol(format!("status {}", code)))
            }
            Err(ureq::Error::Transport(t)) => return Err(ClientError::Transport(t.to_string())),
        };
        parse_label(&text)
            .ok_or_else(|| ClientError::Protocol(format!("response outside closed set: {:?}", text)))
    }
}

/// Deterministic mock expert: score = stable hash of (name, video_ref, seed)
/// mapped uniformly into [0, 100]. Stable across runs and platforms.
pub struct MockExpert {
    pub name: String,
    pub seed: u64,
}

impl MockExpert {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        MockExpert {
            name: name.into(),
            seed,
        }
    }
}

impl ExpertScorer for MockExpert {
    fn score(&self, request: &ExpertRequest) -> Result<ExpertResponse, ClientError> {
        let mut hasher = Sha256::new();
        hasher.update(self.name.as_bytes());
        hasher.update([0]);
        hasher.update(request.video_ref.as_bytes());
        hasher.update([0]);
        hasher.update(self.seed.to_le_bytes());
        let digest = hasher.finalize();
        let raw = u64::from_le_bytes(digest[..8].try_into().unwrap());
        let score = (raw as f64 / u64::MAX as f64) * 100.0;
        Ok(ExpertResponse {
            score,
            factors: None,
        })
    }
}

/// Mock classifier returning a fixed label for every frame.
pub struct MockClassifier {
    pub label: ArtifactLabel,
}

impl Default for MockClassifier {
    fn default() -> Self {
        MockClassifier {
            label: ArtifactLabel::ImageArtifact,
        }
    }
}

impl FrameClassifier for MockClassifier {
    fn classify(&self, _frame: &Frame) -> Result<ArtifactLabel, ClientError> {
        Ok(self.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write as IoWrite};
    use std::net::TcpListener;

    fn request(video: &str) -> ExpertRequest {
        ExpertRequest {
            video_ref: video.into(),
            video_type_hint: None,
            text_prompt: None,
        }
    }

    #[test]
    fn mock_expert_deterministic_and_in_range() {
        let e = MockExpert::new("COVER", 7);
        let a = e.score(&request("vid1")).unwrap();
        let b = e.score(&request("vid1")).unwrap();
        assert_eq!(a.score, b.score);
        assert!((0.0..=100.0).contains(&a.score));
        let other_seed = MockExpert::new("COVER", 8).score(&request("vid1")).unwrap();
        assert_ne!(a.score, other_seed.score);
    }

    #[test]
    fn out_of_range_score_is_error() {
        let resp = ExpertResponse {
            score: 150.0,
            factors: None,
        };
        assert!(matches!(
            validate_score(resp),
            Err(ClientError::OutOfRange(_))
        ));
    }

    // One-shot HTTP server answering a fixed body.
    fn serve_once(body: &'static str) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut content_len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    content_len = v.trim().parse().unwrap();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut buf = vec![0u8; content_len];
            reader.read_exact(&mut buf).unwrap();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\ncontent-length: {}\r\n\r\n{}",
                body.len(),
                body
            )
            .unwrap();
        });
        format!("http://{}", addr)
    }

    #[test]
    fn http_expert_parses_score() {
        let url = serve_once("{\"score\": 73.5}");
        let client = HttpExpert::new(url);
        let resp = client.score(&request("vid1")).unwrap();
        assert_eq!(resp.score, 73.5);
    }

    #[test]
    fn http_expert_rejects_out_of_range() {
        let url = serve_once("{\"score\": 150}");
        let client = HttpExpert::new(url);
        assert!(matches!(
            client.score(&request("vid1")),
            Err(ClientError::OutOfRange(_))
        ));
    }

    #[test]
    fn http_expert_unreachable_is_transport() {
        let client = HttpExpert::new("http://127.0.0.1:1/unreachable");
        assert!(matches!(
            client.score(&request("vid1")),
            Err(ClientError::Transport(_) | ClientError::Timeout(_))
        ));
    }

    #[test]
    fn http_classifier_maps_closed_set() {
        let url = serve_once("3");
        let client = HttpClassifier::new(url);
        let label = client.classify(&Frame::filled(2, 2, [0, 0, 0])).unwrap();
        assert_eq!(label, ArtifactLabel::AiInconsistency);
        let url = serve_once("maybe");
        let client = HttpClassifier::new(url);
        assert!(matches!(
            client.classify(&Frame::filled(2, 2, [0, 0, 0])),
            Err(ClientError::Protocol(_))
        ));
    }
}
