//! Multi-tier video-quality routing engine.
//!
//! The pipeline extracts lightweight per-frame features, flags suspicious
//! clips with a hysteresis detector, localizes artifacts with motion-
//! compensated difference maps, routes the video to a pool of quality
//! experts, and fuses their scores into a strict seven-field JSON report.

pub mod clients;
pub mod clips;
pub mod config;
pub mod error;
pub mod eval;
pub mod extractor;
pub mod features;
pub mod fusion;
pub mod localization;
pub mod media;
pub mod pipeline;
pub mod routing;
pub mod selection;

pub use error::Error;
