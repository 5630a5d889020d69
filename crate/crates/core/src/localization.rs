//! Tier-2 artifact localization: VLM frame filtering, motion-compensated
//! perceptual difference maps, severity pooling, and heatmap/overlay output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clients::FrameClassifier;
use crate::clips::{Clip, ClipSet};
use crate::error::Error;
use crate::features::gradient_magnitudes;
use crate::media::{self, Frame, FrameSequence, GrayFrame};
use crate::selection::SelectedFrames;

/// VLM frame classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArtifactLabel {
    Hallucination,
    ImageArtifact,
    AiInconsistency,
    None,
}

impl ArtifactLabel {
    pub fn is_flagged(&self) -> bool {
        !matches!(self, ArtifactLabel::None)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ArtifactLabel::Hallucination => "hallucination",
            ArtifactLabel::ImageArtifact => "image_artifact",
            ArtifactLabel::AiInconsistency => "ai_inconsistency",
            ArtifactLabel::None => "none",
        }
    }
}

/// Per-pixel displacement field on the frame grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    /// (dx, dy) per pixel, row-major.
    pub vectors: Vec<(f64, f64)>,
}

impl FlowField {
    pub fn zero(width: usize, height: usize) -> Self {
        FlowField {
            width,
            height,
            vectors: vec![(0.0, 0.0); width * height],
        }
    }
}

/// Normalized per-pixel intensity map, all values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// Raw (unnormalized) difference map.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// Outcome for one retained clip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClipResult {
    pub clip_start: usize,
    pub clip_end: usize,
    pub severity: f64,
    /// Representative consecutive pair (t, t+1).
    pub pair: (usize, usize),
    pub label: ArtifactLabel,
    pub heatmap_path: String,
    pub overlay_path: String,
}

/// Run summary written next to the heatmaps.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct LocalizationSummary {
    pub clips: Vec<ClipResult>,
    pub warnings: Vec<String>,
}

/// Optical-flow backend. The default is integer block matching; heavier
/// estimators can be plugged in behind this trait.
pub trait FlowBackend {
    fn estimate(&self, f1: &Frame, f2: &Frame) -> Result<FlowField, Error>;
}

/// Perceptual difference backend. The default is a deterministic
/// luma+gradient proxy; a remote learned-metric client may substitute.
pub trait PerceptualMetric {
    fn difference(&self, f1: &Frame, w2: &Frame) -> Result<RawMap, Error>;
}

/// Block-matching flow: 8x8 blocks, search radius 7, SAD on luma, ties
/// broken toward the zero displacement.
pub struct BlockMatchingFlow {
    pub block: usize,
    pub radius: isize,
}

impl Default for BlockMatchingFlow {
    fn default() -> Self {
        BlockMatchingFlow { block: 8, radius: 7 }
    }
}

fn check_dims(f1: &Frame, f2: &Frame) -> Result<(), Error> {
    if f1.width != f2.width || f1.height != f2.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            f1.width, f1.height, f2.width, f2.height
        )));
    }
    Ok(())
}

impl FlowBackend for BlockMatchingFlow {
    fn estimate(&self, f1: &Frame, f2: &Frame) -> Result<FlowField, Error> {
        check_dims(f1, f2)?;
        let g1 = media::to_gray(f1);
        let g2 = media::to_gray(f2);
        let (w, h) = (g1.width, g1.height);
        let mut flow = FlowField::zero(w, h);
        let bs = self.block;
        let mut by = 0;
        while by < h {
            let bh = bs.min(h - by);
            let mut bx = 0;
            while bx < w {
                let bw = bs.min(w - bx);
                let (dx, dy) = self.match_block(&g1, &g2, bx, by, bw, bh);
                for y in by..by + bh {
                    for x in bx..bx + bw {
                        flow.vectors[y * w + x] = (dx as f64, dy as f64);
                    }
                }
                bx += bs;
            }
            by += bs;
        }
        Ok(flow)
    }
}

impl BlockMatchingFlow {
    fn sad(
        g1: &GrayFrame,
        g2: &GrayFrame,
        bx: usize,
        by: usize,
        bw: usize,
        bh: usize,
        dx: isize,
        dy: isize,
    ) -> Option<u64> {
        let (w, h) = (g1.width as isize, g1.height as isize);
        let ox = bx as isize + dx;
        let oy = by as isize + dy;
        if ox < 0 || oy < 0 || ox + bw as isize > w || oy + bh as isize > h {
            return None;
        }
        let mut sum = 0u64;
        for y in 0..bh {
            for x in 0..bw {
                let a = g1.get(bx + x, by + y) as i64;
                let b = g2.get((ox as usize) + x, (oy as usize) + y) as i64;
                sum += (a - b).unsigned_abs();
            }
        }
        Some(sum)
    }

    fn match_block(
        &self,
        g1: &GrayFrame,
        g2: &GrayFrame,
        bx: usize,
        by: usize,
        bw: usize,
        bh: usize,
    ) -> (isize, isize) {
        let mut best = (0isize, 0isize);
        let mut best_cost = match Self::sad(g1, g2, bx, by, bw, bh, 0, 0) {
            Some(c) => c,
            None => return best,
        };
        let mut best_norm = 0isize;
        for dy in -self.radius..=self.radius {
            for dx in -self.radius..=self.radius {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let Some(cost) = Self::sad(g1, g2, bx, by, bw, bh, dx, dy) else {
                    continue;
                };
                let norm = dx.abs() + dy.abs();
                // strictly better cost wins; equal cost prefers the smaller
                // displacement, then row-major scan order
                if cost < best_cost || (cost == best_cost && norm < best_norm) {
                    best = (dx, dy);
                    best_cost = cost;
                    best_norm = norm;
                }
            }
        }
        best
    }
}

/// Map the selected frames through the classification client.
pub fn vlm_filter(
    selected: &SelectedFrames,
    seq: &FrameSequence,
    client: &dyn FrameClassifier,
) -> Result<BTreeMap<usize, ArtifactLabel>, Error> {
    let mut labels = BTreeMap::new();
    for &t in &selected.indices {
        labels.insert(t, client.classify(seq.frame(t))?);
    }
    Ok(labels)
}

/// Retain exactly the clips containing at least one flagged frame. Padding
/// frames count toward membership.
pub fn restrict_clips(clips: &ClipSet, labels: &BTreeMap<usize, ArtifactLabel>) -> ClipSet {
    let retained = clips
        .clips
        .iter()
        .filter(|c| {
            labels
                .iter()
                .any(|(&t, l)| l.is_flagged() && c.contains(t))
        })
        .copied()
        .collect();
    ClipSet { clips: retained }
}

/// Backward warp with bilinear sampling; out-of-bounds samples clamp to the
/// border. out(x) = f2(x + flow(x)).
pub fn warp(f2: &Frame, flow: &FlowField) -> Frame {
    let (w, h) = (f2.width, f2.height);
    assert_eq!((flow.width, flow.height), (w, h), "flow grid mismatch");
    let mut out = Frame::filled(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = flow.vectors[y * w + x];
            let sx = (x as f64 + dx).clamp(0.0, (w - 1) as f64);
            let sy = (y as f64 + dy).clamp(0.0, (h - 1) as f64);
            let x0 = sx.floor() as usize;
            let y0 = sy.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(h - 1);
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                let p00 = f2.rgb(x0, y0)[c] as f64;
                let p10 = f2.rgb(x1, y0)[c] as f64;
                let p01 = f2.rgb(x0, y1)[c] as f64;
                let p11 = f2.rgb(x1, y1)[c] as f64;
                let v = p00 * (1.0 - fx) * (1.0 - fy)
                    + p10 * fx * (1.0 - fy)
                    + p01 * (1.0 - fx) * fy
                    + p11 * fx * fy;
                rgb[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out.set_rgb(x, y, rgb);
        }
    }
    out
}

/// Luma + gradient proxy metric: per-pixel weighted sum of absolute luma
/// difference and Sobel gradient-magnitude difference, each box-blurred 3x3.
pub struct ProxyMetric {
    pub luma_weight: f64,
    pub gradient_weight: f64,
}

impl Default for ProxyMetric {
    fn default() -> Self {
        ProxyMetric {
            luma_weight: 0.5,
            gradient_weight: 0.5,
        }
    }
}

/// 3x3 box blur; each output is the mean of the in-bounds neighbors.
fn box_blur3(values: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            let mut count = 0.0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let nx = x as isize + dx;
                    let ny = y as isize + dy;
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    sum += values[ny as usize * w + nx as usize];
                    count += 1.0;
                }
            }
            out[y * w + x] = sum / count;
        }
    }
    out
}

/// Interior Sobel gradient magnitude on the full grid, 0 at the border.
fn gradient_grid(gray: &GrayFrame) -> Vec<f64> {
    let (w, h) = (gray.width, gray.height);
    let mut out = vec![0.0; w * h];
    if w >= 3 && h >= 3 {
        let interior = gradient_magnitudes(gray);
        let mut it = interior.into_iter();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                out[y * w + x] = it.next().unwrap();
            }
        }
    }
    out
}

impl PerceptualMetric for ProxyMetric {
    fn difference(&self, f1: &Frame, w2: &Frame) -> Result<RawMap, Error> {
        check_dims(f1, w2)?;
        let g1 = media::to_gray(f1);
        let g2 = media::to_gray(w2);
        let (w, h) = (g1.width, g1.height);
        let luma_diff: Vec<f64> = g1
            .pixels
            .iter()
            .zip(&g2.pixels)
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .collect();
        let grad1 = gradient_grid(&g1);
        let grad2 = gradient_grid(&g2);
        let grad_diff: Vec<f64> = grad1
            .iter()
            .zip(&grad2)
            .map(|(&a, &b)| (a - b).abs())
            .collect();
        let luma_blur = box_blur3(&luma_diff, w, h);
        let grad_blur = box_blur3(&grad_diff, w, h);
        let values = luma_blur
            .iter()
            .zip(&grad_blur)
            .map(|(&l, &g)| self.luma_weight * l + self.gradient_weight * g)
            .collect();
        Ok(RawMap {
            width: w,
            height: h,
            values,
        })
    }
}

/// Min-max normalization to [0, 1]; constant maps normalize to all zeros.
pub fn normalize_map(h: &RawMap) -> Heatmap {
    let min = h.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = h.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = if max > min {
        h.values.iter().map(|&v| (v - min) / (max - min)).collect()
    } else {
        vec![0.0; h.values.len()]
    };
    Heatmap {
        width: h.width,
        height: h.height,
        values,
    }
}

/// Mean pooling over the heatmap.
pub fn severity(hm: &Heatmap) -> f64 {
    if hm.values.is_empty() {
        return 0.0;
    }
    hm.values.iter().sum::<f64>() / hm.values.len() as f64
}

/// Piecewise-linear blue -> green -> red colormap over [0, 0.5, 1].
pub fn colormap(v: f64) -> [f64; 3] {
    let v = v.clamp(0.0, 1.0);
    if v <= 0.5 {
        let t = v / 0.5;
        [0.0, 255.0 * t, 255.0 * (1.0 - t)]
    } else {
        let t = (v - 0.5) / 0.5;
        [255.0 * t, 255.0 * (1.0 - t), 0.0]
    }
}

/// Blend the colorized heatmap over the frame:
/// out = round((1 - alpha) * f1 + alpha * colormap(hm)).
pub fn render_overlay(f1: &Frame, hm: &Heatmap, alpha: f64) -> Frame {
    assert!((0.0..=1.0).contains(&alpha));
    assert_eq!((hm.width, hm.height), (f1.width, f1.height));
    let mut out = f1.clone();
    for y in 0..f1.height {
        for x in 0..f1.width {
            let cm = colormap(hm.values[y * f1.width + x]);
            let src = f1.rgb(x, y);
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                let v = (1.0 - alpha) * src[c] as f64 + alpha * cm[c];
                rgb[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out.set_rgb(x, y, rgb);
        }
    }
    out
}

fn heatmap_to_gray(hm: &Heatmap) -> GrayFrame {
    GrayFrame {
        width: hm.width,
        height: hm.height,
        pixels: hm
            .values
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect(),
    }
}

/// Dominant flagged label inside a clip, earliest flagged frame wins.
fn clip_label(clip: &Clip, labels: &BTreeMap<usize, ArtifactLabel>) -> ArtifactLabel {
    labels
        .iter()
        .find(|(&t, l)| l.is_flagged() && clip.contains(t))
        .map(|(_, &l)| l)
        .unwrap_or(ArtifactLabel::None)
}

/// Per-clip severity scan: evaluate all consecutive pairs, keep the
/// maximum-severity pair (ties toward the earlier pair), write its heatmap
/// (PGM) and overlay (PPM), and emit a JSON summary file.
#[allow(clippy::too_many_arguments)]
pub fn localize(
    seq: &FrameSequence,
    clips: &ClipSet,
    labels: &BTreeMap<usize, ArtifactLabel>,
    flow: &dyn FlowBackend,
    metric: &dyn PerceptualMetric,
    alpha: f64,
    out_dir: &Path,
) -> Result<LocalizationSummary, Error> {
    std::fs::create_dir_all(out_dir)?;
    let mut summary = LocalizationSummary::default();
    for clip in &clips.clips {
        if clip.len() < 2 {
            summary.warnings.push(format!(
                "clip {}-{} has a single frame, no consecutive pair; skipped",
                clip.start, clip.end
            ));
            continue;
        }
        let mut best: Option<(f64, (usize, usize), Heatmap)> = None;
        for t in clip.start..clip.end {
            let f1 = seq.frame(t);
            let f2 = seq.frame(t + 1);
            let field = flow.estimate(f1, f2)?;
            let warped = warp(f2, &field);
            let raw = metric.difference(f1, &warped)?;
            let hm = normalize_map(&raw);
            let sev = severity(&hm);
            let replace = match &best {
                None => true,
                Some((bs, _, _)) => sev > *bs,
            };
            if replace {
                best = Some((sev, (t, t + 1), hm));
            }
        }
        let (sev, pair, hm) = best.unwrap();
        let stem = format!("clip{}-{}", clip.start, clip.end);
        let heatmap_path = out_dir.join(format!("{}_heat.pgm", stem));
        let overlay_path = out_dir.join(format!("{}_overlay.ppm", stem));
        media::write_pgm(&heatmap_path, &heatmap_to_gray(&hm))?;
        let overlay = render_overlay(seq.frame(pair.0), &hm, alpha);
        media::write_ppm(&overlay_path, &overlay)?;
        summary.clips.push(ClipResult {
            clip_start: clip.start,
            clip_end: clip.end,
            severity: sev,
            pair,
            label: clip_label(clip, labels),
            heatmap_path: heatmap_path.display().to_string(),
            overlay_path: overlay_path.display().to_string(),
        });
    }
    let summary_path: PathBuf = out_dir.join("localization.json");
    std::fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)?;
    Ok(summary)
}

/// Parse a VLM filter response: "1"/"2"/"3"/"no", case-insensitive, trimmed.
pub fn parse_label(text: &str) -> Option<ArtifactLabel> {
    match text.trim().to_ascii_lowercase().as_str() {
        "1" => Some(ArtifactLabel::Hallucination),
        "2" => Some(ArtifactLabel::ImageArtifact),
        "3" => Some(ArtifactLabel::AiInconsistency),
        "no" => Some(ArtifactLabel::None),
        _ => None,
    }
}
