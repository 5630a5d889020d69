//! The seven per-frame low-level artifact features.
//!
//! Per frame: motion residual, Laplacian variance, gradient kurtosis, Canny
//! edge density, HSV-histogram Bhattacharyya distance to the previous frame,
//! and two content priors (stubbed to 0 unless a detector is plugged in).

use crate::error::Error;
use crate::media::{self, Frame, FrameSequence, GrayFrame, HsvHistogram, DEFAULT_BINS};

pub const FEATURE_DIM: usize = 7;

/// Feature column indices, fixed order.
pub mod dim {
    pub const DIFF_MEAN: usize = 0;
    pub const LAP_VAR: usize = 1;
    pub const GRAD_KURTOSIS: usize = 2;
    pub const EDGE_DENSITY: usize = 3;
    pub const HIST_DIST_PREV: usize = 4;
    pub const FACE: usize = 5;
    pub const TEXT: usize = 6;
}

/// One frame's feature row.
pub type FeatureVector = [f64; FEATURE_DIM];

/// Per-frame feature rows, index t-1 holds frame t.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Mean absolute per-pixel luma difference.
pub fn motion_residual(prev: &GrayFrame, cur: &GrayFrame) -> Result<f64, Error> {
    if prev.width != cur.width || prev.height != cur.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            prev.width, prev.height, cur.width, cur.height
        )));
    }
    let n = (prev.width * prev.height) as f64;
    let sum: f64 = prev
        .pixels
        .iter()
        .zip(&cur.pixels)
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum();
    Ok(sum / n)
}

/// 4-neighbor Laplacian responses over the interior of a gray frame.
fn laplacian_interior(gray: &GrayFrame) -> Vec<f64> {
    let (w, h) = (gray.width, gray.height);
    let mut out = Vec::with_capacity((w.saturating_sub(2)) * (h.saturating_sub(2)));
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let c = gray.get(x, y) as f64;
            let r = gray.get(x, y - 1) as f64
                + gray.get(x, y + 1) as f64
                + gray.get(x - 1, y) as f64
                + gray.get(x + 1, y) as f64
                - 4.0 * c;
            out.push(r);
        }
    }
    out
}

/// Population variance of the interior 4-neighbor Laplacian response.
/// Frames smaller than 3x3 return 0.
pub fn laplacian_variance(gray: &GrayFrame) -> f64 {
    if gray.width < 3 || gray.height < 3 {
        return 0.0;
    }
    let resp = laplacian_interior(gray);
    population_variance(&resp)
}

fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// 3x3 Sobel gradient (gx, gy) at an interior pixel.
fn sobel_at(gray: &GrayFrame, x: usize, y: usize) -> (f64, f64) {
    let p = |dx: isize, dy: isize| {
        gray.get(
            (x as isize + dx) as usize,
            (y as isize + dy) as usize,
        ) as f64
    };
    let gx = -p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1) + p(1, -1) + 2.0 * p(1, 0) + p(1, 1);
    let gy = -p(-1, -1) - 2.0 * p(0, -1) - p(1, -1) + p(-1, 1) + 2.0 * p(0, 1) + p(1, 1);
    (gx, gy)
}

/// Sobel gradient magnitudes over interior pixels.
pub fn gradient_magnitudes(gray: &GrayFrame) -> Vec<f64> {
    let (w, h) = (gray.width, gray.height);
    let mut out = Vec::new();
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let (gx, gy) = sobel_at(gray, x, y);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Non-excess kurtosis mu4/sigma^4 of a value multiset; 0 when sigma = 0.
pub fn kurtosis(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var == 0.0 {
        return 0.0;
    }
    let mu4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    mu4 / (var * var)
}

/// Kurtosis of the interior Sobel gradient-magnitude distribution.
pub fn gradient_kurtosis(gray: &GrayFrame) -> f64 {
    if gray.width < 3 || gray.height < 3 {
        return 0.0;
    }
    kurtosis(&gradient_magnitudes(gray))
}

/// Canny parameterization used throughout: Gaussian sigma 1.4 (5x5 kernel),
/// hysteresis thresholds 50/150 on the 0-255-clamped Sobel magnitude,
/// 8-connected edge linking.
pub const CANNY_SIGMA: f64 = 1.4;
pub const CANNY_LOW: f64 = 50.0;
pub const CANNY_HIGH: f64 = 150.0;

fn gaussian_kernel_5(sigma: f64) -> [f64; 5] {
    let mut k = [0.0; 5];
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - 2.0;
        *v = (-d * d / (2.0 * sigma * sigma)).exp();
        sum += *v;
    }
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable 5x5 Gaussian blur with replicated borders, returned as f64.
fn gaussian_blur(gray: &GrayFrame) -> Vec<f64> {
    let (w, h) = (gray.width, gray.height);
    let k = gaussian_kernel_5(CANNY_SIGMA);
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in k.iter().enumerate() {
                let sx = clamp(x as isize + i as isize - 2, w);
                acc += kv * gray.get(sx, y) as f64;
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in k.iter().enumerate() {
                let sy = clamp(y as isize + i as isize - 2, h);
                acc += kv * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Binary Canny edge map (true = edge pixel).
pub fn canny_edges(gray: &GrayFrame) -> Vec<bool> {
    let (w, h) = (gray.width, gray.height);
    let mut edges = vec![false; w * h];
    if w < 3 || h < 3 {
        return edges;
    }
    let smooth = gaussian_blur(gray);
    let mut mag = vec![0.0f64; w * h];
    let mut dir = vec![0u8; w * h]; // quantized: 0 = E-W, 1 = NE-SW, 2 = N-S, 3 = NW-SE
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| {
                smooth[(y as isize + dy) as usize * w + (x as isize + dx) as usize]
            };
            let gx =
                -p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1) + p(1, -1) + 2.0 * p(1, 0) + p(1, 1);
            let gy =
                -p(-1, -1) - 2.0 * p(0, -1) - p(1, -1) + p(-1, 1) + 2.0 * p(0, 1) + p(1, 1);
            let m = (gx * gx + gy * gy).sqrt().min(255.0);
            mag[y * w + x] = m;
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            dir[y * w + x] = if !(22.5..157.5).contains(&angle) {
                0
            } else if angle < 67.5 {
                1
            } else if angle < 112.5 {
                2
            } else {
                3
            };
        }
    }
    // Non-maximum suppression along the gradient direction.
    let mut strong = Vec::new();
    let mut candidate = vec![false; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let m = mag[y * w + x];
            if m < CANNY_LOW {
                continue;
            }
            let (n1, n2) = match dir[y * w + x] {
                0 => (mag[y * w + x - 1], mag[y * w + x + 1]),
                1 => (mag[(y - 1) * w + x + 1], mag[(y + 1) * w + x - 1]),
                2 => (mag[(y - 1) * w + x], mag[(y + 1) * w + x]),
                _ => (mag[(y - 1) * w + x - 1], mag[(y + 1) * w + x + 1]),
            };
            if m >= n1 && m >= n2 {
                candidate[y * w + x] = true;
                if m >= CANNY_HIGH {
                    strong.push((x, y));
                    edges[y * w + x] = true;
                }
            }
        }
    }
    // Hysteresis: grow strong edges into 8-connected weak candidates.
    let mut stack = strong;
    while let Some((x, y)) = stack.pop() {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let idx = ny as usize * w + nx as usize;
                if candidate[idx] && !edges[idx] {
                    edges[idx] = true;
                    stack.push((nx as usize, ny as usize));
                }
            }
        }
    }
    edges
}

/// Fraction of pixels marked edge by the fixed Canny parameterization.
pub fn edge_density(gray: &GrayFrame) -> f64 {
    if gray.width < 3 || gray.height < 3 {
        return 0.0;
    }
    let edges = canny_edges(gray);
    edges.iter().filter(|&&e| e).count() as f64 / (gray.width * gray.height) as f64
}

/// Bhattacharyya coefficient floor keeping the distance finite for
/// disjoint histograms.
pub const BC_FLOOR: f64 = 1e-12;

/// Bhattacharyya distance -ln(sum sqrt(h1 * h2)) between unit-mass histograms.
pub fn bhattacharyya(h1: &HsvHistogram, h2: &HsvHistogram) -> Result<f64, Error> {
    if !h1.same_layout(h2) {
        return Err(Error::BinLayoutMismatch);
    }
    let bc: f64 = h1
        .bins
        .iter()
        .zip(&h2.bins)
        .map(|(&a, &b)| (a * b).sqrt())
        .sum();
    Ok(-bc.max(BC_FLOOR).min(1.0).ln())
}

/// Pluggable face/text prior detectors. The default build uses the zero stub.
pub trait ContentPriorDetector {
    fn priors(&self, frame: &Frame) -> (f64, f64);
}

/// Always (0, 0).
pub struct ZeroPriors;

impl ContentPriorDetector for ZeroPriors {
    fn priors(&self, _frame: &Frame) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Face/text priors, clamped to [0, 1].
pub fn content_priors(frame: &Frame, detector: &dyn ContentPriorDetector) -> (f64, f64) {
    let (f, t) = detector.priors(frame);
    (f.clamp(0.0, 1.0), t.clamp(0.0, 1.0))
}

/// Per-frame HSV histograms with the default bin layout, indexed t-1.
pub fn sequence_histograms(seq: &FrameSequence) -> Vec<HsvHistogram> {
    let (bh, bs, bv) = DEFAULT_BINS;
    seq.frames()
        .iter()
        .map(|f| media::to_hsv_histogram(f, bh, bs, bv))
        .collect()
}

/// Assemble the full feature matrix for a sequence. diff_mean and
/// hist_dist_prev are 0 at t = 1.
pub fn extract_features(seq: &FrameSequence) -> Result<FeatureMatrix, Error> {
    extract_features_with(seq, &ZeroPriors)
}

pub fn extract_features_with(
    seq: &FrameSequence,
    detector: &dyn ContentPriorDetector,
) -> Result<FeatureMatrix, Error> {
    let grays: Vec<GrayFrame> = seq.frames().iter().map(media::to_gray).collect();
    let hists = sequence_histograms(seq);
    let mut rows = Vec::with_capacity(seq.len());
    for t in 1..=seq.len() {
        let gray = &grays[t - 1];
        let diff_mean = if t > 1 {
            motion_residual(&grays[t - 2], gray)?
        } else {
            0.0
        };
        let hist_dist_prev = if t > 1 {
            bhattacharyya(&hists[t - 2], &hists[t - 1])?
        } else {
            0.0
        };
        let (face, text) = content_priors(seq.frame(t), detector);
        rows.push([
            diff_mean,
            laplacian_variance(gray),
            gradient_kurtosis(gray),
            edge_density(gray),
            hist_dist_prev,
            face,
            text,
        ]);
    }
    Ok(FeatureMatrix { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{to_gray, to_hsv_histogram, Frame};
    use proptest::prelude::*;

    fn gray(width: usize, height: usize, pixels: Vec<u8>) -> GrayFrame {
        assert_eq!(pixels.len(), width * height);
        GrayFrame {
            width,
            height,
            pixels,
        }
    }

    #[test]
    fn motion_residual_identical_is_zero() {
        let a = gray(2, 2, vec![7, 7, 7, 7]);
        assert_eq!(motion_residual(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn motion_residual_constant_difference() {
        let a = gray(2, 2, vec![0; 4]);
        let b = gray(2, 2, vec![255; 4]);
        assert_eq!(motion_residual(&a, &b).unwrap(), 255.0);
    }

    #[test]
    fn motion_residual_hand_case() {
        let a = gray(2, 1, vec![10, 20]);
        let b = gray(2, 1, vec![13, 26]);
        assert_eq!(motion_residual(&a, &b).unwrap(), 4.5);
    }

    #[test]
    fn motion_residual_dimension_mismatch() {
        let a = gray(2, 1, vec![0, 0]);
        let b = gray(1, 2, vec![0, 0]);
        assert!(motion_residual(&a, &b).is_err());
    }

    #[test]
    fn laplacian_variance_constant_is_zero() {
        let g = gray(5, 5, vec![42; 25]);
        assert_eq!(laplacian_variance(&g), 0.0);
    }

    #[test]
    fn laplacian_variance_linear_ramp_is_zero() {
        let mut px = Vec::new();
        for _ in 0..5 {
            for x in 0..5u8 {
                px.push(x * 10);
            }
        }
        assert_eq!(laplacian_variance(&gray(5, 5, px)), 0.0);
    }

    #[test]
    fn laplacian_variance_degenerate_small_frame() {
        assert_eq!(laplacian_variance(&gray(2, 2, vec![0, 100, 200, 50])), 0.0);
    }

    // Brute-force convolution oracle for the interior Laplacian.
    fn lap_var_oracle(g: &GrayFrame) -> f64 {
        let mut responses = Vec::new();
        for y in 1..g.height - 1 {
            for x in 1..g.width - 1 {
                responses.push(
                    g.get(x, y - 1) as f64 + g.get(x, y + 1) as f64 + g.get(x - 1, y) as f64
                        + g.get(x + 1, y) as f64
                        - 4.0 * g.get(x, y) as f64,
                );
            }
        }
        let n = responses.len() as f64;
        let mean = responses.iter().sum::<f64>() / n;
        responses.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn laplacian_variance_impulse_cases() {
        // 3x3 with center impulse: single interior response, variance 0.
        let mut px = vec![0u8; 9];
        px[4] = 100;
        assert_eq!(laplacian_variance(&gray(3, 3, px)), 0.0);
        // 5x5 with center impulse: compare against the brute-force oracle.
        let mut px = vec![0u8; 25];
        px[12] = 100;
        let g = gray(5, 5, px);
        assert_eq!(laplacian_variance(&g), lap_var_oracle(&g));
        assert!(laplacian_variance(&g) > 0.0);
    }

    #[test]
    fn gradient_kurtosis_constant_is_zero() {
        assert_eq!(gradient_kurtosis(&gray(4, 4, vec![9; 16])), 0.0);
    }

    #[test]
    fn kurtosis_degenerate_and_hand_case() {
        assert_eq!(kurtosis(&[1.0, 1.0, 1.0, 1.0]), 0.0);
        // multiset {0,0,0,10}: mu = 2.5, var = (3*6.25 + 56.25)/4 = 18.75,
        // mu4 = (3*39.0625 + 3164.0625)/4 = 820.3125, kurt = 820.3125/351.5625
        let k = kurtosis(&[0.0, 0.0, 0.0, 10.0]);
        assert_eq!(k, 820.3125 / 351.5625);
    }

    #[test]
    fn edge_density_constant_is_zero() {
        assert_eq!(edge_density(&gray(8, 8, vec![77; 64])), 0.0);
    }

    #[test]
    fn edge_density_in_unit_range() {
        let mut px = vec![0u8; 64];
        for (i, p) in px.iter_mut().enumerate() {
            *p = (i * 53 % 256) as u8;
        }
        let d = edge_density(&gray(8, 8, px));
        assert!((0.0..=1.0).contains(&d));
    }

    // Independent straight-line Canny reimplementation with the same
    // parameterization, used as an oracle for the step-edge case.
    fn canny_oracle(g: &GrayFrame) -> Vec<bool> {
        let (w, h) = (g.width, g.height);
        let sigma = 1.4f64;
        let mut kernel = [0.0f64; 5];
        for i in 0..5 {
            let d = i as f64 - 2.0;
            kernel[i] = (-d * d / (2.0 * sigma * sigma)).exp();
        }
        let ksum: f64 = kernel.iter().sum();
        let sample = |xx: isize, yy: isize| -> f64 {
            let x = xx.clamp(0, w as isize - 1) as usize;
            let y = yy.clamp(0, h as isize - 1) as usize;
            g.get(x, y) as f64
        };
        // full 2D 5x5 separable blur, written directly
        let mut smooth = vec![0.0f64; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                for ky in 0..5isize {
                    for kx in 0..5isize {
                        acc += kernel[ky as usize] * kernel[kx as usize]
                            * sample(x + kx - 2, y + ky - 2);
                    }
                }
                smooth[y as usize * w + x as usize] = acc / (ksum * ksum);
            }
        }
        let s = |x: usize, y: usize| smooth[y * w + x];
        let mut mag = vec![0.0f64; w * h];
        let mut ang = vec![0.0f64; w * h];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let gx = -s(x - 1, y - 1) - 2.0 * s(x - 1, y) - s(x - 1, y + 1)
                    + s(x + 1, y - 1)
                    + 2.0 * s(x + 1, y)
                    + s(x + 1, y + 1);
                let gy = -s(x - 1, y - 1) - 2.0 * s(x, y - 1) - s(x + 1, y - 1)
                    + s(x - 1, y + 1)
                    + 2.0 * s(x, y + 1)
                    + s(x + 1, y + 1);
                mag[y * w + x] = (gx * gx + gy * gy).sqrt().min(255.0);
                ang[y * w + x] = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            }
        }
        let mut cand = vec![false; w * h];
        let mut edges = vec![false; w * h];
        let mut frontier = Vec::new();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let m = mag[y * w + x];
                if m < 50.0 {
                    continue;
                }
                let a = ang[y * w + x];
                let (n1, n2) = if !(22.5..157.5).contains(&a) {
                    (mag[y * w + x - 1], mag[y * w + x + 1])
                } else if a < 67.5 {
                    (mag[(y - 1) * w + x + 1], mag[(y + 1) * w + x - 1])
                } else if a < 112.5 {
                    (mag[(y - 1) * w + x], mag[(y + 1) * w + x])
                } else {
                    (mag[(y - 1) * w + x - 1], mag[(y + 1) * w + x + 1])
                };
                if m >= n1 && m >= n2 {
                    cand[y * w + x] = true;
                    if m >= 150.0 {
                        edges[y * w + x] = true;
                        frontier.push((x, y));
                    }
                }
            }
        }
        while let Some((x, y)) = frontier.pop() {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let nx = x as isize + dx;
                    let ny = y as isize + dy;
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let i = ny as usize * w + nx as usize;
                    if cand[i] && !edges[i] {
                        edges[i] = true;
                        frontier.push((nx as usize, ny as usize));
                    }
                }
            }
        }
        edges
    }

    #[test]
    fn canny_step_edge_matches_oracle() {
        // 16x16 half-black/half-white vertical step at column 8.
        let mut px = vec![0u8; 256];
        for y in 0..16 {
            for x in 8..16 {
                px[y * 16 + x] = 255;
            }
        }
        let g = gray(16, 16, px);
        let edges = canny_edges(&g);
        let oracle = canny_oracle(&g);
        assert_eq!(edges, oracle);
        // Edges must be confined to a band around the step column.
        let count = edges.iter().filter(|&&e| e).count();
        assert!(count > 0);
        for y in 0..16 {
            for x in 0..16 {
                if edges[y * 16 + x] {
                    assert!((5..=10).contains(&x), "edge at x={}", x);
                }
            }
        }
    }

    fn hist2(a: f64, b: f64) -> HsvHistogram {
        HsvHistogram {
            bins_h: 2,
            bins_s: 1,
            bins_v: 1,
            bins: vec![a, b],
        }
    }

    #[test]
    fn bhattacharyya_identical_is_zero() {
        let f = Frame::filled(3, 3, [20, 40, 60]);
        let h = to_hsv_histogram(&f, 8, 4, 4);
        assert_eq!(bhattacharyya(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn bhattacharyya_disjoint_hits_clamp() {
        let d = bhattacharyya(&hist2(1.0, 0.0), &hist2(0.0, 1.0)).unwrap();
        assert!((d - (-(1e-12f64).ln())).abs() < 1e-9);
        assert!((d - 27.631).abs() < 1e-2);
    }

    #[test]
    fn bhattacharyya_half_overlap() {
        let d = bhattacharyya(&hist2(1.0, 0.0), &hist2(0.5, 0.5)).unwrap();
        assert!((d - (-(0.5f64.sqrt().ln()))).abs() < 1e-12);
        assert!((d - 0.34657).abs() < 1e-5);
    }

    #[test]
    fn bhattacharyya_layout_mismatch() {
        let h1 = hist2(1.0, 0.0);
        let h2 = HsvHistogram {
            bins_h: 3,
            bins_s: 1,
            bins_v: 1,
            bins: vec![1.0, 0.0, 0.0],
        };
        assert!(bhattacharyya(&h1, &h2).is_err());
    }

    #[test]
    fn content_priors_stub_and_clamp() {
        let f = Frame::filled(2, 2, [1, 2, 3]);
        assert_eq!(content_priors(&f, &ZeroPriors), (0.0, 0.0));
        struct Wild;
        impl ContentPriorDetector for Wild {
            fn priors(&self, _: &Frame) -> (f64, f64) {
                (3.5, -1.0)
            }
        }
        assert_eq!(content_priors(&f, &Wild), (1.0, 0.0));
    }

    #[test]
    fn extract_features_single_frame() {
        let seq = FrameSequence::new(vec![Frame::filled(4, 4, [10, 20, 30])]).unwrap();
        let m = extract_features(&seq).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.rows[0][dim::DIFF_MEAN], 0.0);
        assert_eq!(m.rows[0][dim::HIST_DIST_PREV], 0.0);
    }

    #[test]
    fn extract_features_identical_frames() {
        let f = Frame::filled(4, 4, [10, 20, 30]);
        let seq = FrameSequence::new(vec![f.clone(), f.clone(), f]).unwrap();
        let m = extract_features(&seq).unwrap();
        for row in &m.rows {
            assert_eq!(row[dim::DIFF_MEAN], 0.0);
            assert_eq!(row[dim::HIST_DIST_PREV], 0.0);
        }
    }

    #[test]
    fn extract_features_composes_sub_oracles() {
        let frames = vec![
            Frame::filled(4, 4, [0, 0, 0]),
            Frame::filled(4, 4, [100, 100, 100]),
            Frame::filled(4, 4, [0, 0, 255]),
        ];
        let seq = FrameSequence::new(frames.clone()).unwrap();
        let m = extract_features(&seq).unwrap();
        let g: Vec<GrayFrame> = frames.iter().map(to_gray).collect();
        let h: Vec<HsvHistogram> = frames
            .iter()
            .map(|f| to_hsv_histogram(f, 8, 4, 4))
            .collect();
        for t in 1..=3usize {
            let row = &m.rows[t - 1];
            if t > 1 {
                assert_eq!(row[dim::DIFF_MEAN], motion_residual(&g[t - 2], &g[t - 1]).unwrap());
                assert_eq!(
                    row[dim::HIST_DIST_PREV],
                    bhattacharyya(&h[t - 2], &h[t - 1]).unwrap()
                );
            }
            assert_eq!(row[dim::LAP_VAR], laplacian_variance(&g[t - 1]));
            assert_eq!(row[dim::GRAD_KURTOSIS], gradient_kurtosis(&g[t - 1]));
            assert_eq!(row[dim::EDGE_DENSITY], edge_density(&g[t - 1]));
            assert_eq!(row[dim::FACE], 0.0);
            assert_eq!(row[dim::TEXT], 0.0);
        }
    }

    proptest! {
        #[test]
        fn features_finite_on_random_frames(
            seed in 0u64..1000,
            w in 3usize..10,
            h in 3usize..10,
            t in 1usize..4,
        ) {
            let mut state = seed.wrapping_mul(2654435761).wrapping_add(1);
            let mut frames = Vec::new();
            for _ in 0..t {
                let mut px = Vec::with_capacity(3 * w * h);
                for _ in 0..3 * w * h {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    px.push((state >> 33) as u8);
                }
                frames.push(Frame::new(w, h, px).unwrap());
            }
            let seq = FrameSequence::new(frames).unwrap();
            let m = extract_features(&seq).unwrap();
            for row in &m.rows {
                for v in row {
                    prop_assert!(v.is_finite());
                }
                prop_assert!((0.0..=1.0).contains(&row[dim::EDGE_DENSITY]));
                prop_assert!(row[dim::DIFF_MEAN] >= 0.0);
                prop_assert!(row[dim::LAP_VAR] >= 0.0);
                prop_assert!(row[dim::HIST_DIST_PREV] >= 0.0);
            }
        }

        #[test]
        fn bhattacharyya_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let h1 = hist2(a, 1.0 - a);
            let h2 = hist2(b, 1.0 - b);
            let d12 = bhattacharyya(&h1, &h2).unwrap();
            let d21 = bhattacharyya(&h2, &h1).unwrap();
            prop_assert!((d12 - d21).abs() < 1e-12);
        }
    }

    #[test]
    fn per_frame_columns_invariant_under_reordering() {
        let frames = vec![
            Frame::filled(4, 4, [0, 0, 0]),
            Frame::filled(4, 4, [200, 10, 10]),
            Frame::filled(4, 4, [10, 200, 10]),
        ];
        let fwd = extract_features(&FrameSequence::new(frames.clone()).unwrap()).unwrap();
        let mut rev_frames = frames;
        rev_frames.reverse();
        let rev = extract_features(&FrameSequence::new(rev_frames).unwrap()).unwrap();
        for t in 0..3 {
            for &i in &[dim::LAP_VAR, dim::GRAD_KURTOSIS, dim::EDGE_DENSITY] {
                assert_eq!(fwd.rows[t][i], rev.rows[2 - t][i]);
            }
        }
    }
}
