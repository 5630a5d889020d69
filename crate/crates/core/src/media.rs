//! Frame ingestion and color-space primitives.
//!
//! Videos enter the pipeline as directories of binary PPM (P6) frames named
//! `0001.ppm`, `0002.ppm`, ... Everything downstream operates on the types
//! defined here.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Error;

/// A single RGB frame, 8 bits per channel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    /// RGB triples, length = 3 * width * height.
    pub pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, Error> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame("zero dimension".into()));
        }
        if pixels.len() != 3 * width * height {
            return Err(Error::InvalidFrame(format!(
                "pixel buffer length {} != 3*{}*{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    /// Uniform frame filled with one RGB color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(3 * width * height);
        for _ in 0..width * height {
            pixels.extend_from_slice(&rgb);
        }
        Frame {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set_rgb(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }
}

/// Ordered sequence of frames with uniform dimensions. Frame indices are
/// 1-based throughout the pipeline.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self, Error> {
        if frames.is_empty() {
            return Err(Error::NoFrames);
        }
        let (w, h) = (frames[0].width, frames[0].height);
        for (i, f) in frames.iter().enumerate() {
            if f.width != w || f.height != h {
                return Err(Error::DimensionMismatch(format!(
                    "frame {} is {}x{}, expected {}x{}",
                    i + 1,
                    f.width,
                    f.height,
                    w,
                    h
                )));
            }
        }
        Ok(FrameSequence { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false // T >= 1 by construction
    }

    /// Access by 1-based frame index.
    pub fn frame(&self, t: usize) -> &Frame {
        &self.frames[t - 1]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }
}

/// Single-channel 8-bit luma frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayFrame {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// L1-normalized HSV histogram over an H x S x V bin grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HsvHistogram {
    pub bins_h: usize,
    pub bins_s: usize,
    pub bins_v: usize,
    /// Flattened bins, index = (h * bins_s + s) * bins_v + v.
    pub bins: Vec<f64>,
}

impl HsvHistogram {
    pub fn same_layout(&self, other: &HsvHistogram) -> bool {
        self.bins_h == other.bins_h && self.bins_s == other.bins_s && self.bins_v == other.bins_v
    }
}

/// Default histogram bin counts (H x S x V).
pub const DEFAULT_BINS: (usize, usize, usize) = (8, 4, 4);

/// BT.601 luma conversion, rounded and clamped to [0, 255].
pub fn to_gray(frame: &Frame) -> GrayFrame {
    let mut pixels = Vec::with_capacity(frame.width * frame.height);
    for chunk in frame.pixels.chunks_exact(3) {
        let y = 0.299 * chunk[0] as f64 + 0.587 * chunk[1] as f64 + 0.114 * chunk[2] as f64;
        pixels.push(y.round().clamp(0.0, 255.0) as u8);
    }
    GrayFrame {
        width: frame.width,
        height: frame.height,
        pixels,
    }
}

/// Standard hexcone RGB -> HSV. Returns (h in [0,360), s in [0,1], v in [0,1]).
/// Hue of an achromatic pixel is 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let r = r as f64 / 255.0;
    let g = g as f64 / 255.0;
    let b = b as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (((g - b) / delta).rem_euclid(6.0))
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (h.rem_euclid(360.0), s, v)
}

/// L1-normalized HSV color histogram of a frame.
pub fn to_hsv_histogram(
    frame: &Frame,
    bins_h: usize,
    bins_s: usize,
    bins_v: usize,
) -> HsvHistogram {
    assert!(bins_h >= 1 && bins_s >= 1 && bins_v >= 1);
    let mut bins = vec![0.0f64; bins_h * bins_s * bins_v];
    let n = (frame.width * frame.height) as f64;
    for chunk in frame.pixels.chunks_exact(3) {
        let (h, s, v) = rgb_to_hsv(chunk[0], chunk[1], chunk[2]);
        let hi = ((h / 360.0 * bins_h as f64) as usize).min(bins_h - 1);
        let si = ((s * bins_s as f64) as usize).min(bins_s - 1);
        let vi = ((v * bins_v as f64) as usize).min(bins_v - 1);
        bins[(hi * bins_s + si) * bins_v + vi] += 1.0 / n;
    }
    HsvHistogram {
        bins_h,
        bins_s,
        bins_v,
        bins,
    }
}

fn parse_ppm_header<'a>(data: &'a [u8], path: &Path) -> Result<(usize, usize, usize), Error> {
    // P6 <width> <height> <maxval> followed by a single whitespace byte,
    // with #-comments allowed between tokens.
    let err = |msg: &str| Error::MalformedPpm(format!("{}: {}", path.display(), msg));
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 {
        while pos < data.len() && (data[pos] as char).is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !(data[pos] as char).is_ascii_whitespace() {
            pos += 1;
        }
        if pos == start {
            return Err(err("truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
        if tokens.len() == 4 {
            pos += 1; // single whitespace after maxval
        }
    }
    if tokens[0] != "P6" {
        return Err(err("not a binary P6 file"));
    }
    let width: usize = tokens[1].parse().map_err(|_| err("bad width"))?;
    let height: usize = tokens[2].parse().map_err(|_| err("bad height"))?;
    let maxval: usize = tokens[3].parse().map_err(|_| err("bad maxval"))?;
    if maxval != 255 {
        return Err(err("only maxval 255 supported"));
    }
    Ok((width, height, pos))
}

/// Read a binary P6 PPM file.
pub fn read_ppm(path: &Path) -> Result<Frame, Error> {
    let data = fs::read(path)?;
    let (width, height, offset) = parse_ppm_header(&data, path)?;
    let need = 3 * width * height;
    if data.len() < offset + need {
        return Err(Error::MalformedPpm(format!(
            "{}: pixel data truncated",
            path.display()
        )));
    }
    Frame::new(width, height, data[offset..offset + need].to_vec())
}

/// Write a frame as binary P6 PPM.
pub fn write_ppm(path: &Path, frame: &Frame) -> Result<(), Error> {
    let mut f = fs::File::create(path)?;
    write!(f, "P6\n{} {}\n255\n", frame.width, frame.height)?;
    f.write_all(&frame.pixels)?;
    Ok(())
}

/// Write a gray frame as binary P5 PGM.
pub fn write_pgm(path: &Path, gray: &GrayFrame) -> Result<(), Error> {
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", gray.width, gray.height)?;
    f.write_all(&gray.pixels)?;
    Ok(())
}

/// Load all `NNNN.ppm` frames from a directory, sorted by numeric index.
pub fn load_frame_dir(dir: &Path) -> Result<FrameSequence, Error> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.display().to_string()));
    }
    let mut entries: Vec<(u64, std::path::PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(stem) = name.strip_suffix(".ppm") {
            if let Ok(idx) = stem.parse::<u64>() {
                entries.push((idx, path));
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::NoFrames);
    }
    entries.sort_by_key(|(idx, _)| *idx);
    let mut frames = Vec::with_capacity(entries.len());
    for (_, path) in &entries {
        frames.push(read_ppm(path)?);
    }
    FrameSequence::new(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_frames(dir: &Path, frames: &[Frame]) {
        for (i, f) in frames.iter().enumerate() {
            write_ppm(&dir.join(format!("{:04}.ppm", i + 1)), f).unwrap();
        }
    }

    #[test]
    fn load_frame_dir_counts_and_sorts() {
        let dir = tempdir().unwrap();
        let frames = vec![
            Frame::filled(4, 4, [1, 2, 3]),
            Frame::filled(4, 4, [4, 5, 6]),
            Frame::filled(4, 4, [7, 8, 9]),
        ];
        write_frames(dir.path(), &frames);
        let seq = load_frame_dir(dir.path()).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.frame(2).rgb(0, 0), [4, 5, 6]);
    }

    #[test]
    fn load_frame_dir_rejects_dimension_mismatch() {
        let dir = tempdir().unwrap();
        write_ppm(&dir.path().join("0001.ppm"), &Frame::filled(2, 2, [0, 0, 0])).unwrap();
        write_ppm(&dir.path().join("0002.ppm"), &Frame::filled(4, 4, [0, 0, 0])).unwrap();
        assert!(matches!(
            load_frame_dir(dir.path()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn load_frame_dir_empty_is_error() {
        let dir = tempdir().unwrap();
        assert!(matches!(load_frame_dir(dir.path()), Err(Error::NoFrames)));
    }

    #[test]
    fn ppm_round_trip_is_byte_identical() {
        let dir = tempdir().unwrap();
        let mut f = Frame::filled(3, 2, [0, 0, 0]);
        for (i, p) in f.pixels.iter_mut().enumerate() {
            *p = (i * 37 % 256) as u8;
        }
        let path = dir.path().join("0001.ppm");
        write_ppm(&path, &f).unwrap();
        let back = read_ppm(&path).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn gray_black_and_white() {
        let black = to_gray(&Frame::filled(2, 2, [0, 0, 0]));
        assert!(black.pixels.iter().all(|&p| p == 0));
        let white = to_gray(&Frame::filled(2, 2, [255, 255, 255]));
        assert!(white.pixels.iter().all(|&p| p == 255));
    }

    #[test]
    fn gray_pure_red() {
        let g = to_gray(&Frame::filled(1, 1, [255, 0, 0]));
        assert_eq!(g.pixels[0], 76); // round(0.299 * 255)
    }

    #[test]
    fn gray_idempotent_on_gray_content() {
        let g = to_gray(&Frame::filled(2, 2, [123, 123, 123]));
        assert!(g.pixels.iter().all(|&p| p == 123));
    }

    #[test]
    fn histogram_single_color_single_bin() {
        let h = to_hsv_histogram(&Frame::filled(4, 4, [10, 200, 30]), 8, 4, 4);
        let nonzero: Vec<f64> = h.bins.iter().copied().filter(|&b| b > 0.0).collect();
        assert_eq!(nonzero, vec![1.0]);
    }

    #[test]
    fn histogram_unit_mass() {
        let mut f = Frame::filled(5, 3, [0, 0, 0]);
        for (i, p) in f.pixels.iter_mut().enumerate() {
            *p = (i * 91 % 256) as u8;
        }
        let h = to_hsv_histogram(&f, 8, 4, 4);
        let sum: f64 = h.bins.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(h.bins.iter().all(|&b| b >= 0.0));
    }

    #[test]
    fn histogram_red_blue_split() {
        // Pure red hue 0 -> bin 0; pure blue hue 240 -> bin 240/360*8 = 5.33 -> bin 5.
        let f = Frame::new(2, 1, vec![255, 0, 0, 0, 0, 255]).unwrap();
        let h = to_hsv_histogram(&f, 8, 1, 1);
        assert_eq!(h.bins[0], 0.5);
        assert_eq!(h.bins[5], 0.5);
        assert_eq!(h.bins.iter().filter(|&&b| b > 0.0).count(), 2);
    }
}
