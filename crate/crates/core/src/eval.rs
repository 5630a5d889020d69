//! PLCC / SRCC correlation harness over a dataset manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Correlations between predictions and ground-truth MOS.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResult {
    pub plcc: f64,
    pub srcc: f64,
    pub n: usize,
    pub skipped: usize,
}

/// Pearson linear correlation coefficient.
pub fn plcc(x: &[f64], y: &[f64]) -> Result<f64, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::LengthMismatch("need at least 2 samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Average-tie ranks, 1-based.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average-tie ranks.
pub fn srcc(x: &[f64], y: &[f64]) -> Result<f64, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {}", x.len(), y.len())));
    }
    plcc(&average_ranks(x), &average_ranks(y))
}

/// One manifest row: a frame directory and its ground-truth MOS.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub video_dir: PathBuf,
    pub mos: f64,
}

/// Parse a `video_dir,mos` CSV manifest with header.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty manifest".into()))?;
    if header.trim() != "video_dir,mos" {
        return Err(Error::Config(format!(
            "manifest header must be 'video_dir,mos', got {:?}",
            header
        )));
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (dir, mos) = line.rsplit_once(',').ok_or_else(|| {
            Error::Config(format!("manifest line {}: missing comma", i + 2))
        })?;
        let mos: f64 = mos
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("manifest line {}: bad mos", i + 2)))?;
        entries.push(ManifestEntry {
            video_dir: PathBuf::from(dir.trim()),
            mos,
        });
    }
    Ok(entries)
}

/// Run `pipeline` over every manifest entry and correlate predictions with
/// MOS. Unreadable entries are skipped with a warning and counted.
pub fn evaluate_manifest<F>(
    entries: &[ManifestEntry],
    mut pipeline: F,
) -> Result<EvalResult, Error>
where
    F: FnMut(&ManifestEntry) -> Result<f64, Error>,
{
    let mut predicted = Vec::new();
    let mut mos = Vec::new();
    let mut skipped = 0usize;
    for entry in entries {
        match pipeline(entry) {
            Ok(score) => {
                predicted.push(score);
                mos.push(entry.mos);
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {}", entry.video_dir.display(), e);
                skipped += 1;
            }
        }
    }
    Ok(EvalResult {
        plcc: plcc(&predicted, &mos)?,
        srcc: srcc(&predicted, &mos)?,
        n: predicted.len(),
        skipped,
    })
}

/// Plain-text results table.
pub fn format_table(result: &EvalResult) -> String {
    format!(
        "metric  value\n------  ------\nPLCC    {:.4}\nSRCC    {:.4}\nn       {}\nskipped {}\n",
        result.plcc, result.srcc, result.n, result.skipped
    )
}
