use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::ReferenceChart;
use crate::albedo::AlbedoMap;
use crate::colorimetry::luminance;
use crate::error::{Error, Result};

/// Luminance ratio of patch `a` over patch `b`, truth and predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPair {
    pub a: String,
    pub b: String,
    pub truth_ratio: f64,
    pub predicted_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterReport {
    pub pairs: Vec<RatioPair>,
    /// `(a, b, reason)` for pairs left out.
    pub skipped: Vec<(String, String, String)>,
}

impl ScatterReport {
    /// RMS of `log10(predicted / truth)`; zero when every point sits on the
    /// identity line.
    pub fn rms_log_deviation(&self) -> Option<f64> {
        if self.pairs.is_empty() {
            return None;
        }
        let sum: f64 = self
            .pairs
            .iter()
            .map(|p| (p.predicted_ratio / p.truth_ratio).log10().powi(2))
            .sum();
        Some((sum / self.pairs.len() as f64).sqrt())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["patch_a", "patch_b", "truth_ratio", "predicted_ratio"])?;
        for p in &self.pairs {
            w.write_record([
                p.a.clone(),
                p.b.clone(),
                format!("{:.12e}", p.truth_ratio),
                format!("{:.12e}", p.predicted_ratio),
            ])?;
        }
        w.into_inner().map_err(|e| Error::Chart(e.to_string()))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Log-log scatter of predicted against truth ratio with the identity
    /// diagonal in grey.
    pub fn render_png(&self, size: u32) -> RgbImage {
        let size = size.max(32);
        let mut img = RgbImage::from_pixel(size, size, Rgb([255, 255, 255]));
        let margin = size / 16;
        let span = (size - 2 * margin - 1) as f64;

        let logs = self
            .pairs
            .iter()
            .flat_map(|p| [p.truth_ratio.log10(), p.predicted_ratio.log10()])
            .filter(|v| v.is_finite());
        let (lo, hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (lo, hi) = if lo.is_finite() && hi > lo {
            (lo, hi)
        } else {
            (-1.0, 1.0)
        };
        let to_px = |v: f64| margin + ((v - lo) / (hi - lo) * span).round() as u32;

        for i in 0..=(size - 2 * margin - 1) {
            img.put_pixel(margin + i, size - 1 - (margin + i), Rgb([170, 170, 170]));
        }
        for p in &self.pairs {
            let (tx, py) = (p.truth_ratio.log10(), p.predicted_ratio.log10());
            if !(tx.is_finite() && py.is_finite()) {
                continue;
            }
            let (cx, cy) = (to_px(tx) as i64, (size - 1 - to_px(py)) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (x, y) = (cx + dx, cy + dy);
                    if (0..size as i64).contains(&x) && (0..size as i64).contains(&y) {
                        img.put_pixel(x as u32, y as u32, Rgb([200, 30, 30]));
                    }
                }
            }
        }
        img
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.render_png(512).save(path)?;
        Ok(())
    }
}

/// All patch pairs `i < j` in chart order, comparing truth and predicted
/// luminance ratios.
pub fn ratio_scatter_report(albedo: &AlbedoMap, chart: &ReferenceChart) -> Result<ScatterReport> {
    if chart.patches.len() < 2 {
        return Err(Error::Chart("ratio scatter needs at least two patches".into()));
    }
    let lum: Vec<Option<f64>> = chart
        .patches
        .iter()
        .map(|p| albedo.mean_linear(&p.region).map(|(m, _)| luminance(m)))
        .collect();
    let mut report = ScatterReport {
        pairs: Vec::new(),
        skipped: Vec::new(),
    };
    for i in 0..chart.patches.len() {
        for j in i + 1..chart.patches.len() {
            let (pa, pb) = (&chart.patches[i], &chart.patches[j]);
            let skip = |reason: &str| (pa.name.clone(), pb.name.clone(), reason.to_string());
            let truth_b = luminance(pb.truth);
            let reason = match (lum[i], lum[j]) {
                _ if truth_b <= 0.0 => Some("zero truth luminance"),
                (None, _) | (_, None) => Some("patch without valid albedo"),
                (Some(_), Some(yb)) if yb <= 0.0 => Some("zero predicted luminance"),
                _ => None,
            };
            if let Some(reason) = reason {
                report.skipped.push(skip(reason));
                continue;
            }
            report.pairs.push(RatioPair {
                a: pa.name.clone(),
                b: pb.name.clone(),
                truth_ratio: luminance(pa.truth) / truth_b,
                predicted_ratio: lum[i].unwrap() / lum[j].unwrap(),
            });
        }
    }
    Ok(report)
}
