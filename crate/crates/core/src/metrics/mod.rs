//! Evaluation of albedo maps against a reference chart and pairwise
//! reflectance annotations.

mod delta_e;
mod scatter;
mod whdr;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::albedo::AlbedoMap;
use crate::colorimetry::luminance;
use crate::error::{Error, Result};
use crate::spectral::PixelRect;

pub use delta_e::{cie76, ciede2000, LabColor, WhitePoint};
pub use scatter::{ratio_scatter_report, RatioPair, ScatterReport};
pub use whdr::{
    load_annotations, predict_judgment, save_annotations, whdr, Judgment, PairAnnotation, DEFAULT_WHDR_DELTA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPatch {
    pub name: String,
    pub region: PixelRect,
    /// Ground-truth linear sRGB.
    pub truth: [f64; 3],
}

/// Ground-truth patches with disjoint pixel regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceChart {
    pub width: usize,
    pub height: usize,
    pub patches: Vec<ChartPatch>,
}

impl ReferenceChart {
    pub fn new(width: usize, height: usize, patches: Vec<ChartPatch>) -> Result<Self> {
        let chart = Self { width, height, patches };
        chart.validate()?;
        Ok(chart)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.patches.iter().enumerate() {
            if p.region.is_empty() || !p.region.fits_within(self.width, self.height) {
                return Err(Error::Chart(format!(
                    "patch {:?} region {:?} is empty or outside the {}x{} frame",
                    p.name, p.region, self.width, self.height
                )));
            }
            if let Some(q) = self.patches[i + 1..].iter().find(|q| q.region.intersects(&p.region)) {
                return Err(Error::Chart(format!("patches {:?} and {:?} overlap", p.name, q.name)));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let chart: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        chart.validate()?;
        Ok(chart)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub name: String,
    pub valid_pixels: usize,
    pub mean_linear: [f64; 3],
    pub truth: [f64; 3],
    pub cie76: f64,
    pub ciede2000: f64,
    pub mse: f64,
    pub luminance: f64,
    pub truth_luminance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub cie76: f64,
    pub ciede2000: f64,
    pub mse: f64,
    /// Pearson correlation of patch luminance against truth; `None` when
    /// fewer than two patches or either side has zero variance.
    pub luminance_correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    pub patches: Vec<PatchReport>,
    /// Patches with no valid albedo pixels.
    pub excluded: Vec<String>,
    pub aggregate: AggregateMetrics,
}

/// Pearson correlation coefficient; `None` for degenerate input.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Per-patch and aggregate color error of `albedo` against `chart`.
///
/// Each patch is summarized by the mean linear RGB of its valid pixels.
/// ΔE values use D65 Lab; MSE is over linear-RGB channels; aggregates are
/// means across patches.
pub fn chart_report(albedo: &AlbedoMap, chart: &ReferenceChart) -> Result<ChartReport> {
    if albedo.width() != chart.width || albedo.height() != chart.height {
        return Err(Error::Dimension(format!(
            "albedo map is {}x{} but chart frame is {}x{}",
            albedo.width(),
            albedo.height(),
            chart.width,
            chart.height
        )));
    }
    let mut patches = Vec::new();
    let mut excluded = Vec::new();
    for patch in &chart.patches {
        let Some((mean, n)) = albedo.mean_linear(&patch.region) else {
            excluded.push(patch.name.clone());
            continue;
        };
        let got = LabColor::from_linear_rgb(mean);
        let want = LabColor::from_linear_rgb(patch.truth);
        let mse = (0..3).map(|c| (mean[c] - patch.truth[c]).powi(2)).sum::<f64>() / 3.0;
        patches.push(PatchReport {
            name: patch.name.clone(),
            valid_pixels: n,
            mean_linear: mean,
            truth: patch.truth,
            cie76: cie76(&got, &want)?,
            ciede2000: ciede2000(&got, &want)?,
            mse,
            luminance: luminance(mean),
            truth_luminance: luminance(patch.truth),
        });
    }
    if patches.is_empty() {
        return Err(Error::Chart("no patch has valid albedo pixels".into()));
    }
    let n = patches.len() as f64;
    let mean_of = |f: fn(&PatchReport) -> f64| patches.iter().map(f).sum::<f64>() / n;
    let predicted: Vec<f64> = patches.iter().map(|p| p.luminance).collect();
    let truth: Vec<f64> = patches.iter().map(|p| p.truth_luminance).collect();
    let aggregate = AggregateMetrics {
        cie76: mean_of(|p| p.cie76),
        ciede2000: mean_of(|p| p.ciede2000),
        mse: mean_of(|p| p.mse),
        luminance_correlation: pearson(&predicted, &truth),
    };
    Ok(ChartReport {
        patches,
        excluded,
        aggregate,
    })
}
