//! Weighted human disagreement rate over pairwise reflectance judgments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::albedo::AlbedoMap;
use crate::colorimetry::luminance;
use crate::error::{Error, Result};

/// Relative luminance band treated as "equal".
pub const DEFAULT_WHDR_DELTA: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Judgment {
    #[serde(rename = "A_darker")]
    ADarker,
    #[serde(rename = "B_darker")]
    BDarker,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAnnotation {
    /// `[u, v]` pixel of point A.
    pub a: [usize; 2],
    pub b: [usize; 2],
    pub judgment: Judgment,
    pub weight: f64,
}

/// Judgment implied by luminances `y_a` and `y_b`: equal when the ratio lies
/// in `[1/(1+δ), 1+δ]`, otherwise the darker side.
pub fn predict_judgment(y_a: f64, y_b: f64, delta: f64) -> Judgment {
    if y_a * (1.0 + delta) < y_b {
        Judgment::ADarker
    } else if y_b * (1.0 + delta) < y_a {
        Judgment::BDarker
    } else {
        Judgment::Equal
    }
}

fn point_luminance(albedo: &AlbedoMap, p: [usize; 2]) -> Result<f64> {
    let [u, v] = p;
    if u >= albedo.width() || v >= albedo.height() {
        return Err(Error::Annotation(format!(
            "point ({u}, {v}) outside the {}x{} frame",
            albedo.width(),
            albedo.height()
        )));
    }
    albedo
        .get(u, v)
        .map(|px| luminance(px.linear))
        .ok_or_else(|| Error::Annotation(format!("point ({u}, {v}) has no valid albedo")))
}

/// Σ w · [predicted ≠ judged] / Σ w.
pub fn whdr(albedo: &AlbedoMap, annotations: &[PairAnnotation], delta: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut wrong = 0.0;
    for ann in annotations {
        if !(ann.weight.is_finite() && ann.weight > 0.0) {
            return Err(Error::Annotation(format!("weight {} must be positive", ann.weight)));
        }
        if ann.a == ann.b {
            return Err(Error::Annotation(format!(
                "annotation compares point {:?} with itself",
                ann.a
            )));
        }
        let predicted = predict_judgment(point_luminance(albedo, ann.a)?, point_luminance(albedo, ann.b)?, delta);
        total += ann.weight;
        if predicted != ann.judgment {
            wrong += ann.weight;
        }
    }
    if total <= 0.0 {
        return Err(Error::Annotation("zero total annotation weight".into()));
    }
    Ok(wrong / total)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<PairAnnotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn save_annotations(annotations: &[PairAnnotation], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serde_json::to_string_pretty(annotations)?).map_err(|e| Error::io(path, e))
}
