//! LiDAR intensity model and its inversion to reflectance at the laser
//! wavelength.
//!
//! The return intensity of a Lambertian target follows
//!
//! ```text
//! L = D_r² · η_sys · η_atm · ρ · cos θ / (4 R²)
//! ```
//!
//! Sample sets are stored as a CSV (`u,v,range_m,intensity,cos_theta`) with a
//! JSON sidecar holding [`SensorConstants`] and the frame size.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples below this incidence cosine (θ ≈ 84°) are rejected.
pub const DEFAULT_COS_MIN: f64 = 0.1;
/// Upper clamp for inverted reflectance.
pub const DEFAULT_CLAMP_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConstants {
    /// Receiver aperture diameter, meters.
    pub receiver_aperture_d_r: f64,
    pub eta_sys: f64,
    pub eta_atm: f64,
    pub lidar_wavelength: f64,
}

impl SensorConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.receiver_aperture_d_r.is_finite() && self.receiver_aperture_d_r > 0.0) {
            return Err(Error::domain("receiver_aperture_d_r", "must be positive"));
        }
        for (field, v) in [("eta_sys", self.eta_sys), ("eta_atm", self.eta_atm)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(field, format!("{v} outside (0, 1]")));
            }
        }
        if !(self.lidar_wavelength.is_finite() && self.lidar_wavelength > 0.0) {
            return Err(Error::domain("lidar_wavelength", "must be positive"));
        }
        Ok(())
    }

    /// D_r² η_sys η_atm / 4, the range- and target-independent factor.
    fn system_gain(&self) -> f64 {
        self.receiver_aperture_d_r * self.receiver_aperture_d_r * self.eta_sys * self.eta_atm / 4.0
    }
}

/// One LiDAR return already registered to hyperspectral pixel (u, v).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarSample {
    pub u: usize,
    pub v: usize,
    #[serde(rename = "range_m")]
    pub range_r: f64,
    #[serde(rename = "intensity")]
    pub intensity_l: f64,
    #[serde(rename = "cos_theta")]
    pub incidence_cos: f64,
}

impl LidarSample {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_r.is_finite() && self.range_r > 0.0) {
            return Err(Error::domain("range_m", format!("{} must be positive", self.range_r)));
        }
        if !(self.intensity_l.is_finite() && self.intensity_l >= 0.0) {
            return Err(Error::domain(
                "intensity",
                format!("{} must be nonnegative", self.intensity_l),
            ));
        }
        if !(self.incidence_cos > 0.0 && self.incidence_cos <= 1.0) {
            return Err(Error::domain(
                "cos_theta",
                format!("{} outside (0, 1]", self.incidence_cos),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LidarSampleSet {
    constants: SensorConstants,
    samples: Vec<LidarSample>,
    width: usize,
    height: usize,
}

impl LidarSampleSet {
    pub fn new(constants: SensorConstants, samples: Vec<LidarSample>, width: usize, height: usize) -> Result<Self> {
        constants.validate()?;
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            s.validate()?;
            if s.u >= width || s.v >= height {
                return Err(Error::OutOfBounds {
                    x: s.u,
                    y: s.v,
                    width,
                    height,
                });
            }
            if !seen.insert((s.u, s.v)) {
                return Err(Error::domain(
                    "samples",
                    format!("duplicate sample at ({}, {})", s.u, s.v),
                ));
            }
        }
        Ok(Self {
            constants,
            samples,
            width,
            height,
        })
    }

    pub fn constants(&self) -> &SensorConstants {
        &self.constants
    }

    /// Same samples attributed to a different LiDAR wavelength.
    pub fn with_lidar_wavelength(mut self, wavelength_nm: f64) -> Result<Self> {
        self.constants.lidar_wavelength = wavelength_nm;
        self.constants.validate()?;
        Ok(self)
    }

    pub fn samples(&self) -> &[LidarSample] {
        &self.samples
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Predicted return intensity for a target of reflectance `rho_lidar`.
pub fn forward_intensity(constants: &SensorConstants, rho_lidar: f64, range_r: f64, incidence_cos: f64) -> Result<f64> {
    constants.validate()?;
    if !(0.0..=1.0).contains(&rho_lidar) {
        return Err(Error::domain("rho_lidar", format!("{rho_lidar} outside [0, 1]")));
    }
    if !(range_r.is_finite() && range_r > 0.0) {
        return Err(Error::domain("range_r", format!("{range_r} must be positive")));
    }
    if !(incidence_cos > 0.0 && incidence_cos <= 1.0) {
        return Err(Error::domain(
            "incidence_cos",
            format!("{incidence_cos} outside (0, 1]"),
        ));
    }
    Ok(constants.system_gain() * rho_lidar * incidence_cos / (range_r * range_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub cos_min: f64,
    pub clamp_max: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            cos_min: DEFAULT_COS_MIN,
            clamp_max: DEFAULT_CLAMP_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertedReflectance {
    pub rho: f64,
    /// The raw inversion exceeded `clamp_max` and was clamped.
    pub clamped: bool,
}

/// Why a pixel was left without a recovered albedo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    GrazingIncidence,
    DarkPixel,
    RegionMiss,
}

impl Rejection {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rejection::GrazingIncidence => "grazing_incidence",
            Rejection::DarkPixel => "dark_pixel",
            Rejection::RegionMiss => "region_miss",
        }
    }
}

/// Reflectance at the LiDAR wavelength from one return:
/// ρ = 4 L R² / (D_r² η_sys η_atm cos θ).
///
/// Grazing samples (`incidence_cos < cos_min`) come back as a rejection rather
/// than an error so callers can keep processing the rest of the set.
pub fn invert_reflectance(
    constants: &SensorConstants,
    sample: &LidarSample,
    config: &InversionConfig,
) -> std::result::Result<InvertedReflectance, Rejection> {
    if sample.incidence_cos < config.cos_min {
        return Err(Rejection::GrazingIncidence);
    }
    let raw = sample.intensity_l * sample.range_r * sample.range_r / (constants.system_gain() * sample.incidence_cos);
    let rho = raw.clamp(0.0, config.clamp_max);
    Ok(InvertedReflectance {
        rho,
        clamped: rho != raw,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleSetSidecar {
    width: usize,
    height: usize,
    constants: SensorConstants,
}

/// Sidecar path for a sample CSV: `lidar.csv` → `lidar.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn save_sample_set(set: &LidarSampleSet, csv_path: impl AsRef<Path>) -> Result<()> {
    let csv_path = csv_path.as_ref();
    let mut writer = csv::Writer::from_path(csv_path)?;
    for s in &set.samples {
        writer.serialize(s)?;
    }
    writer.flush().map_err(|e| Error::io(csv_path, e))?;
    let sidecar = SampleSetSidecar {
        width: set.width,
        height: set.height,
        constants: set.constants,
    };
    let side = sidecar_path(csv_path);
    fs::write(&side, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&side, e))
}

fn read_samples(csv_path: &Path) -> Result<Vec<LidarSample>> {
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| Error::Format {
        path: csv_path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let headers = reader.headers()?.clone();
    let expected = ["u", "v", "range_m", "intensity", "cos_theta"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format {
            path: csv_path.to_path_buf(),
            reason: format!(
                "expected header {}, found {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn read_sidecar(path: &Path) -> Result<SampleSetSidecar> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads a sample CSV and its sidecar (`<csv stem>.json`).
pub fn load_sample_set(csv_path: impl AsRef<Path>) -> Result<LidarSampleSet> {
    let csv_path = csv_path.as_ref();
    let sidecar = read_sidecar(&sidecar_path(csv_path))?;
    let samples = read_samples(csv_path)?;
    LidarSampleSet::new(sidecar.constants, samples, sidecar.width, sidecar.height)
}

#[derive(Debug, Deserialize)]
struct RegistrationRow {
    index: usize,
    u: usize,
    v: usize,
}

/// Loads a sample CSV whose pixel coordinates come from a registration table
/// (`index,u,v`, index = zero-based data row of the sample CSV). Samples the
/// table does not mention are dropped; the count is returned alongside.
pub fn load_registered_sample_set(
    csv_path: impl AsRef<Path>,
    registration_path: impl AsRef<Path>,
) -> Result<(LidarSampleSet, usize)> {
    let csv_path = csv_path.as_ref();
    let registration_path = registration_path.as_ref();
    let sidecar = read_sidecar(&sidecar_path(csv_path))?;
    let samples = read_samples(csv_path)?;
    let mut reader = csv::Reader::from_path(registration_path).map_err(|e| Error::Format {
        path: registration_path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut table = BTreeMap::new();
    for row in reader.deserialize::<RegistrationRow>() {
        let row = row?;
        if row.index >= samples.len() {
            return Err(Error::Format {
                path: registration_path.to_path_buf(),
                reason: format!("index {} exceeds {} samples", row.index, samples.len()),
            });
        }
        if table.insert(row.index, (row.u, row.v)).is_some() {
            return Err(Error::Format {
                path: registration_path.to_path_buf(),
                reason: format!("index {} registered twice", row.index),
            });
        }
    }
    let dropped = samples.len() - table.len();
    let registered = table
        .into_iter()
        .map(|(i, (u, v))| LidarSample { u, v, ..samples[i] })
        .collect();
    Ok((
        LidarSampleSet::new(sidecar.constants, registered, sidecar.width, sidecar.height)?,
        dropped,
    ))
}
