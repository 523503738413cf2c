//! Spectrum → CIE XYZ → sRGB conversion.
//!
//! The CIE 1931 2° color matching functions and the D65 spectral power
//! distribution ship as 5 nm tables over 380–780 nm and are linearly
//! interpolated onto arbitrary grids. Bands outside that range carry zero
//! weight.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::WavelengthGrid;

pub const VISIBLE_MIN_NM: f64 = 380.0;
pub const VISIBLE_MAX_NM: f64 = 780.0;
/// Fewest visible bands [`Colorimeter`] accepts.
pub const MIN_VISIBLE_BANDS: usize = 5;

/// D65 reference white, Y normalized to 1.
pub const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

/// Linear sRGB → XYZ (D65).
pub const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// XYZ (D65) → linear sRGB.
pub const XYZ_TO_SRGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

const CMF_CSV: &str = include_str!("../data/cie1931_2deg_5nm.csv");
const D65_CSV: &str = include_str!("../data/d65_5nm.csv");

struct Table {
    wavelengths: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    fn parse(text: &str) -> Table {
        let mut lines = text.lines();
        let ncols = lines.next().expect("table header").split(',').count() - 1;
        let mut wavelengths = Vec::new();
        let mut columns = vec![Vec::new(); ncols];
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut fields = line
                .split(',')
                .map(|f| f.trim().parse::<f64>().expect("numeric table entry"));
            wavelengths.push(fields.next().expect("wavelength column"));
            for col in columns.iter_mut() {
                col.push(fields.next().expect("table column"));
            }
        }
        Table { wavelengths, columns }
    }

    /// Linear interpolation of column `col`; zero outside the tabulated range.
    fn sample(&self, col: usize, wavelength: f64) -> f64 {
        let wl = &self.wavelengths;
        let (first, last) = (wl[0], wl[wl.len() - 1]);
        if wavelength < first || wavelength > last {
            return 0.0;
        }
        let i = wl.partition_point(|&w| w <= wavelength).min(wl.len() - 1).max(1);
        let (w0, w1) = (wl[i - 1], wl[i]);
        let (v0, v1) = (self.columns[col][i - 1], self.columns[col][i]);
        if wavelength == w1 {
            return v1;
        }
        v0 + (v1 - v0) * (wavelength - w0) / (w1 - w0)
    }
}

fn cmf_table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| Table::parse(CMF_CSV))
}

fn d65_table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| Table::parse(D65_CSV))
}

/// (x̄, ȳ, z̄) of the CIE 1931 2° observer, interpolated from the 5 nm table.
pub fn cie1931_cmf(wavelength_nm: f64) -> [f64; 3] {
    let t = cmf_table();
    [
        t.sample(0, wavelength_nm),
        t.sample(1, wavelength_nm),
        t.sample(2, wavelength_nm),
    ]
}

/// Relative spectral power of CIE D65, interpolated from the 5 nm table.
pub fn d65_spd(wavelength_nm: f64) -> f64 {
    d65_table().sample(0, wavelength_nm)
}

/// Illuminant S(λ) under which reflectance spectra are rendered to color.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum ReferenceIlluminant {
    #[default]
    D65,
    EqualEnergy,
    /// Per-band values on the grid being converted.
    Custom(Vec<f64>),
}

impl ReferenceIlluminant {
    pub fn sample(&self, grid: &WavelengthGrid) -> Result<Vec<f64>> {
        match self {
            ReferenceIlluminant::D65 => Ok(grid.bands().iter().map(|&wl| d65_spd(wl)).collect()),
            ReferenceIlluminant::EqualEnergy => Ok(vec![1.0; grid.band_count()]),
            ReferenceIlluminant::Custom(values) => {
                if values.len() != grid.band_count() {
                    return Err(Error::Dimension(format!(
                        "reference illuminant has {} values for {} bands",
                        values.len(),
                        grid.band_count()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

/// Precomputed per-band XYZ weights for one grid and reference illuminant.
///
/// `X = k Σ ρ(λ) S(λ) x̄(λ) Δλ` and likewise for Y and Z, with `k` chosen so
/// a perfect reflector has `Y = 1`. Δλ comes from trapezoid integration over
/// the visible bands only.
#[derive(Debug, Clone, PartialEq)]
pub struct Colorimeter {
    weights: Vec<[f64; 3]>,
}

impl Colorimeter {
    pub fn new(grid: &WavelengthGrid, illuminant: &ReferenceIlluminant) -> Result<Self> {
        let s = illuminant.sample(grid)?;
        let bands = grid.bands();
        let visible: Vec<usize> = (0..bands.len())
            .filter(|&i| (VISIBLE_MIN_NM..=VISIBLE_MAX_NM).contains(&bands[i]))
            .collect();
        if visible.len() < MIN_VISIBLE_BANDS {
            return Err(Error::VisibleCoverage {
                bands: visible.len(),
                required: MIN_VISIBLE_BANDS,
            });
        }
        let mut weights = vec![[0.0; 3]; bands.len()];
        for (j, &i) in visible.iter().enumerate() {
            let lo = if j == 0 { bands[i] } else { bands[visible[j - 1]] };
            let hi = if j + 1 == visible.len() {
                bands[i]
            } else {
                bands[visible[j + 1]]
            };
            let dl = (hi - lo) / 2.0;
            let cmf = cie1931_cmf(bands[i]);
            weights[i] = [s[i] * cmf[0] * dl, s[i] * cmf[1] * dl, s[i] * cmf[2] * dl];
        }
        let y_white: f64 = weights.iter().map(|w| w[1]).sum();
        if !(y_white > 0.0) {
            return Err(Error::Calibration(
                "reference illuminant has zero luminance on this grid".into(),
            ));
        }
        for w in &mut weights {
            for c in w.iter_mut() {
                *c /= y_white;
            }
        }
        Ok(Self { weights })
    }

    pub fn band_count(&self) -> usize {
        self.weights.len()
    }

    pub fn xyz(&self, spectrum: &[f64]) -> [f64; 3] {
        debug_assert_eq!(spectrum.len(), self.weights.len());
        let mut out = [0.0; 3];
        for (rho, w) in spectrum.iter().zip(&self.weights) {
            out[0] += rho * w[0];
            out[1] += rho * w[1];
            out[2] += rho * w[2];
        }
        out
    }
}

/// One-shot form of [`Colorimeter::xyz`].
pub fn spectrum_to_xyz(spectrum: &[f64], grid: &WavelengthGrid, reference: &ReferenceIlluminant) -> Result<[f64; 3]> {
    if spectrum.len() != grid.band_count() {
        return Err(Error::Dimension(format!(
            "spectrum has {} values for {} bands",
            spectrum.len(),
            grid.band_count()
        )));
    }
    Ok(Colorimeter::new(grid, reference)?.xyz(spectrum))
}

fn mat_mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// sRGB transfer function (linear → encoded), input in [0, 1].
pub fn srgb_encode(linear: f64) -> f64 {
    if linear <= 0.0031308 {
        12.92 * linear
    } else {
        1.055 * linear.powf(1.0 / 2.4) - 0.055
    }
}

pub fn srgb_decode(encoded: f64) -> f64 {
    if encoded <= 0.04045 {
        encoded / 12.92
    } else {
        ((encoded + 0.055) / 1.055).powf(2.4)
    }
}

pub fn srgb_encode_u8(linear: [f64; 3]) -> [u8; 3] {
    linear.map(|c| (srgb_encode(c.clamp(0.0, 1.0)) * 255.0).round() as u8)
}

pub fn linear_rgb_to_xyz(rgb: [f64; 3]) -> [f64; 3] {
    mat_mul(&SRGB_TO_XYZ, rgb)
}

/// Relative luminance Y of a linear sRGB triple.
pub fn luminance(rgb: [f64; 3]) -> f64 {
    SRGB_TO_XYZ[1][0] * rgb[0] + SRGB_TO_XYZ[1][1] * rgb[1] + SRGB_TO_XYZ[1][2] * rgb[2]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrgbColor {
    /// Linear RGB after the per-channel clip to [0, 1].
    pub linear: [f64; 3],
    pub encoded: [u8; 3],
    /// Number of channels that had to be clipped.
    pub clipped_channels: u8,
}

impl SrgbColor {
    pub fn from_linear(linear: [f64; 3]) -> Self {
        let mut clipped_channels = 0;
        let linear = linear.map(|c| {
            let clipped = if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) };
            if clipped != c {
                clipped_channels += 1;
            }
            clipped
        });
        Self {
            linear,
            encoded: srgb_encode_u8(linear),
            clipped_channels,
        }
    }

    pub fn was_clipped(&self) -> bool {
        self.clipped_channels > 0
    }
}

/// XYZ (D65-relative) → clipped linear sRGB and its 8-bit encoding.
pub fn xyz_to_srgb(xyz: [f64; 3]) -> SrgbColor {
    SrgbColor::from_linear(mat_mul(&XYZ_TO_SRGB, xyz))
}
