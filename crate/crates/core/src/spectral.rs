//! Wavelength grids, hyperspectral cubes and white-reference illuminant
//! calibration.
//!
//! Cubes are held in memory as `f64` and persisted as little-endian `f32`
//! in band-interleaved-by-pixel order. The `.hsc` container is a JSON header,
//! a `\n\0` separator and the raw payload:
//!
//! ```text
//! {"width":W,"height":H,"bands":[...nm...],"dtype":"f32","layout":"bip"}\n\0<payload>
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest wavelength accepted on a grid, in nanometers.
pub const MIN_WAVELENGTH_NM: f64 = 350.0;
/// Highest wavelength accepted on a grid, in nanometers.
pub const MAX_WAVELENGTH_NM: f64 = 1100.0;
/// Maximum distance between a requested wavelength and the band that serves it.
pub const BAND_TOLERANCE_NM: f64 = 5.0;

const HEADER_SEPARATOR: &[u8] = b"\n\0";

/// Ordered set of band center wavelengths, in nanometers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WavelengthGrid {
    bands: Vec<f64>,
}

impl WavelengthGrid {
    pub fn new(bands: Vec<f64>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::Grid("grid has no bands".into()));
        }
        for (i, &wl) in bands.iter().enumerate() {
            if !wl.is_finite() || !(MIN_WAVELENGTH_NM..=MAX_WAVELENGTH_NM).contains(&wl) {
                return Err(Error::Grid(format!(
                    "band {i} at {wl} nm outside [{MIN_WAVELENGTH_NM}, {MAX_WAVELENGTH_NM}] nm"
                )));
            }
        }
        if let Some(i) = bands.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Grid(format!(
                "wavelengths not strictly increasing at band {}: {} nm then {} nm",
                i + 1,
                bands[i],
                bands[i + 1]
            )));
        }
        Ok(Self { bands })
    }

    /// `count` bands from `start` in steps of `step` nanometers.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Index of the band nearest `wavelength_nm`, provided it lies within
    /// [`BAND_TOLERANCE_NM`].
    pub fn band_index(&self, wavelength_nm: f64) -> Result<usize> {
        let (index, nearest) = self
            .bands
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| (a.1 - wavelength_nm).abs().total_cmp(&(b.1 - wavelength_nm).abs()))
            .expect("grid is nonempty");
        if (nearest - wavelength_nm).abs() > BAND_TOLERANCE_NM {
            return Err(Error::MissingBand {
                wavelength_nm,
                nearest_nm: nearest,
                tolerance_nm: BAND_TOLERANCE_NM,
            });
        }
        Ok(index)
    }
}

impl TryFrom<Vec<f64>> for WavelengthGrid {
    type Error = Error;

    fn try_from(bands: Vec<f64>) -> Result<Self> {
        Self::new(bands)
    }
}

impl From<WavelengthGrid> for Vec<f64> {
    fn from(grid: WavelengthGrid) -> Self {
        grid.bands
    }
}

/// Axis-aligned pixel rectangle; `x`/`y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl PixelRect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self::new(0, 0, width, height)
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        self.x + self.width <= width && self.y + self.height <= height
    }

    pub fn intersects(&self, other: &PixelRect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.x < other.x + other.width
            && other.x < self.x + self.width
            && self.y < other.y + other.height
            && other.y < self.y + self.height
    }

    /// Pixel coordinates in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y..self.y + self.height).flat_map(move |y| (self.x..self.x + self.width).map(move |x| (x, y)))
    }
}

/// Per-band radiance vector of one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSignature(pub Vec<f64>);

impl SpectralSignature {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// H×W×B radiance image, row-major and band-interleaved by pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCube {
    grid: WavelengthGrid,
    width: usize,
    height: usize,
    radiance: Vec<f64>,
}

impl SpectralCube {
    pub fn new(grid: WavelengthGrid, width: usize, height: usize, radiance: Vec<f64>) -> Result<Self> {
        let expected = width * height * grid.band_count();
        if radiance.len() != expected {
            return Err(Error::Dimension(format!(
                "{width}x{height}x{} cube needs {expected} values, got {}",
                grid.band_count(),
                radiance.len()
            )));
        }
        if let Some(i) = radiance.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(
                "radiance",
                format!("value {} at flat index {i} is negative or not finite", radiance[i]),
            ));
        }
        Ok(Self {
            grid,
            width,
            height,
            radiance,
        })
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn band_count(&self) -> usize {
        self.grid.band_count()
    }

    pub fn radiance(&self) -> &[f64] {
        &self.radiance
    }

    pub fn in_bounds(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    fn check_bounds(&self, x: usize, y: usize) -> Result<()> {
        if self.in_bounds(x, y) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Radiance slice of one pixel. Panics when out of bounds.
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        assert!(self.in_bounds(x, y), "pixel ({x}, {y}) out of bounds");
        let bands = self.band_count();
        let start = (y * self.width + x) * bands;
        &self.radiance[start..start + bands]
    }

    pub fn value(&self, x: usize, y: usize, band: usize) -> f64 {
        self.pixel(x, y)[band]
    }

    pub fn max_radiance(&self) -> f64 {
        self.radiance.iter().copied().fold(0.0, f64::max)
    }

    /// Spectral signature of the pixel at column `x`, row `y`.
    pub fn signature_at(&self, x: usize, y: usize) -> Result<SpectralSignature> {
        self.check_bounds(x, y)?;
        Ok(SpectralSignature(self.pixel(x, y).to_vec()))
    }

    pub fn same_frame(&self, other: &SpectralCube) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Free-function form of [`SpectralCube::signature_at`].
pub fn signature_at(cube: &SpectralCube, x: usize, y: usize) -> Result<SpectralSignature> {
    cube.signature_at(x, y)
}

#[derive(Debug, Serialize, Deserialize)]
struct CubeHeader {
    width: usize,
    height: usize,
    bands: Vec<f64>,
    dtype: String,
    layout: String,
}

/// Serializes a cube into the `.hsc` byte layout.
pub fn encode_cube(cube: &SpectralCube) -> Result<Vec<u8>> {
    let header = CubeHeader {
        width: cube.width,
        height: cube.height,
        bands: cube.grid.bands.clone(),
        dtype: "f32".into(),
        layout: "bip".into(),
    };
    let mut out = serde_json::to_vec(&header)?;
    out.extend_from_slice(HEADER_SEPARATOR);
    out.reserve(cube.radiance.len() * 4);
    for &v in &cube.radiance {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

/// Parses `.hsc` bytes. `origin` is only used in error messages.
pub fn decode_cube(bytes: &[u8], origin: &Path) -> Result<SpectralCube> {
    let format_err = |reason: String| Error::Format {
        path: origin.to_path_buf(),
        reason,
    };
    let split = bytes
        .windows(HEADER_SEPARATOR.len())
        .position(|w| w == HEADER_SEPARATOR)
        .ok_or_else(|| format_err("missing header separator".into()))?;
    let header: CubeHeader =
        serde_json::from_slice(&bytes[..split]).map_err(|e| format_err(format!("bad header: {e}")))?;
    if header.dtype != "f32" {
        return Err(format_err(format!("unsupported dtype {:?}", header.dtype)));
    }
    if header.layout != "bip" {
        return Err(format_err(format!("unsupported layout {:?}", header.layout)));
    }
    let grid = WavelengthGrid::new(header.bands)?;
    let payload = &bytes[split + HEADER_SEPARATOR.len()..];
    let expected = header.width * header.height * grid.band_count() * 4;
    if payload.len() != expected {
        return Err(Error::PayloadSize {
            expected,
            found: payload.len(),
        });
    }
    let radiance = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    SpectralCube::new(grid, header.width, header.height, radiance)
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<SpectralCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cube(&bytes, path)
}

pub fn save_cube(cube: &SpectralCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_cube(cube)?).map_err(|e| Error::io(path, e))
}

/// Illuminant spectrum measured over one rectangle of the frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlluminantRegion {
    pub rect: PixelRect,
    pub values: Vec<f64>,
}

/// Incident light spectrum e(λ), optionally varying by image region.
///
/// When `regions` is nonempty, lookups resolve to the first region containing
/// the pixel and fail for pixels no region covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlluminantSpectrum {
    grid: WavelengthGrid,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    regions: Vec<IlluminantRegion>,
}

fn check_illuminant_values(grid: &WavelengthGrid, values: &[f64]) -> Result<()> {
    if values.len() != grid.band_count() {
        return Err(Error::Dimension(format!(
            "illuminant has {} values for {} bands",
            values.len(),
            grid.band_count()
        )));
    }
    for (b, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Calibration(format!(
                "illuminant value {v} at band {b} ({} nm) is not positive",
                grid.bands()[b]
            )));
        }
    }
    Ok(())
}

impl IlluminantSpectrum {
    pub fn new(grid: WavelengthGrid, values: Vec<f64>) -> Result<Self> {
        check_illuminant_values(&grid, &values)?;
        Ok(Self {
            grid,
            values,
            regions: Vec::new(),
        })
    }

    /// Spatially varying illuminant. The global spectrum is the first
    /// region's values.
    pub fn with_regions(grid: WavelengthGrid, regions: Vec<IlluminantRegion>) -> Result<Self> {
        let first = regions
            .first()
            .ok_or_else(|| Error::Calibration("no illuminant regions given".into()))?;
        for region in &regions {
            check_illuminant_values(&grid, &region.values)?;
        }
        Ok(Self {
            values: first.values.clone(),
            grid,
            regions,
        })
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn regions(&self) -> &[IlluminantRegion] {
        &self.regions
    }

    pub fn is_spatial(&self) -> bool {
        !self.regions.is_empty()
    }

    /// e(λ) that applies at pixel (x, y).
    pub fn spectrum_at(&self, x: usize, y: usize) -> Result<&[f64]> {
        if self.regions.is_empty() {
            return Ok(&self.values);
        }
        self.regions
            .iter()
            .find(|r| r.rect.contains(x, y))
            .map(|r| r.values.as_slice())
            .ok_or(Error::RegionMiss { x, y })
    }

    fn validate(&self) -> Result<()> {
        check_illuminant_values(&self.grid, &self.values)?;
        self.regions
            .iter()
            .try_for_each(|r| check_illuminant_values(&self.grid, &r.values))
    }
}

fn region_mean(white: &SpectralCube, region: &PixelRect, whiteboard_reflectance: f64) -> Result<Vec<f64>> {
    if region.is_empty() {
        return Err(Error::Calibration("white-reference region is empty".into()));
    }
    if !region.fits_within(white.width(), white.height()) {
        return Err(Error::Calibration(format!(
            "white-reference region {region:?} exceeds {}x{} frame",
            white.width(),
            white.height()
        )));
    }
    if !(whiteboard_reflectance.is_finite() && whiteboard_reflectance > 0.0) {
        return Err(Error::Calibration(format!(
            "whiteboard reflectance must be positive, got {whiteboard_reflectance}"
        )));
    }
    let bands = white.band_count();
    let mut sums = vec![0.0; bands];
    for (x, y) in region.pixels() {
        for (s, v) in sums.iter_mut().zip(white.pixel(x, y)) {
            *s += v;
        }
    }
    let n = region.area() as f64;
    let mut means = Vec::with_capacity(bands);
    for (b, s) in sums.into_iter().enumerate() {
        let mean = s / n;
        if mean <= 0.0 {
            return Err(Error::Calibration(format!(
                "white-reference mean at band {b} ({} nm) is {mean}",
                white.grid().bands()[b]
            )));
        }
        means.push(mean / whiteboard_reflectance);
    }
    Ok(means)
}

/// Estimates e(λ) as the per-band mean of a white-reference capture over
/// `region`, divided by the whiteboard's reflectance.
pub fn calibrate_illuminant(
    white: &SpectralCube,
    region: PixelRect,
    whiteboard_reflectance: f64,
) -> Result<IlluminantSpectrum> {
    let values = region_mean(white, &region, whiteboard_reflectance)?;
    IlluminantSpectrum::new(white.grid().clone(), values)
}

/// Multi-region calibration for scenes whose illumination varies spatially.
pub fn calibrate_illuminant_regions(
    white: &SpectralCube,
    regions: &[PixelRect],
    whiteboard_reflectance: f64,
) -> Result<IlluminantSpectrum> {
    let regions = regions
        .iter()
        .map(|rect| {
            Ok(IlluminantRegion {
                rect: *rect,
                values: region_mean(white, rect, whiteboard_reflectance)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    IlluminantSpectrum::with_regions(white.grid().clone(), regions)
}

pub fn load_illuminant(path: impl AsRef<Path>) -> Result<IlluminantSpectrum> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let illum: IlluminantSpectrum = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    illum.validate()?;
    Ok(illum)
}

pub fn save_illuminant(illum: &IlluminantSpectrum, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(illum)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
