//! Albedo recovery from the hyperspectral/LiDAR ratio.
//!
//! For a Lambertian pixel `I(λ) = m · e(λ) · ρ(λ)`; dividing two bands
//! removes the geometric factor `m`, so
//!
//! ```text
//! ρ(λ) = [e(λ_L) / e(λ)] · [I(λ) / I(λ_L)] · ρ(λ_L)
//! ```
//!
//! where `ρ(λ_L)` is the LiDAR-derived reflectance. Recovered spectra are
//! rendered to XYZ under a reference illuminant and then to sRGB.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorimetry::{xyz_to_srgb, Colorimeter, ReferenceIlluminant, SrgbColor};
use crate::error::{Error, Result};
use crate::lidar::{invert_reflectance, InversionConfig, LidarSample, LidarSampleSet, Rejection};
use crate::npy;
use crate::spectral::{IlluminantSpectrum, PixelRect, SpectralCube, WavelengthGrid};

/// Denominator guard for I(λ_L), as a fraction of the cube's peak radiance.
pub const DEFAULT_EPSILON_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Measured,
    Densified,
}

impl Provenance {
    fn code(self) -> f64 {
        match self {
            Provenance::Measured => 1.0,
            Provenance::Densified => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlbedoPixel {
    pub linear: [f64; 3],
    pub srgb: [u8; 3],
    pub provenance: Provenance,
}

impl AlbedoPixel {
    /// Clips `linear` to [0, 1] and derives the 8-bit sRGB encoding.
    pub fn new(linear: [f64; 3], provenance: Provenance) -> Self {
        let color = SrgbColor::from_linear(linear);
        Self {
            linear: color.linear,
            srgb: color.encoded,
            provenance,
        }
    }

    fn from_color(color: SrgbColor, provenance: Provenance) -> Self {
        Self {
            linear: color.linear,
            srgb: color.encoded,
            provenance,
        }
    }
}

/// Per-pixel albedo with a validity mask (`None` = no albedo).
#[derive(Debug, Clone, PartialEq)]
pub struct AlbedoMap {
    width: usize,
    height: usize,
    pixels: Vec<Option<AlbedoPixel>>,
}

impl AlbedoMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![None; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Option<AlbedoPixel>>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} albedo map needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<&AlbedoPixel> {
        self.pixels.get(y * self.width + x).and_then(Option::as_ref)
    }

    pub fn set(&mut self, x: usize, y: usize, pixel: Option<AlbedoPixel>) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.pixels[y * self.width + x] = pixel;
    }

    pub fn pixels(&self) -> &[Option<AlbedoPixel>] {
        &self.pixels
    }

    pub fn valid_count(&self) -> usize {
        self.pixels.iter().filter(|p| p.is_some()).count()
    }

    pub fn count_provenance(&self, provenance: Provenance) -> usize {
        self.pixels
            .iter()
            .flatten()
            .filter(|p| p.provenance == provenance)
            .count()
    }

    /// Valid pixels in row-major order as `(x, y, pixel)`.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, usize, &AlbedoPixel)> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter_map(move |(i, p)| p.as_ref().map(|p| (i % self.width, i / self.width, p)))
    }

    /// Mean linear RGB over the valid pixels of `rect`, with the pixel count.
    pub fn mean_linear(&self, rect: &PixelRect) -> Option<([f64; 3], usize)> {
        let mut sum = [0.0; 3];
        let mut n = 0;
        for (x, y) in rect.pixels() {
            if let Some(p) = self.get(x, y) {
                for (acc, v) in sum.iter_mut().zip(p.linear) {
                    *acc += v;
                }
                n += 1;
            }
        }
        (n > 0).then(|| (sum.map(|s| s / n as f64), n))
    }

    /// RGBA8 image; invalid pixels are fully transparent.
    pub fn to_rgba_image(&self) -> image::RgbaImage {
        image::RgbaImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            match self.get(x as usize, y as usize) {
                Some(p) => image::Rgba([p.srgb[0], p.srgb[1], p.srgb[2], 255]),
                None => image::Rgba([0, 0, 0, 0]),
            }
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_rgba_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(Error::from)
    }

    /// `(H, W, 4)` float64 array: linear R, G, B and a provenance code
    /// (0 invalid, 1 measured, 2 densified). Invalid pixels carry NaN color.
    pub fn to_npy_bytes(&self) -> Vec<u8> {
        let mut data = Vec::with_capacity(self.pixels.len() * 4);
        for p in &self.pixels {
            match p {
                Some(p) => data.extend_from_slice(&[p.linear[0], p.linear[1], p.linear[2], p.provenance.code()]),
                None => data.extend_from_slice(&[f64::NAN, f64::NAN, f64::NAN, 0.0]),
            }
        }
        npy::encode_f64(&[self.height, self.width, 4], &data)
    }

    pub fn save_npy(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_npy_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load_npy(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (shape, data) = npy::read_f64(path)?;
        let bad = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let [height, width, 4] = shape[..] else {
            return Err(bad(format!("expected shape (H, W, 4), found {shape:?}")));
        };
        let pixels = data
            .chunks_exact(4)
            .map(|c| match c[3] {
                0.0 => Ok(None),
                1.0 => Ok(Some(AlbedoPixel::new([c[0], c[1], c[2]], Provenance::Measured))),
                2.0 => Ok(Some(AlbedoPixel::new([c[0], c[1], c[2]], Provenance::Densified))),
                other => Err(bad(format!("unknown provenance code {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pixels(width, height, pixels)
    }
}

/// Recovered ρ(λ) per pixel; `None` where no LiDAR sample survived.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectanceSpectrumMap {
    pub grid: WavelengthGrid,
    pub width: usize,
    pub height: usize,
    pub spectra: Vec<Option<Vec<f64>>>,
}

impl ReflectanceSpectrumMap {
    pub fn get(&self, x: usize, y: usize) -> Option<&[f64]> {
        self.spectra[y * self.width + x].as_deref()
    }
}

/// Reusable recovery state for one cube/illuminant pair.
#[derive(Debug, Clone)]
pub struct SpectrumRecovery<'a> {
    cube: &'a SpectralCube,
    illuminant: &'a IlluminantSpectrum,
    lidar_band: usize,
    epsilon: f64,
}

impl<'a> SpectrumRecovery<'a> {
    pub fn new(cube: &'a SpectralCube, illuminant: &'a IlluminantSpectrum, lidar_wavelength: f64) -> Result<Self> {
        Self::with_epsilon_fraction(cube, illuminant, lidar_wavelength, DEFAULT_EPSILON_FRACTION)
    }

    pub fn with_epsilon_fraction(
        cube: &'a SpectralCube,
        illuminant: &'a IlluminantSpectrum,
        lidar_wavelength: f64,
        epsilon_fraction: f64,
    ) -> Result<Self> {
        if cube.grid() != illuminant.grid() {
            return Err(Error::GridMismatch);
        }
        let lidar_band = cube.grid().band_index(lidar_wavelength)?;
        Ok(Self {
            cube,
            illuminant,
            lidar_band,
            epsilon: epsilon_fraction * cube.max_radiance(),
        })
    }

    pub fn lidar_band(&self) -> usize {
        self.lidar_band
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// ρ(λ) at pixel (u, v) given the LiDAR-derived reflectance there.
    pub fn recover(&self, u: usize, v: usize, rho_lidar: f64) -> std::result::Result<Vec<f64>, Rejection> {
        let radiance = self.cube.pixel(u, v);
        let i_lidar = radiance[self.lidar_band];
        if !(i_lidar > self.epsilon) {
            return Err(Rejection::DarkPixel);
        }
        let e = self.illuminant.spectrum_at(u, v).map_err(|_| Rejection::RegionMiss)?;
        let e_lidar = e[self.lidar_band];
        Ok(radiance
            .iter()
            .zip(e)
            .map(|(&i, &e_band)| (e_lidar / e_band) * (i / i_lidar) * rho_lidar)
            .collect())
    }
}

/// Recovers ρ(λ) at the sample's pixel.
pub fn recover_spectrum(
    cube: &SpectralCube,
    illuminant: &IlluminantSpectrum,
    sample: &LidarSample,
    rho_lidar: f64,
    lidar_wavelength: f64,
) -> Result<Vec<f64>> {
    if !cube.in_bounds(sample.u, sample.v) {
        return Err(Error::OutOfBounds {
            x: sample.u,
            y: sample.v,
            width: cube.width(),
            height: cube.height(),
        });
    }
    let recovery = SpectrumRecovery::new(cube, illuminant, lidar_wavelength)?;
    recovery.recover(sample.u, sample.v, rho_lidar).map_err(|r| match r {
        Rejection::RegionMiss => Error::RegionMiss {
            x: sample.u,
            y: sample.v,
        },
        other => Error::domain(
            "intensity",
            format!(
                "pixel ({}, {}) rejected ({}): I(λ_LiDAR) not above {}",
                sample.u,
                sample.v,
                other.as_str(),
                recovery.epsilon()
            ),
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlbedoConfig {
    pub inversion: InversionConfig,
    pub reference: ReferenceIlluminant,
    pub epsilon_fraction: f64,
}

impl Default for AlbedoConfig {
    fn default() -> Self {
        Self {
            inversion: InversionConfig::default(),
            reference: ReferenceIlluminant::D65,
            epsilon_fraction: DEFAULT_EPSILON_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub samples: usize,
    pub accepted: usize,
    /// Rejected samples by cause.
    pub rejected: BTreeMap<String, usize>,
    /// Samples whose LiDAR reflectance was clamped to `clamp_max`.
    pub lidar_clamped: usize,
    /// Accepted pixels with some ρ(λ) above `clamp_max`.
    pub spectra_over_clamp: usize,
    /// Pixels whose sRGB conversion clipped at least one channel.
    pub gamut_clipped: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SparseAlbedo {
    pub albedo: AlbedoMap,
    pub spectra: ReflectanceSpectrumMap,
    pub summary: RecoverySummary,
}

enum SampleOutcome {
    Accepted {
        index: usize,
        spectrum: Vec<f64>,
        color: SrgbColor,
        lidar_clamped: bool,
    },
    Rejected(Rejection),
}

/// Runs inversion → spectrum recovery → XYZ → sRGB for every LiDAR sample.
/// Per-pixel failures are tallied in the summary; only a run where no
/// sample survives is an error.
pub fn compute_sparse_albedo(
    cube: &SpectralCube,
    illuminant: &IlluminantSpectrum,
    lidar: &LidarSampleSet,
    config: &AlbedoConfig,
) -> Result<SparseAlbedo> {
    if cube.width() != lidar.width() || cube.height() != lidar.height() {
        return Err(Error::Dimension(format!(
            "cube is {}x{} but LiDAR frame is {}x{}",
            cube.width(),
            cube.height(),
            lidar.width(),
            lidar.height()
        )));
    }
    let constants = lidar.constants();
    let recovery =
        SpectrumRecovery::with_epsilon_fraction(cube, illuminant, constants.lidar_wavelength, config.epsilon_fraction)?;
    let colorimeter = Colorimeter::new(cube.grid(), &config.reference)?;
    if lidar.is_empty() {
        return Err(Error::NoValidSamples);
    }

    let outcomes: Vec<SampleOutcome> = lidar
        .samples()
        .par_iter()
        .map(|s| {
            let inverted = match invert_reflectance(constants, s, &config.inversion) {
                Ok(r) => r,
                Err(r) => return SampleOutcome::Rejected(r),
            };
            match recovery.recover(s.u, s.v, inverted.rho) {
                Ok(spectrum) => SampleOutcome::Accepted {
                    index: s.v * cube.width() + s.u,
                    color: xyz_to_srgb(colorimeter.xyz(&spectrum)),
                    spectrum,
                    lidar_clamped: inverted.clamped,
                },
                Err(r) => SampleOutcome::Rejected(r),
            }
        })
        .collect();

    let (w, h) = (cube.width(), cube.height());
    let mut albedo = AlbedoMap::empty(w, h);
    let mut spectra = vec![None; w * h];
    let mut summary = RecoverySummary {
        samples: lidar.len(),
        ..Default::default()
    };
    for outcome in outcomes {
        match outcome {
            SampleOutcome::Accepted {
                index,
                spectrum,
                color,
                lidar_clamped,
            } => {
                summary.accepted += 1;
                summary.lidar_clamped += usize::from(lidar_clamped);
                summary.gamut_clipped += usize::from(color.was_clipped());
                if spectrum.iter().any(|&r| r > config.inversion.clamp_max) {
                    summary.spectra_over_clamp += 1;
                }
                albedo.pixels[index] = Some(AlbedoPixel::from_color(color, Provenance::Measured));
                spectra[index] = Some(spectrum);
            }
            SampleOutcome::Rejected(r) => *summary.rejected.entry(r.as_str().to_string()).or_default() += 1,
        }
    }
    if summary.accepted == 0 {
        return Err(Error::NoValidSamples);
    }
    if summary.lidar_clamped > 0 {
        summary.warnings.push(format!(
            "{} LiDAR reflectances exceeded {} and were clamped",
            summary.lidar_clamped, config.inversion.clamp_max
        ));
    }
    Ok(SparseAlbedo {
        albedo,
        spectra: ReflectanceSpectrumMap {
            grid: cube.grid().clone(),
            width: w,
            height: h,
            spectra,
        },
        summary,
    })
}

/// Plain color rendering of the raw radiance cube, white-referenced so the
/// calibration target maps to Y = 1. Shading and illuminant color remain in
/// the result; this is the "camera image" baseline for evaluation.
pub fn radiance_rgb(cube: &SpectralCube, illuminant: &IlluminantSpectrum) -> Result<AlbedoMap> {
    if cube.grid() != illuminant.grid() {
        return Err(Error::GridMismatch);
    }
    let colorimeter = Colorimeter::new(cube.grid(), &ReferenceIlluminant::EqualEnergy)?;
    let white_y = colorimeter.xyz(illuminant.values())[1];
    if !(white_y > 0.0) {
        return Err(Error::Calibration("white reference has zero luminance".into()));
    }
    let pixels = (0..cube.height())
        .flat_map(|y| (0..cube.width()).map(move |x| (x, y)))
        .map(|(x, y)| {
            let xyz = colorimeter.xyz(cube.pixel(x, y)).map(|c| c / white_y);
            Some(AlbedoPixel::from_color(xyz_to_srgb(xyz), Provenance::Measured))
        })
        .collect();
    AlbedoMap::from_pixels(cube.width(), cube.height(), pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lidar::{forward_intensity, SensorConstants};
    use crate::spectral::IlluminantRegion;

    fn grid() -> WavelengthGrid {
        let mut bands: Vec<f64> = (0..31).map(|i| 400.0 + 10.0 * i as f64).collect();
        bands.push(905.0);
        WavelengthGrid::new(bands).unwrap()
    }

    fn constants() -> SensorConstants {
        SensorConstants {
            receiver_aperture_d_r: 0.1,
            eta_sys: 0.9,
            eta_atm: 0.95,
            lidar_wavelength: 905.0,
        }
    }

    fn flat_cube(w: usize, h: usize, value: f64) -> SpectralCube {
        SpectralCube::new(grid(), w, h, vec![value; w * h * 32]).unwrap()
    }

    fn sample_at(u: usize, v: usize, rho: f64) -> LidarSample {
        let (range, cos) = (2.0, 0.9);
        LidarSample {
            u,
            v,
            range_r: range,
            intensity_l: forward_intensity(&constants(), rho, range, cos).unwrap(),
            incidence_cos: cos,
        }
    }

    #[test]
    fn flat_spectra_recover_anchor() {
        let cube = flat_cube(2, 2, 3.0);
        let illum = IlluminantSpectrum::new(grid(), vec![7.0; 32]).unwrap();
        let rho = recover_spectrum(&cube, &illum, &sample_at(1, 0, 0.5), 0.5, 905.0).unwrap();
        assert!(rho.iter().all(|&r| (r - 0.5).abs() < 1e-15));
    }

    #[test]
    fn common_scale_cancels() {
        let values: Vec<f64> = (0..32).map(|b| 0.2 + 0.02 * b as f64).collect();
        let illum_vals: Vec<f64> = (0..32).map(|b| 1.0 + 0.01 * b as f64).collect();
        let illum = IlluminantSpectrum::new(grid(), illum_vals).unwrap();
        let cube = SpectralCube::new(grid(), 1, 1, values.clone()).unwrap();
        let scaled = SpectralCube::new(grid(), 1, 1, values.iter().map(|v| v * 37.5).collect()).unwrap();
        let s = sample_at(0, 0, 0.4);
        let a = recover_spectrum(&cube, &illum, &s, 0.4, 905.0).unwrap();
        let b = recover_spectrum(&scaled, &illum, &s, 0.4, 905.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dark_pixel_and_region_miss() {
        let mut radiance = vec![1.0; 2 * 32];
        radiance[31] = 0.0; // pixel (0,0), LiDAR band
        let cube = SpectralCube::new(grid(), 2, 1, radiance).unwrap();
        let illum = IlluminantSpectrum::new(grid(), vec![1.0; 32]).unwrap();
        assert!(recover_spectrum(&cube, &illum, &sample_at(0, 0, 0.5), 0.5, 905.0).is_err());
        assert!(recover_spectrum(&cube, &illum, &sample_at(1, 0, 0.5), 0.5, 905.0).is_ok());

        let regional = IlluminantSpectrum::with_regions(
            grid(),
            vec![IlluminantRegion {
                rect: PixelRect::new(0, 0, 1, 1),
                values: vec![1.0; 32],
            }],
        )
        .unwrap();
        assert!(matches!(
            recover_spectrum(&cube, &regional, &sample_at(1, 0, 0.5), 0.5, 905.0),
            Err(Error::RegionMiss { x: 1, y: 0 })
        ));
    }

    #[test]
    fn grid_without_lidar_band_is_an_error() {
        let vis = WavelengthGrid::uniform(400.0, 10.0, 31).unwrap();
        let cube = SpectralCube::new(vis.clone(), 1, 1, vec![1.0; 31]).unwrap();
        let illum = IlluminantSpectrum::new(vis, vec![1.0; 31]).unwrap();
        assert!(matches!(
            recover_spectrum(&cube, &illum, &sample_at(0, 0, 0.5), 0.5, 905.0),
            Err(Error::MissingBand { .. })
        ));
    }

    #[test]
    fn sparse_albedo_tallies_rejections() {
        let cube = flat_cube(3, 1, 2.0);
        let illum = IlluminantSpectrum::new(grid(), vec![2.0; 32]).unwrap();
        let grazing = LidarSample {
            incidence_cos: 0.05,
            ..sample_at(2, 0, 0.5)
        };
        let lidar = LidarSampleSet::new(constants(), vec![sample_at(0, 0, 0.5), grazing], 3, 1).unwrap();
        let out = compute_sparse_albedo(&cube, &illum, &lidar, &AlbedoConfig::default()).unwrap();
        assert_eq!(out.summary.accepted, 1);
        assert_eq!(out.summary.rejected["grazing_incidence"], 1);
        assert_eq!(out.albedo.valid_count(), 1);
        assert_eq!(out.albedo.get(0, 0).unwrap().provenance, Provenance::Measured);
        assert!(out.albedo.get(1, 0).is_none());
        // a flat 0.5 reflector under D65 is neutral grey
        let lin = out.albedo.get(0, 0).unwrap().linear;
        assert!(lin.iter().all(|c| (c - 0.5).abs() < 0.01), "{lin:?}");
    }

    #[test]
    fn empty_or_fully_rejected_sets_fail() {
        let cube = flat_cube(2, 1, 2.0);
        let illum = IlluminantSpectrum::new(grid(), vec![2.0; 32]).unwrap();
        let empty = LidarSampleSet::new(constants(), vec![], 2, 1).unwrap();
        let err = compute_sparse_albedo(&cube, &illum, &empty, &AlbedoConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "zero valid samples");

        let grazing = LidarSample {
            incidence_cos: 0.01,
            ..sample_at(0, 0, 0.5)
        };
        let lidar = LidarSampleSet::new(constants(), vec![grazing], 2, 1).unwrap();
        assert!(matches!(
            compute_sparse_albedo(&cube, &illum, &lidar, &AlbedoConfig::default()),
            Err(Error::NoValidSamples)
        ));
    }

    #[test]
    fn npy_round_trip_preserves_mask_and_provenance() {
        let mut map = AlbedoMap::empty(3, 2);
        map.set(0, 0, Some(AlbedoPixel::new([0.1, 0.2, 0.3], Provenance::Measured)));
        map.set(2, 1, Some(AlbedoPixel::new([0.9, 0.5, 0.125], Provenance::Densified)));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.npy");
        map.save_npy(&path).unwrap();
        assert_eq!(AlbedoMap::load_npy(&path).unwrap(), map);

        let png = dir.path().join("a.png");
        map.save_png(&png).unwrap();
        let img = image::open(&png).unwrap().to_rgba8();
        assert_eq!(img.get_pixel(1, 0)[3], 0);
        assert_eq!(img.get_pixel(0, 0)[3], 255);
    }
}
