//! Synthetic Lambertian color-board scene with a co-located hyperspectral
//! camera and LiDAR.
//!
//! The board is a tilted plane in front of a pinhole camera. Every pixel
//! sees one material; radiance is `m · e(λ) · ρ(λ)` where `m` is the
//! Lambertian cosine of a directional light times a binary shadow factor.
//! LiDAR returns follow the range equation with the exact range and
//! incidence angle of the viewing ray.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::albedo::{AlbedoMap, AlbedoPixel, Provenance};
use crate::colorimetry::{xyz_to_srgb, Colorimeter, ReferenceIlluminant};
use crate::error::{Error, Result};
use crate::geometry::{dot, normalize, DepthMap, PinholeIntrinsics};
use crate::lidar::{forward_intensity, LidarSample, LidarSampleSet, SensorConstants};
use crate::metrics::{ChartPatch, ReferenceChart};
use crate::spectral::{IlluminantSpectrum, PixelRect, SpectralCube, WavelengthGrid};

// Independent RNG streams derived from the one scene seed.
const STREAM_SAMPLING: u64 = 1;
const STREAM_RADIANCE: u64 = 2;
const STREAM_WHITE: u64 = 3;
const STREAM_LIDAR: u64 = 4;

const SECOND_RADIATION_CONSTANT: f64 = 1.438_776_877e-2;

/// One Gaussian lobe of a reflectance curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub center_nm: f64,
    pub width_nm: f64,
    pub amplitude: f64,
}

/// Reflectance `base + Σ amplitude · exp(-½((λ − center)/width)²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub base: f64,
    #[serde(default)]
    pub lobes: Vec<Lobe>,
}

impl Material {
    pub fn flat(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            base: value,
            lobes: Vec::new(),
        }
    }

    pub fn reflectance(&self, wavelength_nm: f64) -> f64 {
        self.base
            + self
                .lobes
                .iter()
                .map(|l| l.amplitude * (-0.5 * ((wavelength_nm - l.center_nm) / l.width_nm).powi(2)).exp())
                .sum::<f64>()
    }

    pub fn spectrum(&self, grid: &WavelengthGrid) -> Result<Vec<f64>> {
        let values: Vec<f64> = grid.bands().iter().map(|&wl| self.reflectance(wl)).collect();
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Scene(format!(
                "material {:?} reflectance {v} at {} nm outside [0, 1]",
                self.name,
                grid.bands()[i]
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IlluminantModel {
    /// Planck radiator normalized to peak 1 over the grid.
    Blackbody {
        temperature_k: f64,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

impl IlluminantModel {
    pub fn spectrum(&self, grid: &WavelengthGrid) -> Result<Vec<f64>> {
        let values = match self {
            IlluminantModel::Blackbody { temperature_k } => {
                if !(temperature_k.is_finite() && *temperature_k > 0.0) {
                    return Err(Error::domain("illuminant.temperature_k", "must be positive"));
                }
                let planck = |nm: f64| {
                    let l = nm * 1e-9;
                    l.powi(-5) / ((SECOND_RADIATION_CONSTANT / (l * temperature_k)).exp() - 1.0)
                };
                let raw: Vec<f64> = grid.bands().iter().map(|&nm| planck(nm)).collect();
                let peak = raw.iter().cloned().fold(0.0, f64::max);
                raw.into_iter().map(|v| v / peak).collect()
            }
            IlluminantModel::Tabulated { values } => {
                if values.len() != grid.band_count() {
                    return Err(Error::domain(
                        "illuminant.values",
                        format!("{} values for {} bands", values.len(), grid.band_count()),
                    ));
                }
                values.clone()
            }
        };
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain("illuminant", "every band must be positive"));
        }
        Ok(values)
    }
}

/// Color-board layout in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardLayout {
    pub rows: usize,
    pub cols: usize,
    pub origin: [usize; 2],
    pub patch_size: [usize; 2],
    pub gap: usize,
}

impl BoardLayout {
    pub fn patch_rect(&self, row: usize, col: usize) -> PixelRect {
        let [w, h] = self.patch_size;
        PixelRect::new(
            self.origin[0] + col * (w + self.gap),
            self.origin[1] + row * (h + self.gap),
            w,
            h,
        )
    }

    pub fn bounds(&self) -> PixelRect {
        let [w, h] = self.patch_size;
        PixelRect::new(
            self.origin[0],
            self.origin[1],
            self.cols * w + self.cols.saturating_sub(1) * self.gap,
            self.rows * h + self.rows.saturating_sub(1) * self.gap,
        )
    }
}

/// Axis-aligned rectangle in board-fractional coordinates `[0, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Union of rectangles casting an umbra onto the board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occluder {
    pub rects: Vec<FracRect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub focal_px: f64,
    /// Distance along the optical axis to the board plane, meters.
    pub board_distance_m: f64,
    /// Rotation of the board about the camera x axis, degrees.
    pub tilt_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPattern {
    Random,
    Grid,
    Scanline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarSpec {
    pub coverage: f64,
    pub pattern: ScanPattern,
    pub constants: SensorConstants,
}

/// Additive Gaussian noise. Radiance σ is relative to the peak noiseless
/// white-reference radiance, LiDAR σ to the peak unit-reflector intensity
/// over the sampled pixels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub radiance_sigma: f64,
    pub lidar_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub grid: WavelengthGrid,
    /// One material per board patch, row-major.
    pub materials: Vec<Material>,
    pub background: Material,
    pub board: BoardLayout,
    pub illuminant: IlluminantModel,
    #[serde(default)]
    pub occluder: Option<Occluder>,
    /// Unit vector from the surface toward the light, camera frame.
    pub light_direction: [f64; 3],
    /// Fraction of direct light reaching shadowed pixels.
    pub shadow_attenuation: f64,
    pub whiteboard_reflectance: f64,
    pub camera: CameraSpec,
    pub lidar: LidarSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub seed: u64,
}

impl SceneSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::domain("width/height", "frame must be non-empty"));
        }
        if self.board.rows == 0 || self.board.cols == 0 || self.board.patch_size.contains(&0) {
            return Err(Error::domain("board", "needs at least one non-empty patch"));
        }
        if !self.board.bounds().fits_within(self.width, self.height) {
            return Err(Error::domain("board", "extends outside the frame"));
        }
        if self.materials.len() != self.board.rows * self.board.cols {
            return Err(Error::domain(
                "materials",
                format!(
                    "{} materials for a {}x{} board",
                    self.materials.len(),
                    self.board.rows,
                    self.board.cols
                ),
            ));
        }
        for m in self.materials.iter().chain([&self.background]) {
            m.spectrum(&self.grid)?;
        }
        self.illuminant.spectrum(&self.grid)?;
        self.grid.band_index(self.lidar.constants.lidar_wavelength)?;
        self.lidar.constants.validate()?;
        if !(self.lidar.coverage > 0.0 && self.lidar.coverage <= 1.0) {
            return Err(Error::domain(
                "lidar.coverage",
                format!("{} outside (0, 1]", self.lidar.coverage),
            ));
        }
        for (field, v) in [
            ("noise.radiance_sigma", self.noise.radiance_sigma),
            ("noise.lidar_sigma", self.noise.lidar_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(field, format!("{v} must be nonnegative")));
            }
        }
        if !(0.0..=1.0).contains(&self.shadow_attenuation) {
            return Err(Error::domain("shadow_attenuation", "outside [0, 1]"));
        }
        if !(self.whiteboard_reflectance > 0.0 && self.whiteboard_reflectance <= 1.0) {
            return Err(Error::domain("whiteboard_reflectance", "outside (0, 1]"));
        }
        let c = &self.camera;
        if !(c.focal_px > 0.0 && c.board_distance_m > 0.0 && c.tilt_deg.abs() < 60.0) {
            return Err(Error::domain(
                "camera",
                "needs positive focal/distance and |tilt| < 60°",
            ));
        }
        let l = self.light_direction;
        if !(dot(l, l) > 0.0 && l.iter().all(|v| v.is_finite())) {
            return Err(Error::domain("light_direction", "must be a nonzero vector"));
        }
        if let Some(occ) = &self.occluder {
            for r in &occ.rects {
                if !(0.0 <= r.x0 && r.x0 < r.x1 && r.x1 <= 1.0 && 0.0 <= r.y0 && r.y0 < r.y1 && r.y1 <= 1.0) {
                    return Err(Error::domain(
                        "occluder.rects",
                        format!("{r:?} is not a sub-rectangle of [0, 1]²"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> PinholeIntrinsics {
        PinholeIntrinsics::centered(self.camera.focal_px, self.width, self.height)
    }

    /// Board-plane normal, oriented toward the camera.
    pub fn board_normal(&self) -> [f64; 3] {
        let t = self.camera.tilt_deg.to_radians();
        [0.0, t.sin(), -t.cos()]
    }

    /// Lambertian cosine of the unshadowed board.
    pub fn light_cosine(&self) -> f64 {
        normalize(self.light_direction).map_or(0.0, |l| dot(self.board_normal(), l).max(0.0))
    }
}

/// Per-pixel geometric factor `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadingField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ShadingField {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn scaled(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.values.len() || factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Scene("shading factors must be positive, one per pixel".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(factors).map(|(m, f)| m * f).collect(),
            ..*self
        })
    }
}

#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub cube: SpectralCube,
    pub white_cube: SpectralCube,
    /// Pixels of the white cube that show the whiteboard.
    pub white_region: PixelRect,
    /// Noiseless illuminant actually used, for reference.
    pub illuminant: IlluminantSpectrum,
    pub lidar: LidarSampleSet,
    pub shading: ShadingField,
    pub depth: DepthMap,
    pub truth_albedo: AlbedoMap,
    pub chart: ReferenceChart,
    /// Material index per pixel; `materials.len()` marks the background.
    pub material_map: Vec<usize>,
    pub shadow_mask: Vec<bool>,
}

impl RenderedScene {
    pub fn width(&self) -> usize {
        self.cube.width()
    }

    pub fn height(&self) -> usize {
        self.cube.height()
    }

    pub fn is_shadowed(&self, x: usize, y: usize) -> bool {
        self.shadow_mask[y * self.width() + x]
    }

    pub fn material_at(&self, x: usize, y: usize) -> usize {
        self.material_map[y * self.width() + x]
    }
}

struct Layout {
    material_map: Vec<usize>,
    shadow_mask: Vec<bool>,
}

fn layout(spec: &SceneSpec) -> Layout {
    let (w, h) = (spec.width, spec.height);
    let background = spec.materials.len();
    let mut material_map = vec![background; w * h];
    for row in 0..spec.board.rows {
        for col in 0..spec.board.cols {
            for (x, y) in spec.board.patch_rect(row, col).pixels() {
                material_map[y * w + x] = row * spec.board.cols + col;
            }
        }
    }
    let bounds = spec.board.bounds();
    let mut shadow_mask = vec![false; w * h];
    if let Some(occ) = &spec.occluder {
        for (x, y) in bounds.pixels() {
            // pixel centers in board-fractional coordinates
            let fx = (x - bounds.x) as f64 + 0.5;
            let fy = (y - bounds.y) as f64 + 0.5;
            let (fx, fy) = (fx / bounds.width as f64, fy / bounds.height as f64);
            if occ
                .rects
                .iter()
                .any(|r| r.x0 <= fx && fx < r.x1 && r.y0 <= fy && fy < r.y1)
            {
                shadow_mask[y * w + x] = true;
            }
        }
    }
    Layout {
        material_map,
        shadow_mask,
    }
}

struct PixelGeometry {
    depth: f64,
    range: f64,
    incidence_cos: f64,
}

fn pixel_geometry(spec: &SceneSpec) -> Result<Vec<PixelGeometry>> {
    let k = spec.intrinsics();
    let n = spec.board_normal();
    let center = [0.0, 0.0, spec.camera.board_distance_m];
    let nc = dot(n, center);
    let mut out = Vec::with_capacity(spec.width * spec.height);
    for v in 0..spec.height {
        for u in 0..spec.width {
            let ray = k.ray(u as f64, v as f64);
            let nr = dot(n, ray);
            if nr >= 0.0 {
                return Err(Error::Scene(format!("pixel ({u}, {v}) does not see the board")));
            }
            let depth = nc / nr;
            let len = dot(ray, ray).sqrt();
            out.push(PixelGeometry {
                depth,
                range: depth * len,
                incidence_cos: -nr / len,
            });
        }
    }
    Ok(out)
}

fn lambert_shading(spec: &SceneSpec, layout: &Layout) -> ShadingField {
    let cos_light = spec.light_cosine();
    let values = layout
        .shadow_mask
        .iter()
        .map(|&s| {
            if s {
                cos_light * spec.shadow_attenuation
            } else {
                cos_light
            }
        })
        .collect();
    ShadingField {
        width: spec.width,
        height: spec.height,
        values,
    }
}

fn select_pixels(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let (w, h) = (spec.width, spec.height);
    let coverage = spec.lidar.coverage;
    match spec.lidar.pattern {
        ScanPattern::Random => {
            let total = w * h;
            let count = ((coverage * total as f64).round() as usize).clamp(1, total);
            let mut picked = rand::seq::index::sample(rng, total, count).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| (i % w, i / w)).collect()
        }
        ScanPattern::Grid => {
            let stride = ((1.0 / coverage.sqrt()).round() as usize).max(1);
            let off = stride / 2;
            (0..h)
                .filter(|y| y % stride == off.min(h - 1) % stride)
                .flat_map(|y| {
                    (0..w)
                        .filter(move |x| x % stride == off.min(w - 1) % stride)
                        .map(move |x| (x, y))
                })
                .collect()
        }
        ScanPattern::Scanline => {
            let stride = ((1.0 / coverage).round() as usize).max(1);
            (0..h)
                .filter(|y| y % stride == 0)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .collect()
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn add_noise(values: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    for v in values {
        *v = (*v + normal.sample(rng)).max(0.0);
    }
}

/// Renders `spec` with its own Lambertian shading.
pub fn render_scene(spec: &SceneSpec) -> Result<RenderedScene> {
    spec.validate()?;
    let layout = layout(spec);
    let shading = lambert_shading(spec, &layout);
    render(spec, layout, shading)
}

/// Renders `spec` with an externally supplied shading field. The LiDAR
/// returns do not depend on passive shading and match [`render_scene`].
pub fn render_with_shading(spec: &SceneSpec, shading: &ShadingField) -> Result<RenderedScene> {
    spec.validate()?;
    if shading.width != spec.width || shading.height != spec.height || shading.values.len() != spec.width * spec.height
    {
        return Err(Error::Scene("shading field does not match the frame".into()));
    }
    if shading.values.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::Scene("shading values must be finite and nonnegative".into()));
    }
    render(spec, layout(spec), shading.clone())
}

fn render(spec: &SceneSpec, layout: Layout, shading: ShadingField) -> Result<RenderedScene> {
    let grid = &spec.grid;
    let bands = grid.band_count();
    let (w, h) = (spec.width, spec.height);
    let illum = spec.illuminant.spectrum(grid)?;
    let spectra: Vec<Vec<f64>> = spec
        .materials
        .iter()
        .chain([&spec.background])
        .map(|m| m.spectrum(grid))
        .collect::<Result<_>>()?;
    let geometry = pixel_geometry(spec)?;

    let mut radiance = Vec::with_capacity(w * h * bands);
    for (i, &mat) in layout.material_map.iter().enumerate() {
        let m = shading.values[i];
        radiance.extend(spectra[mat].iter().zip(&illum).map(|(r, e)| m * e * r));
    }

    let lit = spec.light_cosine();
    if lit <= 0.0 {
        return Err(Error::Scene("light does not reach the board".into()));
    }
    let mut white = Vec::with_capacity(w * h * bands);
    for _ in 0..w * h {
        white.extend(illum.iter().map(|e| lit * e * spec.whiteboard_reflectance));
    }
    let white_peak = white.iter().cloned().fold(0.0, f64::max);
    add_noise(
        &mut radiance,
        spec.noise.radiance_sigma * white_peak,
        &mut stream(spec.seed, STREAM_RADIANCE),
    );
    add_noise(
        &mut white,
        spec.noise.radiance_sigma * white_peak,
        &mut stream(spec.seed, STREAM_WHITE),
    );

    let constants = spec.lidar.constants;
    let lidar_band = grid.band_index(constants.lidar_wavelength)?;
    let picked = select_pixels(spec, &mut stream(spec.seed, STREAM_SAMPLING));
    let mut samples = Vec::with_capacity(picked.len());
    let mut unit_peak: f64 = 0.0;
    for &(u, v) in &picked {
        let g = &geometry[v * w + u];
        let rho = spectra[layout.material_map[v * w + u]][lidar_band];
        unit_peak = unit_peak.max(forward_intensity(&constants, 1.0, g.range, g.incidence_cos)?);
        samples.push(LidarSample {
            u,
            v,
            range_r: g.range,
            intensity_l: forward_intensity(&constants, rho, g.range, g.incidence_cos)?,
            incidence_cos: g.incidence_cos,
        });
    }
    let sigma_l = spec.noise.lidar_sigma * unit_peak;
    if sigma_l > 0.0 {
        let mut rng = stream(spec.seed, STREAM_LIDAR);
        let normal = Normal::new(0.0, sigma_l).expect("sigma is finite and positive");
        for s in &mut samples {
            s.intensity_l = (s.intensity_l + normal.sample(&mut rng)).max(0.0);
        }
    }

    let colorimeter = Colorimeter::new(grid, &ReferenceIlluminant::D65)?;
    let truth_colors: Vec<[f64; 3]> = spectra.iter().map(|s| xyz_to_srgb(colorimeter.xyz(s)).linear).collect();
    let truth_pixels = layout
        .material_map
        .iter()
        .map(|&m| Some(AlbedoPixel::new(truth_colors[m], Provenance::Measured)))
        .collect();
    let mut patches = Vec::with_capacity(spec.materials.len());
    for row in 0..spec.board.rows {
        for col in 0..spec.board.cols {
            let i = row * spec.board.cols + col;
            patches.push(ChartPatch {
                name: spec.materials[i].name.clone(),
                region: spec.board.patch_rect(row, col),
                truth: truth_colors[i],
            });
        }
    }

    Ok(RenderedScene {
        cube: SpectralCube::new(grid.clone(), w, h, radiance)?,
        white_cube: SpectralCube::new(grid.clone(), w, h, white)?,
        white_region: PixelRect::full(w, h),
        illuminant: IlluminantSpectrum::new(grid.clone(), illum)?,
        lidar: LidarSampleSet::new(constants, samples, w, h)?,
        depth: DepthMap::new(w, h, geometry.iter().map(|g| g.depth).collect())?,
        shading,
        truth_albedo: AlbedoMap::from_pixels(w, h, truth_pixels)?,
        chart: ReferenceChart::new(w, h, patches)?,
        material_map: layout.material_map,
        shadow_mask: layout.shadow_mask,
    })
}

fn lobe(center_nm: f64, width_nm: f64, amplitude: f64) -> Lobe {
    Lobe {
        center_nm,
        width_nm,
        amplitude,
    }
}

fn chromatic(name: &str, base: f64, lobes: &[(f64, f64, f64)]) -> Material {
    Material {
        name: name.to_string(),
        base,
        lobes: lobes.iter().map(|&(c, w, a)| lobe(c, w, a)).collect(),
    }
}

/// 24-patch board under a 5800 K surrogate sunlamp, T-shaped shadow,
/// 31 visible bands plus a 905 nm LiDAR band.
pub fn default_colorboard_spec() -> SceneSpec {
    let mut bands: Vec<f64> = (0..31).map(|i| 400.0 + 10.0 * i as f64).collect();
    bands.push(905.0);
    let materials = vec![
        chromatic("dark_skin", 0.08, &[(620.0, 60.0, 0.20), (700.0, 50.0, 0.10)]),
        chromatic("light_skin", 0.22, &[(640.0, 70.0, 0.40), (520.0, 40.0, 0.05)]),
        chromatic("blue_sky", 0.12, &[(450.0, 40.0, 0.25), (500.0, 40.0, 0.10)]),
        chromatic("foliage", 0.06, &[(550.0, 30.0, 0.12)]),
        chromatic("blue_flower", 0.18, &[(440.0, 35.0, 0.30), (680.0, 40.0, 0.20)]),
        chromatic("bluish_green", 0.16, &[(505.0, 40.0, 0.42)]),
        chromatic("orange", 0.05, &[(640.0, 50.0, 0.75), (590.0, 20.0, 0.10)]),
        chromatic("purplish_blue", 0.06, &[(450.0, 30.0, 0.35)]),
        chromatic("moderate_red", 0.07, &[(660.0, 60.0, 0.55), (430.0, 20.0, 0.10)]),
        chromatic("purple", 0.04, &[(430.0, 30.0, 0.12), (690.0, 40.0, 0.25)]),
        chromatic("yellow_green", 0.06, &[(560.0, 40.0, 0.55), (680.0, 50.0, 0.10)]),
        chromatic("orange_yellow", 0.05, &[(625.0, 70.0, 0.72)]),
        chromatic("blue", 0.03, &[(450.0, 30.0, 0.25)]),
        chromatic("green", 0.08, &[(535.0, 30.0, 0.26)]),
        chromatic("red", 0.03, &[(680.0, 45.0, 0.65)]),
        chromatic("yellow", 0.08, &[(620.0, 90.0, 0.70), (560.0, 30.0, 0.12)]),
        chromatic("magenta", 0.08, &[(430.0, 30.0, 0.35), (680.0, 50.0, 0.55)]),
        chromatic("cyan", 0.12, &[(480.0, 45.0, 0.36)]),
        Material::flat("white", 0.88),
        Material::flat("neutral_8", 0.58),
        Material::flat("neutral_6.5", 0.36),
        Material::flat("neutral_5", 0.19),
        Material::flat("neutral_3.5", 0.09),
        Material::flat("black", 0.03),
    ];
    SceneSpec {
        width: 96,
        height: 64,
        grid: WavelengthGrid::new(bands).expect("constant grid is valid"),
        materials,
        background: Material::flat("backdrop", 0.45),
        board: BoardLayout {
            rows: 4,
            cols: 6,
            origin: [1, 5],
            patch_size: [14, 12],
            gap: 2,
        },
        illuminant: IlluminantModel::Blackbody { temperature_k: 5800.0 },
        occluder: Some(Occluder {
            rects: vec![
                FracRect {
                    x0: 0.25,
                    y0: 0.20,
                    x1: 0.80,
                    y1: 0.36,
                },
                FracRect {
                    x0: 0.45,
                    y0: 0.36,
                    x1: 0.60,
                    y1: 0.90,
                },
            ],
        }),
        light_direction: [0.2, -0.3, -1.0],
        shadow_attenuation: 0.23,
        whiteboard_reflectance: 1.0,
        camera: CameraSpec {
            focal_px: 100.0,
            board_distance_m: 1.5,
            tilt_deg: 20.0,
        },
        lidar: LidarSpec {
            coverage: 0.2,
            pattern: ScanPattern::Random,
            constants: SensorConstants {
                receiver_aperture_d_r: 0.05,
                eta_sys: 0.9,
                eta_atm: 0.98,
                lidar_wavelength: 905.0,
            },
        },
        noise: NoiseSpec::default(),
        seed: 7,
    }
}
