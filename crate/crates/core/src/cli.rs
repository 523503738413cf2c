//! Command-line pipeline: `simulate`, `recover`, `densify`, `report`.
//!
//! Every subcommand accepts the [`RunConfig`] fields as flags. A JSON file
//! passed with `--config` overrides any flag it sets. Outputs go to
//! `out_dir` under fixed names, so the stages chain without extra flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::albedo::{compute_sparse_albedo, radiance_rgb, AlbedoConfig, AlbedoMap, RecoverySummary};
use crate::densify::{densify, DensifierConfig, DensifySummary, SearchStrategy};
use crate::error::{Error, Result};
use crate::lidar::{load_registered_sample_set, load_sample_set, save_sample_set, sidecar_path, InversionConfig};
use crate::metrics::{
    chart_report, load_annotations, ratio_scatter_report, whdr, AggregateMetrics, ChartReport, ReferenceChart,
    DEFAULT_WHDR_DELTA,
};
use crate::npy;
use crate::scene::{default_colorboard_spec, render_scene, SceneSpec};
use crate::spectral::{calibrate_illuminant, load_cube, save_cube, save_illuminant, PixelRect};

pub const CUBE_FILE: &str = "cube.hsc";
pub const WHITE_FILE: &str = "white.hsc";
pub const LIDAR_FILE: &str = "lidar.csv";
pub const SHADING_FILE: &str = "shading.npy";
pub const TRUTH_FILE: &str = "truth_albedo.npy";
pub const CHART_FILE: &str = "chart.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPARSE_FILE: &str = "sparse_albedo.npy";
pub const DENSE_FILE: &str = "dense_albedo.npy";

#[derive(Debug, Parser)]
#[command(
    name = "hyperlidar",
    version,
    about = "Albedo recovery from hyperspectral imagery and LiDAR intensity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic scene and write its dataset bundle.
    Simulate(RunArgs),
    /// Recover sparse albedo at LiDAR pixels.
    Recover(RunArgs),
    /// Fill the sparse albedo map by spectral nearest neighbors.
    Densify(RunArgs),
    /// Score an albedo map against the reference chart.
    Report(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file whose fields override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: RunConfig,
}

/// Run parameters. Unset fields fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Scene spec JSON for `simulate`; the built-in color board if absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub cube: Option<PathBuf>,
    #[arg(long)]
    pub white: Option<PathBuf>,
    #[arg(long)]
    pub lidar: Option<PathBuf>,
    /// CSV `index,u,v` assigning LiDAR points to pixels.
    #[arg(long)]
    pub registration: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Albedo NPY input: sparse map for `densify`, scored map for `report`.
    #[arg(long)]
    pub albedo: Option<PathBuf>,
    #[arg(long)]
    pub lidar_wavelength: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k_neighbors: Option<usize>,
    /// `brute_force` or `norm_pruned`.
    #[arg(long)]
    pub search: Option<String>,
    /// WHDR equality band.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub cos_min: Option<f64>,
    #[arg(long)]
    pub whiteboard_reflectance: Option<f64>,
    /// White-reference region `x,y,width,height`; whole frame if absent.
    #[arg(long, value_parser = parse_rect)]
    pub white_region: Option<PixelRect>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_rect(s: &str) -> std::result::Result<PixelRect, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [x, y, w, h] => Ok(PixelRect::new(x, y, w, h)),
        _ => Err("expected x,y,width,height".into()),
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            spec: other.spec.or(self.spec),
            out_dir: other.out_dir.or(self.out_dir),
            cube: other.cube.or(self.cube),
            white: other.white.or(self.white),
            lidar: other.lidar.or(self.lidar),
            registration: other.registration.or(self.registration),
            annotations: other.annotations.or(self.annotations),
            chart: other.chart.or(self.chart),
            albedo: other.albedo.or(self.albedo),
            lidar_wavelength: other.lidar_wavelength.or(self.lidar_wavelength),
            alpha: other.alpha.or(self.alpha),
            k_neighbors: other.k_neighbors.or(self.k_neighbors),
            search: other.search.or(self.search),
            delta: other.delta.or(self.delta),
            cos_min: other.cos_min.or(self.cos_min),
            whiteboard_reflectance: other.whiteboard_reflectance.or(self.whiteboard_reflectance),
            white_region: other.white_region.or(self.white_region),
            seed: other.seed.or(self.seed),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Explicit path, else the conventional file in `out_dir`.
    fn input(&self, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir().join(default_name))
    }

    fn densifier(&self) -> Result<DensifierConfig> {
        let defaults = DensifierConfig::default();
        let search = match self.search.as_deref() {
            None => defaults.search,
            Some("brute_force") => SearchStrategy::BruteForce,
            Some("norm_pruned") => SearchStrategy::NormPruned,
            Some(other) => {
                return Err(Error::Config(format!(
                    "search: unknown strategy {other:?} (brute_force | norm_pruned)"
                )));
            }
        };
        let config = DensifierConfig {
            alpha: self.alpha.unwrap_or(defaults.alpha),
            k_neighbors: self.k_neighbors.unwrap_or(defaults.k_neighbors),
            search,
        };
        config.validate()?;
        Ok(config)
    }
}

fn resolve(args: RunArgs) -> Result<RunConfig> {
    match &args.config {
        Some(path) => Ok(args.flags.overridden_by(RunConfig::load(path)?)),
        None => Ok(args.flags),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let m = cmd_simulate(&resolve(a)?)?;
            println!(
                "simulated {}x{}x{} scene with {} LiDAR samples",
                m.width, m.height, m.bands, m.lidar_samples
            );
        }
        Command::Recover(a) => {
            let s = cmd_recover(&resolve(a)?)?;
            warn_all(&s.warnings);
            println!("recovered {} of {} LiDAR samples", s.accepted, s.samples);
        }
        Command::Densify(a) => {
            let s = cmd_densify(&resolve(a)?)?;
            warn_all(&s.warnings);
            println!(
                "filled {} pixels from {} dictionary entries",
                s.filled, s.dictionary_size
            );
        }
        Command::Report(a) => {
            let r = cmd_report(&resolve(a)?)?;
            print!("{}: mean CIEDE2000 {:.4}", r.albedo, r.chart.aggregate.ciede2000);
            if let Some(w) = r.whdr {
                print!(", WHDR {w:.4}");
            }
            println!();
        }
    }
    Ok(())
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub files: Vec<ManifestFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub lidar_samples: usize,
    pub artifacts: Vec<ManifestEntry>,
}

fn manifest_file(dir: &Path, name: &str) -> Result<ManifestFile> {
    let path = dir.join(name);
    let bytes = fs::metadata(&path).map_err(|e| Error::io(&path, e))?.len();
    Ok(ManifestFile {
        path: name.to_string(),
        bytes,
        sha256: sha256_file(&path)?,
    })
}

/// Renders the scene and writes cube, white reference, LiDAR samples,
/// shading, ground-truth albedo, chart and a manifest of SHA-256 hashes.
pub fn cmd_simulate(config: &RunConfig) -> Result<Manifest> {
    let mut spec = match &config.spec {
        Some(path) => SceneSpec::load(path)?,
        None => default_colorboard_spec(),
    };
    if let Some(seed) = config.seed {
        spec.seed = seed;
    }
    if let Some(wl) = config.lidar_wavelength {
        spec.lidar.constants.lidar_wavelength = wl;
    }
    let scene = render_scene(&spec)?;
    let dir = config.out_dir();
    create_dir(&dir)?;

    save_cube(&scene.cube, dir.join(CUBE_FILE))?;
    save_cube(&scene.white_cube, dir.join(WHITE_FILE))?;
    save_sample_set(&scene.lidar, dir.join(LIDAR_FILE))?;
    npy::write_f64(
        dir.join(SHADING_FILE),
        &[spec.height, spec.width],
        &scene.shading.values,
    )?;
    scene.truth_albedo.save_npy(dir.join(TRUTH_FILE))?;
    scene.chart.save(dir.join(CHART_FILE))?;

    let lidar_sidecar = sidecar_path(Path::new(LIDAR_FILE));
    let entries = [
        ("cube", vec![CUBE_FILE.to_string()]),
        ("white_reference", vec![WHITE_FILE.to_string()]),
        (
            "lidar",
            vec![LIDAR_FILE.to_string(), lidar_sidecar.to_string_lossy().into_owned()],
        ),
        ("shading", vec![SHADING_FILE.to_string()]),
        ("truth_albedo", vec![TRUTH_FILE.to_string()]),
        ("chart", vec![CHART_FILE.to_string()]),
    ];
    let artifacts = entries
        .into_iter()
        .map(|(name, files)| {
            Ok(ManifestEntry {
                name: name.to_string(),
                files: files.iter().map(|f| manifest_file(&dir, f)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    let manifest = Manifest {
        seed: spec.seed,
        width: spec.width,
        height: spec.height,
        bands: spec.grid.band_count(),
        lidar_samples: scene.lidar.len(),
        artifacts,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Calibrates the illuminant, inverts LiDAR reflectance, recovers spectra
/// and writes the sparse albedo map plus a summary.
pub fn cmd_recover(config: &RunConfig) -> Result<RecoverySummary> {
    let white_path = config.input(&config.white, WHITE_FILE);
    if !white_path.exists() {
        return Err(Error::Calibration(format!(
            "white reference cube {} not found",
            white_path.display()
        )));
    }
    let cube = load_cube(config.input(&config.cube, CUBE_FILE))?;
    let white = load_cube(&white_path)?;
    let lidar_path = config.input(&config.lidar, LIDAR_FILE);
    let (mut lidar, dropped) = match &config.registration {
        Some(reg) => load_registered_sample_set(&lidar_path, reg)?,
        None => (load_sample_set(&lidar_path)?, 0),
    };
    if let Some(wl) = config.lidar_wavelength {
        lidar = lidar.with_lidar_wavelength(wl)?;
    }
    let region = config
        .white_region
        .unwrap_or_else(|| PixelRect::full(white.width(), white.height()));
    let illuminant = calibrate_illuminant(&white, region, config.whiteboard_reflectance.unwrap_or(1.0))?;

    let albedo_config = AlbedoConfig {
        inversion: InversionConfig {
            cos_min: config.cos_min.unwrap_or(InversionConfig::default().cos_min),
            ..InversionConfig::default()
        },
        ..AlbedoConfig::default()
    };
    let sparse = compute_sparse_albedo(&cube, &illuminant, &lidar, &albedo_config)?;
    let mut summary = sparse.summary;
    if dropped > 0 {
        summary.warnings.push(format!(
            "{dropped} LiDAR points had no registration entry and were dropped"
        ));
    }

    let dir = config.out_dir();
    create_dir(&dir)?;
    save_illuminant(&illuminant, dir.join("illuminant.json"))?;
    sparse.albedo.save_npy(dir.join(SPARSE_FILE))?;
    sparse.albedo.save_png(dir.join("sparse_albedo.png"))?;
    write_json(&dir.join("recover_summary.json"), &summary)?;
    Ok(summary)
}

/// Densifies the sparse albedo map and writes the dense map plus a summary.
pub fn cmd_densify(config: &RunConfig) -> Result<DensifySummary> {
    let cube = load_cube(config.input(&config.cube, CUBE_FILE))?;
    let sparse = AlbedoMap::load_npy(config.input(&config.albedo, SPARSE_FILE))?;
    let dense = densify(&cube, &sparse, &config.densifier()?)?;
    let dir = config.out_dir();
    create_dir(&dir)?;
    dense.albedo.save_npy(dir.join(DENSE_FILE))?;
    dense.albedo.save_png(dir.join("dense_albedo.png"))?;
    write_json(&dir.join("densify_summary.json"), &dense.summary)?;
    Ok(dense.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub rgb: AggregateMetrics,
    /// Aggregates on which the albedo is strictly better than the RGB
    /// rendering.
    pub albedo_better_on: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub albedo: String,
    pub chart: ChartReport,
    pub whdr: Option<f64>,
    pub whdr_delta: f64,
    pub scatter_pairs: usize,
    pub scatter_skipped: usize,
    pub scatter_rms_log_deviation: Option<f64>,
    pub baseline: Option<BaselineComparison>,
}

fn better_on(albedo: &AggregateMetrics, rgb: &AggregateMetrics) -> Vec<String> {
    let mut out = Vec::new();
    for (name, a, b) in [
        ("cie76", albedo.cie76, rgb.cie76),
        ("ciede2000", albedo.ciede2000, rgb.ciede2000),
        ("mse", albedo.mse, rgb.mse),
    ] {
        if a < b {
            out.push(name.to_string());
        }
    }
    if let (Some(a), Some(b)) = (albedo.luminance_correlation, rgb.luminance_correlation) {
        if a > b {
            out.push("luminance_correlation".to_string());
        }
    }
    out
}

/// Chart report, optional WHDR, ratio scatter and, when the cube and white
/// reference are available, a comparison against the plain RGB rendering.
pub fn cmd_report(config: &RunConfig) -> Result<Report> {
    let albedo_path = match &config.albedo {
        Some(p) => p.clone(),
        None => {
            let dense = config.out_dir().join(DENSE_FILE);
            if dense.exists() {
                dense
            } else {
                config.out_dir().join(SPARSE_FILE)
            }
        }
    };
    let albedo = AlbedoMap::load_npy(&albedo_path)?;
    let chart = ReferenceChart::load(config.input(&config.chart, CHART_FILE))?;
    let chart_metrics = chart_report(&albedo, &chart)?;
    let delta = config.delta.unwrap_or(DEFAULT_WHDR_DELTA);
    let whdr_value = match &config.annotations {
        Some(path) => Some(whdr(&albedo, &load_annotations(path)?, delta)?),
        None => None,
    };
    let scatter = ratio_scatter_report(&albedo, &chart)?;

    let cube_path = config.input(&config.cube, CUBE_FILE);
    let white_path = config.input(&config.white, WHITE_FILE);
    let baseline = if cube_path.exists() && white_path.exists() {
        let cube = load_cube(&cube_path)?;
        let white = load_cube(&white_path)?;
        let region = config
            .white_region
            .unwrap_or_else(|| PixelRect::full(white.width(), white.height()));
        let illuminant = calibrate_illuminant(&white, region, config.whiteboard_reflectance.unwrap_or(1.0))?;
        let rgb = chart_report(&radiance_rgb(&cube, &illuminant)?, &chart)?.aggregate;
        Some(BaselineComparison {
            albedo_better_on: better_on(&chart_metrics.aggregate, &rgb),
            rgb,
        })
    } else {
        None
    };

    let dir = config.out_dir();
    create_dir(&dir)?;
    scatter.save_csv(dir.join("ratio_scatter.csv"))?;
    scatter.save_png(dir.join("ratio_scatter.png"))?;
    let report = Report {
        albedo: albedo_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        chart: chart_metrics,
        whdr: whdr_value,
        whdr_delta: delta,
        scatter_pairs: scatter.pairs.len(),
        scatter_skipped: scatter.skipped.len(),
        scatter_rms_log_deviation: scatter.rms_log_deviation(),
        baseline,
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_flags() {
        let flags = RunConfig {
            alpha: Some(2.0),
            k_neighbors: Some(5),
            ..Default::default()
        };
        let file: RunConfig = serde_json::from_str(r#"{"alpha": 0.5, "delta": 0.2}"#).unwrap();
        let merged = flags.overridden_by(file);
        assert_eq!(merged.alpha, Some(0.5));
        assert_eq!(merged.k_neighbors, Some(5));
        assert_eq!(merged.delta, Some(0.2));
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"alpah": 0.5}"#).is_err());
    }

    #[test]
    fn densifier_settings() {
        let c = RunConfig {
            search: Some("norm_pruned".into()),
            ..Default::default()
        };
        assert_eq!(c.densifier().unwrap().search, SearchStrategy::NormPruned);
        let bad = RunConfig {
            search: Some("kd_tree".into()),
            ..Default::default()
        };
        assert!(bad.densifier().is_err());
        let zero_k = RunConfig {
            k_neighbors: Some(0),
            ..Default::default()
        };
        assert!(zero_k.densifier().is_err());
    }

    #[test]
    fn rect_flag_parsing() {
        assert_eq!(parse_rect("1,2,3,4").unwrap(), PixelRect::new(1, 2, 3, 4));
        assert!(parse_rect("1,2,3").is_err());
        assert!(parse_rect("a,2,3,4").is_err());
    }

    #[test]
    fn cli_parses_subcommands() {
        let cli = Cli::try_parse_from(["hyperlidar", "densify", "--alpha", "0.5", "--config", "run.json"]).unwrap();
        match cli.command {
            Command::Densify(a) => {
                assert_eq!(a.flags.alpha, Some(0.5));
                assert_eq!(a.config, Some(PathBuf::from("run.json")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
