//! Chart metrics for recovered albedo against the plain RGB rendering,
//! plus the luminance-ratio scatter as CSV and PNG.
//!
//! ```text
//! cargo run --example evaluate_metrics -- [out_dir]
//! ```

use std::path::PathBuf;

use hyperlidar::albedo::{compute_sparse_albedo, radiance_rgb, AlbedoConfig};
use hyperlidar::densify::{densify, DensifierConfig};
use hyperlidar::metrics::{chart_report, ratio_scatter_report};
use hyperlidar::scene::{default_colorboard_spec, render_scene};
use hyperlidar::spectral::calibrate_illuminant;

fn main() -> hyperlidar::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hyperlidar-metrics"));
    std::fs::create_dir_all(&out).map_err(|e| hyperlidar::Error::Config(e.to_string()))?;

    let spec = default_colorboard_spec();
    let scene = render_scene(&spec)?;
    let illuminant = calibrate_illuminant(&scene.white_cube, scene.white_region, spec.whiteboard_reflectance)?;
    let sparse = compute_sparse_albedo(&scene.cube, &illuminant, &scene.lidar, &AlbedoConfig::default())?;
    let dense = densify(&scene.cube, &sparse.albedo, &DensifierConfig::default())?.albedo;
    let rgb = radiance_rgb(&scene.cube, &illuminant)?;

    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10}",
        "", "CIE76", "CIEDE2000", "MSE", "corr"
    );
    for (name, map) in [("albedo", &dense), ("rgb", &rgb)] {
        let a = chart_report(map, &scene.chart)?.aggregate;
        println!(
            "{name:>8} {:>10.4} {:>10.4} {:>10.2e} {:>10.5}",
            a.cie76,
            a.ciede2000,
            a.mse,
            a.luminance_correlation.unwrap_or(f64::NAN)
        );
    }

    for (name, map) in [("albedo", &dense), ("rgb", &rgb)] {
        let scatter = ratio_scatter_report(map, &scene.chart)?;
        println!(
            "{name}: {} ratio pairs, RMS log10 deviation {:.4}",
            scatter.pairs.len(),
            scatter.rms_log_deviation().unwrap_or(f64::NAN)
        );
        scatter.save_csv(out.join(format!("{name}_ratio_scatter.csv")))?;
        scatter.save_png(out.join(format!("{name}_ratio_scatter.png")))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
