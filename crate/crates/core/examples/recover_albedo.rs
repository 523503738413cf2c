//! Sparse albedo recovery at LiDAR pixels: calibrate the illuminant from
//! the white reference, invert LiDAR reflectance, carry it across the
//! spectrum and convert to sRGB.
//!
//! ```text
//! cargo run --example recover_albedo -- [out_dir]
//! ```

use std::path::PathBuf;

use hyperlidar::albedo::{compute_sparse_albedo, AlbedoConfig};
use hyperlidar::metrics::chart_report;
use hyperlidar::scene::{default_colorboard_spec, render_scene};
use hyperlidar::spectral::calibrate_illuminant;

fn main() -> hyperlidar::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hyperlidar-recover"));
    std::fs::create_dir_all(&out).map_err(|e| hyperlidar::Error::Config(e.to_string()))?;

    let spec = default_colorboard_spec();
    let scene = render_scene(&spec)?;
    let illuminant = calibrate_illuminant(&scene.white_cube, scene.white_region, spec.whiteboard_reflectance)?;
    let sparse = compute_sparse_albedo(&scene.cube, &illuminant, &scene.lidar, &AlbedoConfig::default())?;
    println!("{}", serde_json::to_string_pretty(&sparse.summary)?);

    let report = chart_report(&sparse.albedo, &scene.chart)?;
    for p in &report.patches {
        println!("{:>14}  {:>3} px  ΔE00 {:.2e}", p.name, p.valid_pixels, p.ciede2000);
    }
    sparse.albedo.save_png(out.join("sparse_albedo.png"))?;
    println!("wrote {}", out.join("sparse_albedo.png").display());
    Ok(())
}
