//! Spectral k-NN densification of a 10%-coverage sparse map, with the
//! brute-force and norm-pruned searches side by side.
//!
//! ```text
//! cargo run --example densify_albedo -- [out_dir]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use hyperlidar::albedo::{compute_sparse_albedo, AlbedoConfig, Provenance};
use hyperlidar::densify::{densify, DensifierConfig, SearchStrategy};
use hyperlidar::metrics::chart_report;
use hyperlidar::scene::{default_colorboard_spec, render_scene};
use hyperlidar::spectral::calibrate_illuminant;

fn main() -> hyperlidar::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hyperlidar-densify"));
    std::fs::create_dir_all(&out).map_err(|e| hyperlidar::Error::Config(e.to_string()))?;

    let mut spec = default_colorboard_spec();
    spec.lidar.coverage = 0.1;
    let scene = render_scene(&spec)?;
    let illuminant = calibrate_illuminant(&scene.white_cube, scene.white_region, spec.whiteboard_reflectance)?;
    let sparse = compute_sparse_albedo(&scene.cube, &illuminant, &scene.lidar, &AlbedoConfig::default())?;

    let mut results = Vec::new();
    for search in [SearchStrategy::BruteForce, SearchStrategy::NormPruned] {
        let config = DensifierConfig {
            search,
            ..DensifierConfig::default()
        };
        let start = Instant::now();
        let dense = densify(&scene.cube, &sparse.albedo, &config)?;
        let report = chart_report(&dense.albedo, &scene.chart)?;
        println!(
            "{search:?}: {:?}, {} measured + {} densified, chart ΔE00 {:.3}",
            start.elapsed(),
            dense.albedo.count_provenance(Provenance::Measured),
            dense.albedo.count_provenance(Provenance::Densified),
            report.aggregate.ciede2000
        );
        results.push(dense.albedo);
    }
    println!("strategies agree: {}", results[0] == results[1]);
    results[0].save_png(out.join("dense_albedo.png"))?;
    println!("wrote {}", out.join("dense_albedo.png").display());
    Ok(())
}
