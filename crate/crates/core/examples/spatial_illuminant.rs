//! Recovery under a spatially varying illuminant. The right half of the
//! scene is lit by a bluer source; a per-region white-reference calibration
//! handles it, a single global spectrum does not.
//!
//! ```text
//! cargo run --example spatial_illuminant
//! ```

use hyperlidar::albedo::{compute_sparse_albedo, AlbedoConfig};
use hyperlidar::metrics::chart_report;
use hyperlidar::scene::{default_colorboard_spec, render_scene};
use hyperlidar::spectral::{calibrate_illuminant, calibrate_illuminant_regions, PixelRect, SpectralCube};

/// Multiplies the right half of `cube` by a spectral tilt.
fn tint_right_half(cube: &SpectralCube) -> hyperlidar::Result<SpectralCube> {
    let bands = cube.grid().bands().to_vec();
    let tilt: Vec<f64> = bands
        .iter()
        .map(|&nm| (1.6 - (nm.min(700.0) - 400.0) / 300.0).max(0.4))
        .collect();
    let mut radiance = cube.radiance().to_vec();
    for y in 0..cube.height() {
        for x in cube.width() / 2..cube.width() {
            let start = (y * cube.width() + x) * bands.len();
            for (v, t) in radiance[start..start + bands.len()].iter_mut().zip(&tilt) {
                *v *= t;
            }
        }
    }
    SpectralCube::new(cube.grid().clone(), cube.width(), cube.height(), radiance)
}

fn main() -> hyperlidar::Result<()> {
    let spec = default_colorboard_spec();
    let scene = render_scene(&spec)?;
    let cube = tint_right_half(&scene.cube)?;
    let white = tint_right_half(&scene.white_cube)?;
    let (w, h) = (cube.width(), cube.height());
    let halves = [PixelRect::new(0, 0, w / 2, h), PixelRect::new(w / 2, 0, w - w / 2, h)];

    let global = calibrate_illuminant(&white, PixelRect::full(w, h), spec.whiteboard_reflectance)?;
    let regional = calibrate_illuminant_regions(&white, &halves, spec.whiteboard_reflectance)?;
    for (name, illuminant) in [("global", &global), ("per-region", &regional)] {
        let sparse = compute_sparse_albedo(&cube, illuminant, &scene.lidar, &AlbedoConfig::default())?;
        let report = chart_report(&sparse.albedo, &scene.chart)?;
        let worst = report.patches.iter().map(|p| p.ciede2000).fold(0.0, f64::max);
        println!(
            "{name:>10}: mean ΔE00 {:.4}, worst patch {:.4}",
            report.aggregate.ciede2000, worst
        );
    }
    Ok(())
}
