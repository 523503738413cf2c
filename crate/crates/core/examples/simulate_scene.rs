//! Render the built-in color-board scene and write its cube, white
//! reference and LiDAR samples.
//!
//! ```text
//! cargo run --example simulate_scene -- [out_dir]
//! ```

use std::path::PathBuf;

use hyperlidar::lidar::save_sample_set;
use hyperlidar::scene::{default_colorboard_spec, render_scene};
use hyperlidar::spectral::save_cube;

fn main() -> hyperlidar::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hyperlidar-simulate"));
    std::fs::create_dir_all(&out).map_err(|e| hyperlidar::Error::Config(e.to_string()))?;

    let spec = default_colorboard_spec();
    let scene = render_scene(&spec)?;
    let shadowed = scene.shadow_mask.iter().filter(|&&s| s).count();
    println!(
        "{}x{} frame, {} bands ({} .. {} nm)",
        scene.width(),
        scene.height(),
        spec.grid.band_count(),
        spec.grid.bands()[0],
        spec.grid.bands()[spec.grid.band_count() - 1]
    );
    println!("{} materials, {} shadowed pixels", spec.materials.len(), shadowed);
    println!(
        "{} LiDAR samples ({:.0}% coverage)",
        scene.lidar.len(),
        spec.lidar.coverage * 100.0
    );

    save_cube(&scene.cube, out.join("cube.hsc"))?;
    save_cube(&scene.white_cube, out.join("white.hsc"))?;
    save_sample_set(&scene.lidar, out.join("lidar.csv"))?;
    spec.save(out.join("scene.json"))?;
    println!("wrote {}", out.display());
    Ok(())
}
