//! Pairwise reflectance judgments scored with WHDR. Annotations come from
//! the ground-truth luminance of one point per patch, taken inside the
//! T-shaped shadow where it crosses the patch. The RGB rendering misjudges
//! shadowed points. The densified albedo misjudges only points on one-row
//! shadow slivers that hold no LiDAR sample: their spectral neighbors come
//! from other materials.
//!
//! ```text
//! cargo run --example whdr_annotations
//! ```

use hyperlidar::albedo::{compute_sparse_albedo, radiance_rgb, AlbedoConfig};
use hyperlidar::colorimetry::luminance;
use hyperlidar::densify::{densify, DensifierConfig};
use hyperlidar::metrics::{predict_judgment, whdr, PairAnnotation, DEFAULT_WHDR_DELTA};
use hyperlidar::scene::{default_colorboard_spec, render_scene};
use hyperlidar::spectral::calibrate_illuminant;

fn main() -> hyperlidar::Result<()> {
    let spec = default_colorboard_spec();
    let scene = render_scene(&spec)?;

    // one point per patch, mid-shadow when the patch has any shadow
    let points: Vec<[usize; 2]> = scene
        .chart
        .patches
        .iter()
        .map(|p| {
            let shadowed: Vec<(usize, usize)> = p.region.pixels().filter(|&(x, y)| scene.is_shadowed(x, y)).collect();
            match shadowed.get(shadowed.len() / 2) {
                Some(&(x, y)) => [x, y],
                None => [p.region.x + p.region.width / 2, p.region.y + p.region.height / 2],
            }
        })
        .collect();
    let truth_y = |p: [usize; 2]| luminance(scene.truth_albedo.get(p[0], p[1]).expect("truth is dense").linear);
    let mut annotations = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1..points.len()).step_by(3) {
            annotations.push(PairAnnotation {
                a: points[i],
                b: points[j],
                judgment: predict_judgment(truth_y(points[i]), truth_y(points[j]), DEFAULT_WHDR_DELTA),
                weight: 1.0,
            });
        }
    }

    let illuminant = calibrate_illuminant(&scene.white_cube, scene.white_region, spec.whiteboard_reflectance)?;
    let sparse = compute_sparse_albedo(&scene.cube, &illuminant, &scene.lidar, &AlbedoConfig::default())?;
    let dense = densify(&scene.cube, &sparse.albedo, &DensifierConfig::default())?.albedo;
    let rgb = radiance_rgb(&scene.cube, &illuminant)?;

    println!("{} annotations, δ = {DEFAULT_WHDR_DELTA}", annotations.len());
    println!("WHDR albedo: {:.4}", whdr(&dense, &annotations, DEFAULT_WHDR_DELTA)?);
    println!("WHDR rgb:    {:.4}", whdr(&rgb, &annotations, DEFAULT_WHDR_DELTA)?);
    Ok(())
}
