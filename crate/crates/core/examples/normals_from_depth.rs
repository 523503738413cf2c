//! Surface normals and LiDAR incidence cosines estimated from the scene's
//! depth map, compared with the simulator's analytic values.
//!
//! ```text
//! cargo run --example normals_from_depth
//! ```

use hyperlidar::geometry::{incidence_cosines, normals_from_depth};
use hyperlidar::scene::{default_colorboard_spec, render_scene};

fn main() -> hyperlidar::Result<()> {
    let spec = default_colorboard_spec();
    let scene = render_scene(&spec)?;
    let k = spec.intrinsics();
    let normals = normals_from_depth(&scene.depth, &k);
    let cosines = incidence_cosines(&normals, &k, &scene.depth)?;

    let truth = spec.board_normal();
    let mut worst_angle: f64 = 0.0;
    for v in 0..scene.height() {
        for u in 0..scene.width() {
            if let Some(n) = normals.get(u, v) {
                let c = (n[0] * truth[0] + n[1] * truth[1] + n[2] * truth[2]).clamp(-1.0, 1.0);
                worst_angle = worst_angle.max(c.acos().to_degrees());
            }
        }
    }
    let mut worst_cos: f64 = 0.0;
    for s in scene.lidar.samples() {
        if let Some(c) = cosines[s.v * scene.width() + s.u] {
            worst_cos = worst_cos.max((c - s.incidence_cos).abs());
        }
    }
    println!(
        "{} of {} pixels have a normal",
        normals.valid_count(),
        scene.width() * scene.height()
    );
    println!("board normal {truth:.4?}");
    println!("worst normal error {worst_angle:.2e} deg");
    println!("worst incidence-cosine error at LiDAR pixels {worst_cos:.2e}");
    Ok(())
}
