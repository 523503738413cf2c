//! The four CLI stages run in-process: simulate, recover, densify, report.
//!
//! ```text
//! cargo run --example full_pipeline -- [out_dir]
//! ```

use std::path::PathBuf;

use hyperlidar::cli::{cmd_densify, cmd_recover, cmd_report, cmd_simulate, RunConfig};

fn main() -> hyperlidar::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hyperlidar-pipeline"));
    let config = RunConfig {
        out_dir: Some(out.clone()),
        seed: Some(11),
        ..RunConfig::default()
    };

    let manifest = cmd_simulate(&config)?;
    println!(
        "simulate: {} artifacts, {} LiDAR samples",
        manifest.artifacts.len(),
        manifest.lidar_samples
    );
    let recovered = cmd_recover(&config)?;
    println!(
        "recover:  {} of {} samples accepted",
        recovered.accepted, recovered.samples
    );
    let densified = cmd_densify(&config)?;
    println!(
        "densify:  {} pixels filled, k = {}",
        densified.filled, densified.effective_k
    );
    let report = cmd_report(&config)?;
    let a = &report.chart.aggregate;
    println!(
        "report:   ΔE00 {:.4}, CIE76 {:.4}, MSE {:.2e}",
        a.ciede2000, a.cie76, a.mse
    );
    if let Some(b) = &report.baseline {
        println!(
            "          rgb ΔE00 {:.4}; albedo better on {:?}",
            b.rgb.ciede2000, b.albedo_better_on
        );
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
