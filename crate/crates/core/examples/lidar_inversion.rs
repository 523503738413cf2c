//! Range-equation forward model and its inversion, including the grazing
//! and clamped cases.
//!
//! ```text
//! cargo run --example lidar_inversion
//! ```

use hyperlidar::lidar::{forward_intensity, invert_reflectance, InversionConfig, LidarSample, SensorConstants};

fn main() -> hyperlidar::Result<()> {
    let constants = SensorConstants {
        receiver_aperture_d_r: 0.05,
        eta_sys: 0.9,
        eta_atm: 0.98,
        lidar_wavelength: 905.0,
    };
    let config = InversionConfig::default();

    println!(
        "{:>6} {:>8} {:>6} {:>14} {:>10}",
        "rho", "range_m", "cos", "intensity", "inverted"
    );
    for (rho, range, cos) in [(0.5, 1.5, 1.0), (0.05, 4.0, 0.7), (0.9, 0.8, 0.3), (0.4, 2.0, 0.05)] {
        let intensity = forward_intensity(&constants, rho, range, cos)?;
        let sample = LidarSample {
            u: 0,
            v: 0,
            range_r: range,
            intensity_l: intensity,
            incidence_cos: cos,
        };
        let inverted = match invert_reflectance(&constants, &sample, &config) {
            Ok(r) => format!("{:.12}", r.rho),
            Err(reason) => format!("rejected: {}", reason.as_str()),
        };
        println!("{rho:>6} {range:>8} {cos:>6} {intensity:>14.6e} {inverted:>10}");
    }

    // a return twice as bright as a perfect reflector allows
    let hot = LidarSample {
        u: 0,
        v: 0,
        range_r: 1.0,
        intensity_l: 2.0 * forward_intensity(&constants, 1.0, 1.0, 1.0)?,
        incidence_cos: 1.0,
    };
    if let Ok(r) = invert_reflectance(&constants, &hot, &config) {
        println!("overbright return: rho = {} (clamped: {})", r.rho, r.clamped);
    }
    Ok(())
}
