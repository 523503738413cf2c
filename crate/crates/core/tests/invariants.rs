mod common;

use hyperlidar::albedo::AlbedoMap;
use hyperlidar::metrics::{chart_report, ciede2000, LabColor};
use hyperlidar::scene::{
    default_colorboard_spec, render_scene, render_with_shading, IlluminantModel, NoiseSpec, SceneSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{recover, square_spec, SHARMA_PAIRS};

fn de00(a: [f64; 3], b: [f64; 3]) -> f64 {
    ciede2000(&LabColor::from_linear_rgb(a), &LabColor::from_linear_rgb(b)).unwrap()
}

fn worst_pixel_gap(a: &AlbedoMap, b: &AlbedoMap) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (x, y, p) in a.iter_valid() {
        let q = b.get(x, y).expect("same measured pixels");
        worst = worst.max(de00(p.linear, q.linear));
        n += 1;
    }
    (worst, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn recovered_spectra_ignore_shading(seed in any::<u64>(), lo in 0.01f64..1.0, span in 1.0f64..50.0) {
        let spec = SceneSpec { seed: seed % 1000, ..square_spec() };
        let scene = render_scene(&spec).unwrap();
        let base = recover(&scene, &spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<f64> = (0..spec.width * spec.height).map(|_| rng.random_range(lo..lo * span)).collect();
        let shaded = render_with_shading(&spec, &scene.shading.scaled(&factors).unwrap()).unwrap();
        let again = recover(&shaded, &spec);
        for (a, b) in base.spectra.spectra.iter().zip(&again.spectra.spectra) {
            match (a, b) {
                (Some(a), Some(b)) => {
                    for (x, y) in a.iter().zip(b) {
                        prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                    }
                }
                (None, None) => {}
                _ => prop_assert!(false, "recovered pixel sets differ"),
            }
        }
    }
}

#[test]
fn albedo_is_independent_of_illuminant_temperature() {
    let render = |temperature_k| {
        let spec = SceneSpec {
            illuminant: IlluminantModel::Blackbody { temperature_k },
            ..default_colorboard_spec()
        };
        recover(&render_scene(&spec).unwrap(), &spec).albedo
    };
    let (warm, daylight) = (render(3200.0), render(5800.0));
    assert_eq!(warm.valid_count(), daylight.valid_count());
    let (worst, n) = worst_pixel_gap(&warm, &daylight);
    assert!(n > 1000);
    assert!(worst < 0.5, "ΔE00 {worst}");
}

#[test]
fn measured_pixels_match_ground_truth() {
    let spec = default_colorboard_spec();
    let scene = render_scene(&spec).unwrap();
    let sparse = recover(&scene, &spec).albedo;
    let (worst, n) = worst_pixel_gap(&sparse, &scene.truth_albedo);
    assert_eq!(n, sparse.valid_count());
    assert!(worst < 0.5, "ΔE00 {worst}");
}

#[test]
fn error_grows_with_noise() {
    let mean_error = |sigma: f64| {
        let seeds = 10;
        let mut total = 0.0;
        for seed in 0..seeds {
            let spec = SceneSpec {
                noise: NoiseSpec {
                    radiance_sigma: sigma,
                    lidar_sigma: sigma,
                },
                seed,
                ..default_colorboard_spec()
            };
            let scene = render_scene(&spec).unwrap();
            let sparse = recover(&scene, &spec).albedo;
            total += chart_report(&sparse, &scene.chart).unwrap().aggregate.ciede2000;
        }
        total / seeds as f64
    };
    let errors: Vec<f64> = [0.0, 0.005, 0.01, 0.02, 0.04].into_iter().map(mean_error).collect();
    assert!(errors[0] < 1e-6, "{errors:?}");
    for pair in errors.windows(2) {
        assert!(pair[0] < pair[1], "{errors:?}");
    }
}

#[test]
fn ciede2000_matches_reference_pairs() {
    for (i, [l1, a1, b1, l2, a2, b2, want]) in SHARMA_PAIRS.into_iter().enumerate() {
        let forward = ciede2000(&LabColor::new(l1, a1, b1), &LabColor::new(l2, a2, b2)).unwrap();
        let backward = ciede2000(&LabColor::new(l2, a2, b2), &LabColor::new(l1, a1, b1)).unwrap();
        assert!((forward - want).abs() < 1e-4, "pair {}: {forward} vs {want}", i + 1);
        assert!((forward - backward).abs() < 1e-12, "pair {} not symmetric", i + 1);
    }
}
