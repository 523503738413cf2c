//! Acceptance suite. Runs every check, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hyperlidar::albedo::{radiance_rgb, AlbedoMap, AlbedoPixel, Provenance};
use hyperlidar::cli::{cmd_densify, cmd_recover, cmd_report, cmd_simulate, RunConfig};
use hyperlidar::densify::{assignments, densify, DensifierConfig, SearchStrategy};
use hyperlidar::geometry::{incidence_cosines, normals_from_depth, DepthMap, PinholeIntrinsics};
use hyperlidar::lidar::{forward_intensity, invert_reflectance, InversionConfig, LidarSample, SensorConstants};
use hyperlidar::metrics::{chart_report, ciede2000, whdr, Judgment, LabColor, PairAnnotation};
use hyperlidar::scene::{default_colorboard_spec, render_scene, render_with_shading};
use hyperlidar::spectral::calibrate_illuminant;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{recover, square_spec, SHARMA_PAIRS};

type Check = std::result::Result<String, String>;
type CheckFn = fn() -> Check;

fn within(elapsed: Duration, limit_s: f64) -> std::result::Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit_s} s"))
    }
}

fn lidar_round_trip() -> Check {
    let constants = SensorConstants {
        receiver_aperture_d_r: 0.05,
        eta_sys: 0.9,
        eta_atm: 0.98,
        lidar_wavelength: 905.0,
    };
    let config = InversionConfig {
        cos_min: 0.1,
        clamp_max: 1.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let rho: f64 = rng.random_range(0.0..=1.0);
        let range: f64 = rng.random_range(0.1..200.0);
        let cos: f64 = rng.random_range(0.1..=1.0);
        let sample = LidarSample {
            u: 0,
            v: 0,
            range_r: range,
            intensity_l: forward_intensity(&constants, rho, range, cos).map_err(|e| e.to_string())?,
            incidence_cos: cos,
        };
        let back = invert_reflectance(&constants, &sample, &config).map_err(|r| format!("rejected: {}", r.as_str()))?;
        worst = worst.max((back.rho - rho).abs());
    }
    within(start.elapsed(), 1.0)?;
    if worst < 1e-12 {
        Ok(format!(
            "max |Δρ| = {worst:.1e} over 10000 samples in {:?}",
            start.elapsed()
        ))
    } else {
        Err(format!("max |Δρ| = {worst:e}"))
    }
}

fn geometric_cancellation() -> Check {
    let spec = square_spec();
    let start = Instant::now();
    let scene = render_scene(&spec).map_err(|e| e.to_string())?;
    if scene.cube.band_count() != 32 {
        return Err(format!("{} bands", scene.cube.band_count()));
    }
    let base = recover(&scene, &spec);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let factors: Vec<f64> = (0..64 * 64).map(|_| rng.random_range(0.05..20.0)).collect();
    let shaded = render_with_shading(&spec, &scene.shading.scaled(&factors).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let again = recover(&shaded, &spec);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (a, b) in base.spectra.spectra.iter().zip(&again.spectra.spectra) {
        match (a, b) {
            (Some(a), Some(b)) => {
                compared += 1;
                for (x, y) in a.iter().zip(b) {
                    worst = worst.max((x - y).abs());
                }
            }
            (None, None) => {}
            _ => return Err("recovered pixel sets differ".into()),
        }
    }
    within(start.elapsed(), 10.0)?;
    if compared > 0 && worst < 1e-9 {
        Ok(format!(
            "max |Δρ(λ)| = {worst:.1e} over {compared} pixels in {:?}",
            start.elapsed()
        ))
    } else {
        Err(format!("max |Δρ(λ)| = {worst:e} over {compared} pixels"))
    }
}

fn end_to_end_recovery() -> Check {
    let spec = default_colorboard_spec();
    let start = Instant::now();
    let scene = render_scene(&spec).map_err(|e| e.to_string())?;
    let sparse = recover(&scene, &spec);
    let report = chart_report(&sparse.albedo, &scene.chart).map_err(|e| e.to_string())?;
    within(start.elapsed(), 30.0)?;
    if !report.excluded.is_empty() {
        return Err(format!("patches without samples: {:?}", report.excluded));
    }
    let worst_patch = report.patches.iter().map(|p| p.ciede2000).fold(0.0, f64::max);
    let corr = report.aggregate.luminance_correlation.unwrap_or(f64::NAN);

    // shadowed vs lit measured pixels of the same material
    let mut lit: BTreeMap<usize, Vec<[f64; 3]>> = BTreeMap::new();
    let mut shadowed: BTreeMap<usize, Vec<[f64; 3]>> = BTreeMap::new();
    for (x, y, p) in sparse.albedo.iter_valid() {
        let bucket = if scene.is_shadowed(x, y) {
            &mut shadowed
        } else {
            &mut lit
        };
        bucket.entry(scene.material_at(x, y)).or_default().push(p.linear);
    }
    let mut shadow_gap: f64 = 0.0;
    let mut materials = 0;
    for (m, dark) in &shadowed {
        let Some(bright) = lit.get(m) else { continue };
        materials += 1;
        for d in dark {
            for b in bright {
                let gap = ciede2000(&LabColor::from_linear_rgb(*d), &LabColor::from_linear_rgb(*b))
                    .map_err(|e| e.to_string())?;
                shadow_gap = shadow_gap.max(gap);
            }
        }
    }
    let summary = format!(
        "worst patch ΔE00 {worst_patch:.1e}, correlation {corr:.9}, shadow/lit ΔE00 {shadow_gap:.1e} over {materials} materials, {:?}",
        start.elapsed()
    );
    if worst_patch < 0.5 && corr > 0.999 && materials > 0 && shadow_gap <= 1.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn beats_rgb_rendering() -> Check {
    let spec = default_colorboard_spec();
    let scene = render_scene(&spec).map_err(|e| e.to_string())?;
    if !scene.shadow_mask.iter().any(|&s| s) {
        return Err("scene has no shadow".into());
    }
    let sparse = recover(&scene, &spec);
    let illuminant = calibrate_illuminant(&scene.white_cube, scene.white_region, spec.whiteboard_reflectance)
        .map_err(|e| e.to_string())?;
    let rgb = radiance_rgb(&scene.cube, &illuminant).map_err(|e| e.to_string())?;
    let ours = chart_report(&sparse.albedo, &scene.chart)
        .map_err(|e| e.to_string())?
        .aggregate;
    let theirs = chart_report(&rgb, &scene.chart).map_err(|e| e.to_string())?.aggregate;
    let (c_ours, c_theirs) = (
        ours.luminance_correlation.unwrap_or(f64::NAN),
        theirs.luminance_correlation.unwrap_or(f64::NAN),
    );
    let summary = format!(
        "CIE76 {:.3} < {:.3}, CIEDE2000 {:.3} < {:.3}, MSE {:.2e} < {:.2e}, corr {:.5} > {:.5}",
        ours.cie76, theirs.cie76, ours.ciede2000, theirs.ciede2000, ours.mse, theirs.mse, c_ours, c_theirs
    );
    if ours.cie76 < theirs.cie76 && ours.ciede2000 < theirs.ciede2000 && ours.mse < theirs.mse && c_ours > c_theirs {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn ciede2000_reference_pairs() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for [l1, a1, b1, l2, a2, b2, want] in SHARMA_PAIRS {
        let got = ciede2000(&LabColor::new(l1, a1, b1), &LabColor::new(l2, a2, b2)).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
    }
    within(start.elapsed(), 1.0)?;
    if worst < 1e-4 {
        Ok(format!("34 pairs, max |error| {worst:.1e}"))
    } else {
        Err(format!("max |error| {worst:e}"))
    }
}

fn densification() -> Check {
    let mut spec = default_colorboard_spec();
    spec.lidar.coverage = 0.1;
    let scene = render_scene(&spec).map_err(|e| e.to_string())?;
    if scene.chart.patches.len() != 24 {
        return Err(format!("{} materials", scene.chart.patches.len()));
    }
    let sparse = recover(&scene, &spec);
    let dense = densify(&scene.cube, &sparse.albedo, &DensifierConfig::default()).map_err(|e| e.to_string())?;

    let mut total = 0.0;
    for y in 0..scene.height() {
        for x in 0..scene.width() {
            let got = dense
                .albedo
                .get(x, y)
                .ok_or_else(|| format!("pixel ({x}, {y}) left empty"))?;
            let want = scene.truth_albedo.get(x, y).expect("truth is dense");
            total += ciede2000(
                &LabColor::from_linear_rgb(got.linear),
                &LabColor::from_linear_rgb(want.linear),
            )
            .map_err(|e| e.to_string())?;
        }
    }
    let mean = total / (scene.width() * scene.height()) as f64;

    let mut measured = 0;
    for (x, y, p) in sparse.albedo.iter_valid() {
        let out = dense.albedo.get(x, y).expect("measured pixel kept");
        let same = out.provenance == Provenance::Measured
            && out.srgb == p.srgb
            && out
                .linear
                .iter()
                .zip(&p.linear)
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Err(format!("measured pixel ({x}, {y}) changed"));
        }
        measured += 1;
    }

    for seed in 0..5 {
        let mut s = spec.clone();
        s.seed = 100 + seed;
        let scene = render_scene(&s).map_err(|e| e.to_string())?;
        let sparse = recover(&scene, &s);
        let run = |search| {
            assignments(
                &scene.cube,
                &sparse.albedo,
                &DensifierConfig {
                    search,
                    ..DensifierConfig::default()
                },
            )
            .map_err(|e| e.to_string())
        };
        if run(SearchStrategy::BruteForce)? != run(SearchStrategy::NormPruned)? {
            return Err(format!("search strategies disagree for seed {}", s.seed));
        }
    }

    let summary = format!("dense mean ΔE00 {mean:.3}, {measured} measured pixels bit-identical, 5 seeds agree");
    if mean < 1.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn whdr_fixture() -> Check {
    // 1×20 strip of greys with luminance stepping through ratios of 1.05..1.5
    let values: Vec<f64> = (0..20).map(|i| 0.04 * 1.12f64.powi(i)).collect();
    let mut map = AlbedoMap::empty(values.len(), 1);
    for (x, &v) in values.iter().enumerate() {
        map.set(x, 0, Some(AlbedoPixel::new([v; 3], Provenance::Measured)));
    }
    // reference judgment from the grey level ratio directly
    let judge = |a: usize, b: usize| {
        let r = values[a] / values[b];
        if r < 1.0 / 1.1 {
            Judgment::ADarker
        } else if r > 1.1 {
            Judgment::BDarker
        } else {
            Judgment::Equal
        }
    };
    let pairs: Vec<(usize, usize)> = (0..38)
        .map(|i| (i % 20, (i * 7 + 3) % 20))
        .map(|(a, b)| if a == b { (a, (b + 1) % 20) } else { (a, b) })
        .collect();
    let mut annotations: Vec<PairAnnotation> = pairs
        .iter()
        .map(|&(a, b)| PairAnnotation {
            a: [a, 0],
            b: [b, 0],
            judgment: judge(a, b),
            weight: 1.0,
        })
        .collect();
    // induce exactly eight disagreements
    for ann in annotations.iter_mut().step_by(4).take(8) {
        ann.judgment = match ann.judgment {
            Judgment::ADarker => Judgment::BDarker,
            Judgment::BDarker => Judgment::Equal,
            Judgment::Equal => Judgment::ADarker,
        };
    }
    let got = whdr(&map, &annotations, 0.10).map_err(|e| e.to_string())?;
    let want = 8.0 / 38.0;
    if (got - want).abs() <= 1e-12 {
        Ok(format!("WHDR {got:.12} = 8/38"))
    } else {
        Err(format!("WHDR {got} vs {want}"))
    }
}

fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}

fn normal_estimation() -> Check {
    let (w, h) = (120, 100);
    let k = PinholeIntrinsics::centered(150.0, w, h);
    let ray = |u: usize, v: usize| k.ray(u as f64, v as f64);
    let mut cos_err: f64 = 0.0;

    // plane through (0, 0, 4) with normal tilted 35° about y
    let t = 35f64.to_radians();
    let n_plane = [-t.sin(), 0.0, -t.cos()];
    let plane = DepthMap::from_fn(w, h, |u, v| {
        let r = ray(u, v);
        let nr = n_plane[0] * r[0] + n_plane[1] * r[1] + n_plane[2] * r[2];
        (n_plane[2] * 4.0) / nr
    });
    let normals = normals_from_depth(&plane, &k);
    let cosines = incidence_cosines(&normals, &k, &plane).map_err(|e| e.to_string())?;
    let mut plane_err: f64 = 0.0;
    for v in 1..h - 1 {
        for u in 1..w - 1 {
            let n = normals.get(u, v).ok_or("interior plane pixel without normal")?;
            plane_err = plane_err.max(angle_deg(n, n_plane));
            let r = ray(u, v);
            let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            let analytic = -(n_plane[0] * r[0] + n_plane[1] * r[1] + n_plane[2] * r[2]) / len;
            cos_err = cos_err.max((cosines[v * w + u].ok_or("missing cosine")? - analytic).abs());
        }
    }

    // sphere of radius 1 centred at (0, 0, 3); camera ray hits the near side
    let (cz, radius) = (3.0, 1.0);
    let hit = |u: usize, v: usize| -> Option<[f64; 3]> {
        let d = ray(u, v);
        let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let b = d[2] * cz;
        let disc = b * b - dd * (cz * cz - radius * radius);
        (disc > 0.0).then(|| {
            let s = (b - disc.sqrt()) / dd;
            [s * d[0], s * d[1], s * d[2]]
        })
    };
    let sphere = DepthMap::from_fn(w, h, |u, v| hit(u, v).map_or(f64::NAN, |p| p[2]));
    let normals = normals_from_depth(&sphere, &k);
    let cosines = incidence_cosines(&normals, &k, &sphere).map_err(|e| e.to_string())?;
    let mut sphere_err: f64 = 0.0;
    let mut interior = 0;
    for v in 0..h {
        for u in 0..w {
            let Some(p) = hit(u, v) else { continue };
            let n_true = [p[0] / radius, p[1] / radius, (p[2] - cz) / radius];
            let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let analytic = -(n_true[0] * p[0] + n_true[1] * p[1] + n_true[2] * p[2]) / len;
            // away from the silhouette: viewing angle under 60°
            if analytic < 0.5 {
                continue;
            }
            let n = normals.get(u, v).ok_or("interior sphere pixel without normal")?;
            sphere_err = sphere_err.max(angle_deg(n, n_true));
            cos_err = cos_err.max((cosines[v * w + u].ok_or("missing cosine")? - analytic).abs());
            interior += 1;
        }
    }
    let summary =
        format!("plane {plane_err:.2e}°, sphere {sphere_err:.3}° over {interior} px, cosθ error {cos_err:.1e}");
    if plane_err < 0.5 && sphere_err < 1.0 && cos_err <= 1e-3 && interior > 100 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn read_tree(dir: &Path) -> std::result::Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        files.insert(name, fs::read(entry.path()).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn deterministic_pipeline() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let config = RunConfig {
            out_dir: Some(root.path().join(run)),
            seed: Some(2024),
            ..RunConfig::default()
        };
        cmd_simulate(&config).map_err(|e| e.to_string())?;
        cmd_recover(&config).map_err(|e| e.to_string())?;
        cmd_densify(&config).map_err(|e| e.to_string())?;
        cmd_report(&config).map_err(|e| e.to_string())?;
        trees.push(read_tree(&root.path().join(run))?);
    }
    if trees[0].keys().ne(trees[1].keys()) {
        return Err("runs produced different file sets".into());
    }
    for (name, bytes) in &trees[0] {
        if trees[1][name] != *bytes {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok(format!("{} artifacts byte-identical across two runs", trees[0].len()))
}

fn main() -> ExitCode {
    let checks: [(&str, CheckFn); 9] = [
        ("1 LiDAR inversion round-trip", lidar_round_trip),
        ("2 geometric cancellation", geometric_cancellation),
        ("3 end-to-end recovery", end_to_end_recovery),
        ("4 albedo beats RGB rendering", beats_rgb_rendering),
        ("5 CIEDE2000 reference pairs", ciede2000_reference_pairs),
        ("6 densification", densification),
        ("7 WHDR fixture", whdr_fixture),
        ("8 normal estimation", normal_estimation),
        ("9 deterministic pipeline", deterministic_pipeline),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
