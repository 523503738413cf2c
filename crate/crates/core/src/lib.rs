//! Albedo recovery from co-registered hyperspectral imagery and LiDAR
//! intensity.
//!
//! A LiDAR return gives absolute reflectance at one wavelength. The
//! hyperspectral radiance ratio `I(λ)/I(λ_L)` carries that anchor across the
//! spectrum while the unknown shading cancels, yielding per-pixel reflectance
//! spectra and hence shading-free color albedo. A spectral k-NN densifier
//! extends the sparse result to every pixel.
//!
//! Modules by stage:
//!
//! - [`spectral`]: wavelength grids, cubes, illuminant calibration, cube I/O
//! - [`lidar`]: range-equation forward model and reflectance inversion
//! - [`geometry`]: surface normals and incidence angles from depth
//! - [`colorimetry`]: spectrum → XYZ → sRGB
//! - [`albedo`]: sparse albedo recovery
//! - [`densify`]: dense albedo by spectral nearest neighbors
//! - [`metrics`]: ΔE, chart reports, WHDR, ratio scatter
//! - [`scene`]: synthetic color-board scenes with ground truth
//! - [`cli`]: the `simulate` / `recover` / `densify` / `report` pipeline
//!
//! Runnable examples, one per capability:
//!
//! ```text
//! cargo run --example simulate_scene
//! cargo run --example lidar_inversion
//! cargo run --example normals_from_depth
//! cargo run --example recover_albedo
//! cargo run --example densify_albedo
//! cargo run --example evaluate_metrics
//! cargo run --example whdr_annotations
//! cargo run --example spatial_illuminant
//! cargo run --example full_pipeline
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod albedo;
pub mod cli;
pub mod colorimetry;
pub mod densify;
pub mod error;
pub mod geometry;
pub mod lidar;
pub mod metrics;
pub mod npy;
pub mod scene;
pub mod spectral;

pub use error::{Error, Result};
