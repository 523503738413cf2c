//! Pinhole back-projection, surface normals from depth maps, and per-pixel
//! incidence cosines.
//!
//! Depth is the z coordinate in the camera frame (meters), with the optical
//! axis along +z, x to the right and y down. Pixels whose depth is not a
//! positive finite number are invalid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinholeIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl PinholeIntrinsics {
    /// Square-pixel camera with the principal point at the frame center.
    pub fn centered(focal_px: f64, width: usize, height: usize) -> Self {
        Self {
            fx: focal_px,
            fy: focal_px,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
        }
    }

    /// Direction of the ray through pixel (u, v), scaled so its z is 1.
    pub fn ray(&self, u: f64, v: f64) -> [f64; 3] {
        [(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0]
    }

    pub fn unit_ray(&self, u: f64, v: f64) -> [f64; 3] {
        normalize(self.ray(u, v)).expect("pinhole rays are never zero")
    }

    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> [f64; 3] {
        let r = self.ray(u, v);
        [r[0] * depth, r[1] * depth, depth]
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot(v, v).sqrt();
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Row-major H×W depth image.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} depth map needs {} values, got {}",
                width * height,
                depth.len()
            )));
        }
        Ok(Self { width, height, depth })
    }

    /// Builds a map by evaluating `f(u, v)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let depth = (0..height)
            .flat_map(|v| (0..width).map(move |u| (u, v)))
            .map(|(u, v)| f(u, v))
            .collect();
        Self { width, height, depth }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.depth[v * self.width + u]
    }

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        let d = self.get(u, v);
        d.is_finite() && d > 0.0
    }
}

/// Per-pixel unit normals; `None` marks border or invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    normals: Vec<Option<[f64; 3]>>,
}

impl NormalMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> Option<[f64; 3]> {
        self.normals[v * self.width + u]
    }

    pub fn valid_count(&self) -> usize {
        self.normals.iter().filter(|n| n.is_some()).count()
    }
}

/// Normals from central differences of back-projected points, oriented
/// toward the sensor. A pixel gets a normal only when its full 3×3
/// neighborhood has valid depth.
pub fn normals_from_depth(depth: &DepthMap, intrinsics: &PinholeIntrinsics) -> NormalMap {
    let (w, h) = (depth.width, depth.height);
    let mut normals = vec![None; w * h];
    for v in 1..h.saturating_sub(1) {
        for u in 1..w.saturating_sub(1) {
            let neighborhood_valid = (v - 1..=v + 1).all(|vv| (u - 1..=u + 1).all(|uu| depth.is_valid(uu, vv)));
            if !neighborhood_valid {
                continue;
            }
            let point = |uu: usize, vv: usize| intrinsics.back_project(uu as f64, vv as f64, depth.get(uu, vv));
            let du = sub(point(u + 1, v), point(u - 1, v));
            let dv = sub(point(u, v + 1), point(u, v - 1));
            let Some(mut n) = normalize(cross(du, dv)) else {
                continue;
            };
            if dot(n, point(u, v)) > 0.0 {
                n = [-n[0], -n[1], -n[2]];
            }
            normals[v * w + u] = Some(n);
        }
    }
    NormalMap {
        width: w,
        height: h,
        normals,
    }
}

/// cos θ = |n · r̂| between each pixel's normal and its viewing ray.
pub fn incidence_cosines(
    normals: &NormalMap,
    intrinsics: &PinholeIntrinsics,
    depth: &DepthMap,
) -> Result<Vec<Option<f64>>> {
    if normals.width != depth.width || normals.height != depth.height {
        return Err(Error::Dimension(format!(
            "normal map {}x{} vs depth map {}x{}",
            normals.width, normals.height, depth.width, depth.height
        )));
    }
    let mut out = Vec::with_capacity(normals.normals.len());
    for v in 0..normals.height {
        for u in 0..normals.width {
            let cos = match normals.get(u, v) {
                Some(n) if depth.is_valid(u, v) => Some(dot(n, intrinsics.unit_ray(u as f64, v as f64)).abs().min(1.0)),
                _ => None,
            };
            out.push(cos);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
        dot(a, b).clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// Depth of the plane through (0, 0, d0) with unit normal `n`, along the
    /// ray through (u, v).
    fn plane_depth(k: &PinholeIntrinsics, n: [f64; 3], d0: f64, u: usize, v: usize) -> f64 {
        let r = k.ray(u as f64, v as f64);
        n[2] * d0 / dot(n, r)
    }

    #[test]
    fn fronto_parallel_plane() {
        let k = PinholeIntrinsics::centered(50.0, 9, 7);
        let depth = DepthMap::from_fn(9, 7, |_, _| 3.0);
        let normals = normals_from_depth(&depth, &k);
        assert_eq!(normals.valid_count(), 7 * 5);
        for v in 1..6 {
            for u in 1..8 {
                let n = normals.get(u, v).unwrap();
                assert!(angle_deg(n, [0.0, 0.0, -1.0]) < 1e-9);
            }
        }
        assert!(normals.get(0, 3).is_none());
        let cos = incidence_cosines(&normals, &k, &depth).unwrap();
        assert!((cos[3 * 9 + 4].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_depth_flags_neighbors() {
        let k = PinholeIntrinsics::centered(50.0, 7, 7);
        let depth = DepthMap::from_fn(7, 7, |u, v| if (u, v) == (3, 3) { 0.0 } else { 2.0 });
        let normals = normals_from_depth(&depth, &k);
        for v in 2..=4 {
            for u in 2..=4 {
                assert!(normals.get(u, v).is_none());
            }
        }
        assert!(normals.get(1, 1).is_some());
        assert!(DepthMap::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn tilted_plane_normals_and_cosines() {
        let k = PinholeIntrinsics::centered(60.0, 41, 31);
        for tilt in [30.0f64, 60.0] {
            let t = tilt.to_radians();
            let n = [t.sin(), 0.0, -t.cos()];
            let depth = DepthMap::from_fn(41, 31, |u, v| plane_depth(&k, n, 2.0, u, v));
            let normals = normals_from_depth(&depth, &k);
            let cos = incidence_cosines(&normals, &k, &depth).unwrap();
            for v in 1..30 {
                for u in 1..40 {
                    let got = normals.get(u, v).unwrap();
                    assert!(angle_deg(got, n) < 0.5, "tilt {tilt} at ({u},{v})");
                    let want = dot(n, k.unit_ray(u as f64, v as f64)).abs();
                    assert!((cos[v * 41 + u].unwrap() - want).abs() < 1e-3);
                }
            }
        }
        // principal point of the 60° plane
        let t = 60f64.to_radians();
        let n = [t.sin(), 0.0, -t.cos()];
        let depth = DepthMap::from_fn(41, 31, |u, v| plane_depth(&k, n, 2.0, u, v));
        let cos = incidence_cosines(&normals_from_depth(&depth, &k), &k, &depth).unwrap();
        assert!((cos[15 * 41 + 20].unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn unit_norm_everywhere() {
        let k = PinholeIntrinsics::centered(40.0, 32, 24);
        let depth = DepthMap::from_fn(32, 24, |u, v| {
            2.0 + 0.3 * (u as f64 * 0.2).sin() * (v as f64 * 0.15).cos()
        });
        let normals = normals_from_depth(&depth, &k);
        for v in 0..24 {
            for u in 0..32 {
                if let Some(n) = normals.get(u, v) {
                    assert!((dot(n, n).sqrt() - 1.0).abs() < 1e-6);
                }
            }
        }
        for c in incidence_cosines(&normals, &k, &depth).unwrap().into_iter().flatten() {
            assert!((0.0..=1.0).contains(&c));
        }
    }
}
