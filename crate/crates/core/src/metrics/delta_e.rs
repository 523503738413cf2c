//! CIELAB conversion and the CIE76 / CIEDE2000 color differences.

// Lab and XYZ components keep their customary single-letter names
#![allow(clippy::many_single_char_names)]

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::colorimetry::{linear_rgb_to_xyz, D65_WHITE};
use crate::error::{Error, Result};

/// Reference white in XYZ with Y = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhitePoint(pub [f64; 3]);

impl WhitePoint {
    pub const D65: WhitePoint = WhitePoint(D65_WHITE);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub white: WhitePoint,
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

impl LabColor {
    /// D65 Lab coordinates, as used by the published test data.
    pub fn new(l: f64, a: f64, b: f64) -> Self {
        Self {
            l,
            a,
            b,
            white: WhitePoint::D65,
        }
    }

    pub fn from_xyz(xyz: [f64; 3], white: WhitePoint) -> Self {
        let fx = lab_f(xyz[0] / white.0[0]);
        let fy = lab_f(xyz[1] / white.0[1]);
        let fz = lab_f(xyz[2] / white.0[2]);
        Self {
            l: 116.0 * fy - 16.0,
            a: 500.0 * (fx - fy),
            b: 200.0 * (fy - fz),
            white,
        }
    }

    pub fn from_linear_rgb(rgb: [f64; 3]) -> Self {
        Self::from_xyz(linear_rgb_to_xyz(rgb), WhitePoint::D65)
    }
}

fn same_white(a: &LabColor, b: &LabColor) -> Result<()> {
    if a.white == b.white {
        Ok(())
    } else {
        Err(Error::WhitePointMismatch)
    }
}

pub fn cie76(a: &LabColor, b: &LabColor) -> Result<f64> {
    same_white(a, b)?;
    Ok(((a.l - b.l).powi(2) + (a.a - b.a).powi(2) + (a.b - b.b).powi(2)).sqrt())
}

fn hue_degrees(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let h = b.atan2(a).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// CIEDE2000 with kL = kC = kH = 1.
pub fn ciede2000(lab1: &LabColor, lab2: &LabColor) -> Result<f64> {
    same_white(lab1, lab2)?;
    const POW25_7: f64 = 6_103_515_625.0;

    let c1 = lab1.a.hypot(lab1.b);
    let c2 = lab2.a.hypot(lab2.b);
    let c_bar7 = ((c1 + c2) / 2.0).powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());

    let a1p = (1.0 + g) * lab1.a;
    let a2p = (1.0 + g) * lab2.a;
    let c1p = a1p.hypot(lab1.b);
    let c2p = a2p.hypot(lab2.b);
    let h1p = hue_degrees(a1p, lab1.b);
    let h2p = hue_degrees(a2p, lab2.b);

    let dl = lab2.l - lab1.l;
    let dc = c2p - c1p;
    let chroma_product = c1p * c2p;
    let dh = if chroma_product == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh_big = 2.0 * chroma_product.sqrt() * (dh.to_radians() / 2.0).sin();

    let l_bar = (lab1.l + lab2.l) / 2.0;
    let c_bar_p = (c1p + c2p) / 2.0;
    let h_bar = if chroma_product == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= 180.0 {
        (h1p + h2p) / 2.0
    } else if h1p + h2p < 360.0 {
        (h1p + h2p + 360.0) / 2.0
    } else {
        (h1p + h2p - 360.0) / 2.0
    };

    let t = 1.0 - 0.17 * (h_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_bar).to_radians().cos()
        + 0.32 * (3.0 * h_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_bar - 63.0).to_radians().cos();
    let d_theta = 30.0 * (-((h_bar - 275.0) / 25.0).powi(2)).exp();
    let c_bar_p7 = c_bar_p.powi(7);
    let r_c = 2.0 * (c_bar_p7 / (c_bar_p7 + POW25_7)).sqrt();
    let l50 = (l_bar - 50.0).powi(2);
    let s_l = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let s_c = 1.0 + 0.045 * c_bar_p;
    let s_h = 1.0 + 0.015 * c_bar_p * t;
    let r_t = -(2.0 * d_theta * PI / 180.0).sin() * r_c;

    let tl = dl / s_l;
    let tc = dc / s_c;
    let th = dh_big / s_h;
    Ok((tl * tl + tc * tc + th * th + r_t * tc * th).max(0.0).sqrt())
}
