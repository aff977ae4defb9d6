//! Closed-form initial data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcPreset {
    /// Cells depleted and chemical concentrated around (1, 1) on [0,2]².
    Gauss,
    /// Opposite-phase cosine modes on [0,2]².
    Cosine,
    Constant { u: f64, v: f64 },
}

/// `t(2-t)` and its derivative.
fn bump(t: f64) -> (f64, f64) {
    (t * (2.0 - t), 2.0 - 2.0 * t)
}

/// `x y (2-x)(2-y) exp(-c((x-1)² + (y-1)²))` and its gradient.
fn gauss_shape(c: f64, x: f64, y: f64) -> (f64, [f64; 2]) {
    let (ax, dax) = bump(x);
    let (ay, day) = bump(y);
    let e = (-c * ((x - 1.0).powi(2) + (y - 1.0).powi(2))).exp();
    let q = ax * ay;
    let gx = (dax * ay - 2.0 * c * (x - 1.0) * q) * e;
    let gy = (ax * day - 2.0 * c * (y - 1.0) * q) * e;
    (q * e, [gx, gy])
}

impl IcPreset {
    pub fn u0(&self, x: f64, y: f64) -> f64 {
        match *self {
            IcPreset::Gauss => -10.0 * gauss_shape(10.0, x, y).0 + 10.0001,
            IcPreset::Cosine => 14.0 * (2.0 * PI * x).cos() * (2.0 * PI * y).cos() + 14.0001,
            IcPreset::Constant { u, .. } => u,
        }
    }

    pub fn v0(&self, x: f64, y: f64) -> f64 {
        match *self {
            IcPreset::Gauss => 100.0 * gauss_shape(30.0, x, y).0 + 0.0001,
            IcPreset::Cosine => -14.0 * (2.0 * PI * x).cos() * (2.0 * PI * y).cos() + 14.0001,
            IcPreset::Constant { v, .. } => v,
        }
    }

    pub fn grad_v0(&self, x: f64, y: f64) -> [f64; 2] {
        match *self {
            IcPreset::Gauss => {
                let g = gauss_shape(30.0, x, y).1;
                [100.0 * g[0], 100.0 * g[1]]
            }
            IcPreset::Cosine => {
                let w = 2.0 * PI;
                [
                    14.0 * w * (w * x).sin() * (w * y).cos(),
                    14.0 * w * (w * x).cos() * (w * y).sin(),
                ]
            }
            IcPreset::Constant { .. } => [0.0, 0.0],
        }
    }
}

impl fmt::Display for IcPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcPreset::Gauss => write!(f, "gauss"),
            IcPreset::Cosine => write!(f, "cosine"),
            IcPreset::Constant { u, v } => write!(f, "constant:{u}:{v}"),
        }
    }
}

impl FromStr for IcPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidParameter(format!("unknown initial condition '{s}'"));
        match s.trim() {
            "gauss" => Ok(IcPreset::Gauss),
            "cosine" => Ok(IcPreset::Cosine),
            other => {
                let rest = other.strip_prefix("constant:").ok_or_else(bad)?;
                let (cu, cv) = rest.split_once(':').ok_or_else(bad)?;
                let u = cu.trim().parse().map_err(|_| bad())?;
                let v = cv.trim().parse().map_err(|_| bad())?;
                Ok(IcPreset::Constant { u, v })
            }
        }
    }
}
