use serde::{Deserialize, Serialize};

use super::Vector3;
use crate::error::{Error, Result};

/// CIE 1931 chromaticity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct XyCoord {
    pub x: f64,
    pub y: f64,
}

impl XyCoord {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0 && x + y < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "({x}, {y}) is not a valid chromaticity"
            )));
        }
        Ok(XyCoord { x, y })
    }
}

impl TryFrom<[f64; 2]> for XyCoord {
    type Error = Error;

    fn try_from([x, y]: [f64; 2]) -> Result<Self> {
        XyCoord::new(x, y)
    }
}

impl From<XyCoord> for [f64; 2] {
    fn from(c: XyCoord) -> Self {
        [c.x, c.y]
    }
}

pub fn d50_xy() -> XyCoord {
    XyCoord {
        x: 0.3457,
        y: 0.3585,
    }
}

/// XYZ with unit luminance.
pub fn xy_to_xyz(xy: XyCoord) -> Vector3 {
    Vector3::new(xy.x / xy.y, 1.0, (1.0 - xy.x - xy.y) / xy.y)
}

pub fn xyz_to_xy(xyz: &Vector3) -> Result<XyCoord> {
    let sum = xyz.x + xyz.y + xyz.z;
    if !(sum > 0.0) {
        return Err(Error::InvalidArgument(format!("XYZ {xyz:?} has no chromaticity")));
    }
    XyCoord::new(xyz.x / sum, xyz.y / sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_energy() {
        let v = xy_to_xyz(XyCoord::new(1.0 / 3.0, 1.0 / 3.0).unwrap());
        for c in v.iter() {
            assert!((c - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn d50_white() {
        let v = xy_to_xyz(d50_xy());
        let reference = [0.964296, 1.0, 0.825105];
        for (a, b) in v.iter().zip(reference) {
            assert!((a - b).abs() < 1e-4);
        }
        assert_eq!(d50_xy(), d50_xy());
        XyCoord::new(d50_xy().x, d50_xy().y).unwrap();
    }

    #[test]
    fn unit_luminance_and_inverse() {
        for (x, y) in [(0.2, 0.3), (0.45, 0.41), (0.31, 0.33)] {
            let xy = XyCoord::new(x, y).unwrap();
            let v = xy_to_xyz(xy);
            assert_eq!(v.y, 1.0);
            let back = xyz_to_xy(&(v * 3.7)).unwrap();
            assert!((back.x - x).abs() < 1e-14 && (back.y - y).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(XyCoord::new(0.0, 0.3).is_err());
        assert!(XyCoord::new(0.6, 0.5).is_err());
        assert!(serde_json::from_str::<XyCoord>("[0.7, 0.7]").is_err());
        let c: XyCoord = serde_json::from_str("[0.3, 0.4]").unwrap();
        assert_eq!(c, XyCoord { x: 0.3, y: 0.4 });
    }
}
