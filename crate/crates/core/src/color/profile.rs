use std::path::Path;

use serde::{Deserialize, Serialize};

use super::temperature::{mired_grid, temperature_to_xy, xy_to_mired};
use super::xy::{xy_to_xyz, XyCoord};
use super::{angle_between, condition_number, Matrix3, Vector3};
use crate::error::{Error, Result};
use crate::image::{LinearImage, CHANNELS};

/// Dual-illuminant camera characterization: two XYZ-to-camera matrices
/// measured under two calibration illuminants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct CameraProfile {
    pub color_matrix_1: Matrix3,
    pub color_matrix_2: Matrix3,
    pub calibration_temp_1: f64,
    pub calibration_temp_2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileJson {
    color_matrix_1: [f64; 9],
    color_matrix_2: [f64; 9],
    calibration_temp_1: f64,
    calibration_temp_2: f64,
}

impl TryFrom<ProfileJson> for CameraProfile {
    type Error = Error;

    fn try_from(j: ProfileJson) -> Result<Self> {
        CameraProfile::new(
            Matrix3::from_row_slice(&j.color_matrix_1),
            Matrix3::from_row_slice(&j.color_matrix_2),
            j.calibration_temp_1,
            j.calibration_temp_2,
        )
    }
}

impl From<CameraProfile> for ProfileJson {
    fn from(p: CameraProfile) -> Self {
        let rows = |m: &Matrix3| {
            let mut out = [0.0; 9];
            for r in 0..3 {
                for c in 0..3 {
                    out[r * 3 + c] = m[(r, c)];
                }
            }
            out
        };
        ProfileJson {
            color_matrix_1: rows(&p.color_matrix_1),
            color_matrix_2: rows(&p.color_matrix_2),
            calibration_temp_1: p.calibration_temp_1,
            calibration_temp_2: p.calibration_temp_2,
        }
    }
}

impl CameraProfile {
    pub fn new(
        color_matrix_1: Matrix3,
        color_matrix_2: Matrix3,
        calibration_temp_1: f64,
        calibration_temp_2: f64,
    ) -> Result<Self> {
        for (name, m) in [("color_matrix_1", &color_matrix_1), ("color_matrix_2", &color_matrix_2)] {
            if !m.iter().all(|v| v.is_finite()) || !condition_number(m).is_finite() || m.determinant() == 0.0 {
                return Err(Error::InvalidArgument(format!("{name} is not invertible")));
            }
        }
        for t in [calibration_temp_1, calibration_temp_2] {
            if !(1500.0..=20000.0).contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "calibration temperature {t} K outside [1500, 20000]"
                )));
            }
        }
        Ok(CameraProfile {
            color_matrix_1,
            color_matrix_2,
            calibration_temp_1,
            calibration_temp_2,
        })
    }

    /// Profile whose camera space is XYZ itself.
    pub fn identity() -> Self {
        CameraProfile {
            color_matrix_1: Matrix3::identity(),
            color_matrix_2: Matrix3::identity(),
            calibration_temp_1: 6504.0,
            calibration_temp_2: 2856.0,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// Weight of `color_matrix_1`, linear in mired and clamped to [0, 1].
    pub fn interpolation_weight(&self, mired: f64) -> f64 {
        let m1 = 1.0e6 / self.calibration_temp_1;
        let m2 = 1.0e6 / self.calibration_temp_2;
        if m1 == m2 {
            return 1.0;
        }
        ((mired - m2) / (m1 - m2)).clamp(0.0, 1.0)
    }
}

/// XYZ-to-camera matrix for a scene white, blended between the two
/// calibration matrices by the white's correlated color temperature.
pub fn find_xyz_to_cam(white: XyCoord, profile: &CameraProfile) -> Matrix3 {
    let g = profile.interpolation_weight(xy_to_mired(white));
    if g == 1.0 {
        return profile.color_matrix_1;
    }
    if g == 0.0 {
        return profile.color_matrix_2;
    }
    profile.color_matrix_1 * g + profile.color_matrix_2 * (1.0 - g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeutralSolution {
    pub white: XyCoord,
    pub xyz_to_cam: Matrix3,
    pub mired: f64,
}

/// Planckian white whose camera response points along `neutral`.
///
/// Sweeps the locus in one-mired steps and keeps the candidate with the
/// smallest angle between its projected camera white and `neutral`.
pub fn neutral_to_xy(neutral: [f64; 3], profile: &CameraProfile) -> Result<NeutralSolution> {
    if !neutral.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "camera neutral {neutral:?} must be strictly positive"
        )));
    }
    let target = Vector3::from(neutral);
    let mut best: Option<(f64, NeutralSolution)> = None;
    for mired in mired_grid() {
        let white = temperature_to_xy(1.0e6 / mired)?;
        let xyz_to_cam = find_xyz_to_cam(white, profile);
        let projected = xyz_to_cam * xy_to_xyz(white);
        let angle = angle_between(&projected, &target);
        if best.as_ref().is_none_or(|(a, _)| angle < *a) {
            best = Some((
                angle,
                NeutralSolution {
                    white,
                    xyz_to_cam,
                    mired,
                },
            ));
        }
    }
    Ok(best.expect("non-empty grid").1)
}

/// Clips each camera-space channel to the camera white.
pub fn highlight_recovery(img: &LinearImage, camera_white: [f32; CHANNELS]) -> LinearImage {
    let mut out = img.clone();
    for (c, limit) in camera_white.iter().enumerate() {
        for v in out.plane_mut(c) {
            *v = v.min(*limit);
        }
    }
    out
}
