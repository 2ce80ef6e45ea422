//! Capture simulation: exposure normalization, additive mixing in XYZ,
//! re-exposure of the mixture and a shared white balance for all outputs.

use serde::{Deserialize, Serialize};

use crate::color::{
    d50_xy, find_xyz_to_cam, map_white_matrix, neutral_to_xy, srgb_to_linear, xy_to_mired,
    xyz_d50_to_srgb, xyz_to_srgb_matrix, CameraProfile, Matrix3, XyCoord,
};
use crate::error::{Error, Result};
use crate::image::{ColorSpace, ExposureMeta, LinearImage, CHANNELS};

/// Target for the mean linear-sRGB sample of an unsaturated mixture.
pub fn exposure_target() -> f64 {
    srgb_to_linear(0.4).expect("0.4 is a valid encoded value")
}

/// Divides samples by `e = s * g / n^2`, giving pixels proportional to scene
/// luminance up to a constant shared by every image.
pub fn unexpose(img: &LinearImage, meta: &ExposureMeta) -> Result<LinearImage> {
    meta.validate()?;
    let mut out = img.scale(1.0 / meta.exposure());
    out.exposure = None;
    Ok(out)
}

fn white_of(img: &LinearImage, what: &str) -> Result<XyCoord> {
    img.white_xy
        .ok_or_else(|| Error::InvalidArgument(format!("{what} has no white point")))
}

fn expect_xyz(img: &LinearImage) -> Result<()> {
    if img.color_space != ColorSpace::Xyz {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::Xyz.name(),
            actual: img.color_space.name(),
        });
    }
    Ok(())
}

/// Re-exposure for `m = t + r`, with saturation taken from the images.
pub fn compute_exposure(m: &LinearImage, t: &LinearImage, r: &LinearImage) -> Result<f64> {
    compute_exposure_with(m, t, r, t.is_saturated() || r.is_saturated())
}

/// Re-exposure with the saturation decision supplied by the caller. The
/// pipeline decides saturation on the source crops, before glass attenuation
/// pulls clipped pixels below the saturation level.
///
/// Unsaturated: the mean linear-sRGB sample of `m` lands on the target.
/// Saturated: the smaller of the two component maxima lands on 1.0. A
/// component that is entirely black cannot be saturated and is ignored.
pub fn compute_exposure_with(
    m: &LinearImage,
    t: &LinearImage,
    r: &LinearImage,
    saturated: bool,
) -> Result<f64> {
    for img in [m, t, r] {
        expect_xyz(img)?;
    }
    m.check_same_dims(t)?;
    m.check_same_dims(r)?;
    let to_srgb = xyz_to_srgb_matrix(white_of(t, "transmission")?);
    if !saturated {
        let mu = m.transform(&to_srgb).mean();
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::DegenerateMixture(format!("mean linear sRGB value {mu}")));
        }
        return Ok(exposure_target() / mu);
    }
    let t_max = t.transform(&to_srgb).max() as f64;
    let r_max = r.transform(&to_srgb).max() as f64;
    let peak = [t_max, r_max]
        .into_iter()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !peak.is_finite() {
        return Err(Error::DegenerateMixture("both components are black".into()));
    }
    Ok(1.0 / peak)
}

/// White-point estimator operating on camera-space images. Implementations
/// must be usable from several threads at once.
pub trait AwbEstimator: Send + Sync {
    /// Camera-space white (neutral) for `img`.
    fn estimate(&self, img: &LinearImage) -> Result<[f64; CHANNELS]>;

    fn name(&self) -> &str;
}

/// Gray world: the neutral is the mean of each camera channel.
#[derive(Debug, Clone, Copy, Default)]
pub struct GrayWorld;

impl AwbEstimator for GrayWorld {
    fn estimate(&self, img: &LinearImage) -> Result<[f64; CHANNELS]> {
        let means = img.channel_means();
        if means.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(means)
        } else {
            Err(Error::AwbFailure(format!("gray-world means {means:?}")))
        }
    }

    fn name(&self) -> &str {
        "gray_world"
    }
}

/// Returns a fixed neutral regardless of image content.
#[derive(Debug, Clone, Copy)]
pub struct FixedNeutral(pub [f64; CHANNELS]);

impl AwbEstimator for FixedNeutral {
    fn estimate(&self, _img: &LinearImage) -> Result<[f64; CHANNELS]> {
        Ok(self.0)
    }

    fn name(&self) -> &str {
        "fixed"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotometricConfig {
    /// Largest allowed distance, in mired, between the transmission's
    /// as-shot white and the estimated white.
    pub max_white_shift_mired: f64,
}

impl Default for PhotometricConfig {
    fn default() -> Self {
        PhotometricConfig {
            max_white_shift_mired: 100.0,
        }
    }
}

/// The simulated camera: re-exposure plus a white balance expressed as a
/// single XYZ-to-XYZ(D50) matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureFunction {
    pub exposure_scalar: f64,
    pub wb_transform: Matrix3,
    pub white_xy_awb: XyCoord,
    /// As-shot white of the transmission, which defines the simulated camera.
    pub white_xy_as_shot: XyCoord,
    pub xyz_to_cam: Matrix3,
    pub xyz_to_cam_awb: Matrix3,
}

impl CaptureFunction {
    /// Mired distance between the estimated and as-shot whites.
    pub fn white_shift_mired(&self) -> f64 {
        (xy_to_mired(self.white_xy_awb) - xy_to_mired(self.white_xy_as_shot)).abs()
    }

    /// XYZ to linear sRGB, including the exposure scalar. The same matrix is
    /// applied to every image of one example.
    pub fn output_matrix(&self) -> Matrix3 {
        xyz_d50_to_srgb() * self.wb_transform * self.exposure_scalar
    }
}

/// Builds the white balance from the re-exposed mixture. The transmission's
/// profile stands in for the camera that captured the mixture.
///
/// Returns `B(awb -> D50) * inv(XYZ_to_CAM_awb) * XYZ_to_CAM`. The
/// `exposure_scalar` of the result is 1; callers fill it in.
pub fn white_balance_transform(
    m_exposed: &LinearImage,
    t: &LinearImage,
    profile: &CameraProfile,
    awb: &dyn AwbEstimator,
) -> Result<CaptureFunction> {
    expect_xyz(m_exposed)?;
    let as_shot = white_of(t, "transmission")?;
    let xyz_to_cam = find_xyz_to_cam(as_shot, profile);
    let mut cam = m_exposed.transform(&xyz_to_cam);
    cam.color_space = ColorSpace::CameraNative;
    cam.camera_profile = Some(t.camera_profile.clone().unwrap_or_else(|| "simulated".into()));
    let neutral = awb.estimate(&cam)?;
    if !neutral.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::AwbFailure(format!(
            "{} returned non-positive neutral {neutral:?}",
            awb.name()
        )));
    }
    let solved = neutral_to_xy(neutral, profile).map_err(|e| Error::AwbFailure(e.to_string()))?;
    let cam_to_xyz_awb = solved
        .xyz_to_cam
        .try_inverse()
        .ok_or_else(|| Error::AwbFailure("XYZ_to_CAM_awb is singular".into()))?;
    let wb_transform = map_white_matrix(solved.white, d50_xy()) * cam_to_xyz_awb * xyz_to_cam;
    Ok(CaptureFunction {
        exposure_scalar: 1.0,
        wb_transform,
        white_xy_awb: solved.white,
        white_xy_as_shot: as_shot,
        xyz_to_cam,
        xyz_to_cam_awb: solved.xyz_to_cam,
    })
}

/// Output of the capture simulation: four linear-sRGB images sharing one
/// white balance, plus the capture function that produced them.
#[derive(Debug, Clone)]
pub struct CapturedExample {
    pub m: LinearImage,
    pub t: LinearImage,
    pub r: LinearImage,
    pub c: LinearImage,
    pub capture: CaptureFunction,
}

fn to_output(img: &LinearImage, matrix: &Matrix3, white: XyCoord) -> LinearImage {
    let mut out = img.transform(matrix);
    out.color_space = ColorSpace::LinearSrgb;
    out.white_xy = Some(white);
    out.saturation_level = [1.0; CHANNELS];
    out.exposure = None;
    out.camera_profile = None;
    out
}

/// Mixes unexposed, geometrically transformed `t` and `r` in XYZ and applies
/// one capture function to the mixture, the components and the context.
pub fn simulate_example(
    t: &LinearImage,
    r: &LinearImage,
    c: &LinearImage,
    saturated: bool,
    profile: &CameraProfile,
    awb: &dyn AwbEstimator,
    config: &PhotometricConfig,
) -> Result<CapturedExample> {
    expect_xyz(c)?;
    let m = t.add(r)?;
    let e = compute_exposure_with(&m, t, r, saturated)?;
    let mut capture = white_balance_transform(&m.scale(e), t, profile, awb)?;
    capture.exposure_scalar = e;
    let shift = capture.white_shift_mired();
    if shift > config.max_white_shift_mired {
        return Err(Error::WhiteShift(shift));
    }
    let matrix = capture.output_matrix();
    let white = capture.white_xy_awb;
    Ok(CapturedExample {
        m: to_output(&m, &matrix, white),
        t: to_output(t, &matrix, white),
        r: to_output(r, &matrix, white),
        c: to_output(c, &matrix, white),
        capture,
    })
}
