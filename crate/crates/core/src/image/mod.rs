//! Planar floating-point image container and the metadata carried with it.
//!
//! Samples are stored plane by plane (all of channel 0, then channel 1, then
//! channel 2), each plane row-major. Every pixel value is linear in scene
//! luminance.

mod io;
mod preview;
mod resample;

pub use io::{read_image, sidecar_path, write_image};
pub use preview::{to_preview_srgb, PreviewImage};
pub use resample::{crop, resize};

use serde::{Deserialize, Serialize};

use crate::color::{Matrix3, XyCoord};
use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorSpace {
    #[serde(rename = "camera")]
    CameraNative,
    #[serde(rename = "xyz")]
    Xyz,
    #[serde(rename = "linear_srgb")]
    LinearSrgb,
}

impl ColorSpace {
    pub fn name(self) -> &'static str {
        match self {
            ColorSpace::CameraNative => "camera",
            ColorSpace::Xyz => "xyz",
            ColorSpace::LinearSrgb => "linear_srgb",
        }
    }
}

/// Capture exposure. The photon count scales with `shutter_s * iso_gain / f_number^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureMeta {
    pub shutter_s: f64,
    #[serde(rename = "iso")]
    pub iso_gain: f64,
    pub f_number: f64,
}

impl ExposureMeta {
    pub fn new(shutter_s: f64, iso_gain: f64, f_number: f64) -> Result<Self> {
        let meta = ExposureMeta {
            shutter_s,
            iso_gain,
            f_number,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.shutter_s, self.iso_gain, self.f_number]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "exposure fields must be positive: {self:?}"
            )))
        }
    }

    /// e = s * g / n^2
    pub fn exposure(&self) -> f64 {
        self.shutter_s * self.iso_gain / (self.f_number * self.f_number)
    }
}

/// Estimated camera pose relative to gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseMeta {
    pub inclination_deg: f64,
    pub roll_deg: f64,
    pub vfov_deg: f64,
}

impl PoseMeta {
    pub fn level(vfov_deg: f64) -> Self {
        PoseMeta {
            inclination_deg: 0.0,
            roll_deg: 0.0,
            vfov_deg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.inclination_deg.is_finite()
            && self.roll_deg.is_finite()
            && self.vfov_deg.is_finite();
        if !finite || self.vfov_deg <= 0.0 || self.vfov_deg >= 180.0 {
            return Err(Error::InvalidArgument(format!("invalid pose {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneClass {
    Indoor,
    Outdoor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
    pub color_space: ColorSpace,
    pub white_xy: Option<XyCoord>,
    /// Largest representable value per channel; 1.0 for normalized captures.
    pub saturation_level: [f32; CHANNELS],
    pub exposure: Option<ExposureMeta>,
    pub pose: Option<PoseMeta>,
    pub scene_class: Option<SceneClass>,
    /// Camera profile id. Present exactly when the image is camera-native.
    pub camera_profile: Option<String>,
}

impl LinearImage {
    /// Wraps planar samples. Fails when the length disagrees with the
    /// dimensions or any sample is non-finite.
    pub fn new(
        width: usize,
        height: usize,
        color_space: ColorSpace,
        data: Vec<f32>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "empty raster {width}x{height}"
            )));
        }
        if data.len() != width * height * CHANNELS {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x{CHANNELS} raster needs {} samples, got {}",
                width * height * CHANNELS,
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(index));
        }
        Ok(LinearImage {
            width,
            height,
            data,
            color_space,
            white_xy: None,
            saturation_level: [1.0; CHANNELS],
            exposure: None,
            pose: None,
            scene_class: None,
            camera_profile: None,
        })
    }

    pub fn zeros(width: usize, height: usize, color_space: ColorSpace) -> Self {
        Self::filled(width, height, color_space, [0.0; CHANNELS])
    }

    pub fn filled(
        width: usize,
        height: usize,
        color_space: ColorSpace,
        value: [f32; CHANNELS],
    ) -> Self {
        Self::from_fn(width, height, color_space, |c, _, _| value[c])
    }

    /// Builds an image from `f(channel, x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        color_space: ColorSpace,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for c in 0..CHANNELS {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, x, y));
                }
            }
        }
        LinearImage {
            width,
            height,
            data,
            color_space,
            white_xy: None,
            saturation_level: [1.0; CHANNELS],
            exposure: None,
            pose: None,
            scene_class: None,
            camera_profile: None,
        }
    }

    /// Same metadata, new samples. Panics if the sample count differs.
    pub fn with_data(&self, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), self.data.len(), "sample count changed");
        LinearImage {
            data,
            ..self.metadata_clone()
        }
    }

    fn metadata_clone(&self) -> Self {
        LinearImage {
            width: self.width,
            height: self.height,
            data: Vec::new(),
            color_space: self.color_space,
            white_xy: self.white_xy,
            saturation_level: self.saturation_level,
            exposure: self.exposure,
            pose: self.pose,
            scene_class: self.scene_class,
            camera_profile: self.camera_profile.clone(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.pixel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.pixel_count();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, x: usize, y: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; CHANNELS] {
        [self.get(0, x, y), self.get(1, x, y), self.get(2, x, y)]
    }

    /// Checks every invariant of the container.
    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.width * self.height * CHANNELS {
            return Err(Error::DimensionMismatch("sample count".into()));
        }
        if let Some(index) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(index));
        }
        let is_camera = self.color_space == ColorSpace::CameraNative;
        if is_camera != self.camera_profile.is_some() {
            return Err(Error::InvalidArgument(
                "camera profile must be attached exactly to camera-native images".into(),
            ));
        }
        if let Some(e) = &self.exposure {
            e.validate()?;
        }
        if let Some(p) = &self.pose {
            p.validate()?;
        }
        Ok(())
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = self.with_data(self.data.iter().map(|&v| (v as f64 * k) as f32).collect());
        for s in out.saturation_level.iter_mut() {
            *s = (*s as f64 * k) as f32;
        }
        out
    }

    /// Applies a 3x3 color matrix to every pixel. Accumulates in f64.
    pub fn transform(&self, m: &Matrix3) -> Self {
        let n = self.pixel_count();
        let mut out = vec![0.0f32; n * CHANNELS];
        let (p0, p1, p2) = (self.plane(0), self.plane(1), self.plane(2));
        for i in 0..n {
            let v = [p0[i] as f64, p1[i] as f64, p2[i] as f64];
            for r in 0..CHANNELS {
                out[r * n + i] = (m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2]) as f32;
            }
        }
        self.with_data(out)
    }

    pub fn add(&self, other: &LinearImage) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(self.with_data(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn check_same_dims(&self, other: &LinearImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn channel_means(&self) -> [f64; CHANNELS] {
        let n = self.pixel_count() as f64;
        let mut out = [0.0; CHANNELS];
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.plane(c).iter().map(|&v| v as f64).sum::<f64>() / n;
        }
        out
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    /// True when any sample reaches 0.999 of its channel's saturation level.
    pub fn is_saturated(&self) -> bool {
        (0..CHANNELS).any(|c| {
            let limit = 0.999 * self.saturation_level[c];
            self.plane(c).iter().any(|&v| v >= limit)
        })
    }
}
