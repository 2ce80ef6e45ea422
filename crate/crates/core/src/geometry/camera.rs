use std::f64::consts::FRAC_PI_2;

use super::CaptureScenario;
use crate::color::{Matrix3, Vector3};
use crate::error::{Error, Result};
use crate::image::PoseMeta;

/// Pinhole camera in a world where the pane is the plane `z = const` with
/// normal `+z`, `y` points up and `x` right.
///
/// Continuous pixel coordinates put the center of pixel `(x, y)` at
/// `(x + 0.5, y + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraRig {
    pub width: usize,
    pub height: usize,
    pub focal_px: f64,
    /// Camera-to-world rotation.
    pub rotation: Matrix3,
}

fn rot_x(a: f64) -> Matrix3 {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

fn rot_y(a: f64) -> Matrix3 {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_z(a: f64) -> Matrix3 {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

impl CameraRig {
    /// Positive azimuth turns right, positive inclination looks up and
    /// positive roll turns the image counter-clockwise.
    pub fn new(width: usize, height: usize, vfov_deg: f64, azimuth_deg: f64, pose: &PoseMeta) -> Self {
        let focal_px = (height as f64 / 2.0) / (vfov_deg.to_radians() / 2.0).tan();
        let rotation = rot_y(azimuth_deg.to_radians())
            * rot_x(pose.inclination_deg.to_radians())
            * rot_z(pose.roll_deg.to_radians());
        CameraRig {
            width,
            height,
            focal_px,
            rotation,
        }
    }

    /// Unit world-space ray through continuous pixel position `(u, v)`.
    pub fn ray(&self, u: f64, v: f64) -> Vector3 {
        let cam = Vector3::new(
            u - self.width as f64 / 2.0,
            -(v - self.height as f64 / 2.0),
            self.focal_px,
        );
        (self.rotation * cam).normalize()
    }

    /// Continuous pixel position of a world-space direction or point, if it
    /// lies in front of the camera.
    pub fn project(&self, world: &Vector3) -> Option<(f64, f64)> {
        let cam = self.rotation.transpose() * world;
        if cam.z <= 0.0 {
            return None;
        }
        Some((
            cam.x / cam.z * self.focal_px + self.width as f64 / 2.0,
            -cam.y / cam.z * self.focal_px + self.height as f64 / 2.0,
        ))
    }

    /// Image of the pane normal, where no ghosting can occur.
    pub fn glass_normal_pixel(&self) -> Option<(f64, f64)> {
        self.project(&Vector3::z())
    }
}

/// Per-pixel angle of incidence on the pane, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMap {
    pub rig: CameraRig,
    pub theta: Vec<f64>,
    /// Pixels whose rays run parallel to or away from the pane. Their angle is
    /// pinned just below grazing.
    pub missed: Vec<bool>,
}

impl IncidenceMap {
    pub fn width(&self) -> usize {
        self.rig.width
    }

    pub fn height(&self) -> usize {
        self.rig.height
    }

    pub fn missed_count(&self) -> usize {
        self.missed.iter().filter(|m| **m).count()
    }

    pub fn alpha(&self, kappa: f64) -> Vec<f64> {
        self.theta.iter().map(|&t| super::fresnel_alpha(t, kappa)).collect()
    }
}

const GRAZING: f64 = FRAC_PI_2 - 1e-9;

/// Traces one ray per pixel center against the pane. Fails when more than
/// `max_missed` rays miss it.
pub fn incidence_map(
    scenario: &CaptureScenario,
    pose: &PoseMeta,
    width: usize,
    height: usize,
    max_missed: usize,
) -> Result<IncidenceMap> {
    scenario.validate()?;
    pose.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("empty raster".into()));
    }
    let rig = CameraRig::new(width, height, scenario.vfov_deg, scenario.azimuth_deg, pose);
    let mut theta = Vec::with_capacity(width * height);
    let mut missed = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let d = rig.ray(x as f64 + 0.5, y as f64 + 0.5);
            if d.z > 0.0 {
                theta.push(d.z.clamp(-1.0, 1.0).acos().min(GRAZING));
                missed.push(false);
            } else {
                theta.push(GRAZING);
                missed.push(true);
            }
        }
    }
    let map = IncidenceMap { rig, theta, missed };
    let count = map.missed_count();
    if count > max_missed {
        return Err(Error::GlassDoesNotFillFov(count));
    }
    Ok(map)
}
