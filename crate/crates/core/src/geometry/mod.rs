//! Glass and camera geometry: scenario sampling, per-pixel angle of incidence,
//! Fresnel attenuation, ghosting from the back face of the pane, defocus and
//! perspective crops from panoramas.
//!
//! Every operator here is linear in its image argument, so `m = t + r`
//! survives the geometric stage.

mod camera;
mod defocus;
mod double;
mod fresnel;
mod ibl;

pub use camera::{incidence_map, CameraRig, IncidenceMap};
pub use defocus::{
    defocus_blur, defocus_diameter, defocus_diameter_mm, disk_kernel, kernel_diameter_px,
    DiskKernel, SENSOR_HEIGHT_MM,
};
pub use double::{double_reflection, double_reflection_beta, reflection_shift};
pub use fresnel::{apply_fresnel, fresnel_alpha};
pub use ibl::{calibrate_ibl_exposure, ibl_crop, luminance_median, median};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{LinearImage, PoseMeta};

/// Sampling ranges and fixed optics for the simulated capture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub max_azimuth_deg: f64,
    pub vfov_range_deg: [f64; 2],
    pub kappa_range: [f64; 2],
    pub thickness_range_mm: [f64; 2],
    pub viewing_distance_range_mm: [f64; 2],
    pub double_pane_probability: f64,
    /// Air gap added between the two panes of a double pane.
    pub pane_gap_range_mm: [f64; 2],
    pub object_distance_range_ft: [f64; 2],
    pub focus_distance_range_ft: [f64; 2],
    pub f_number: f64,
    /// 35 mm-equivalent focal length.
    pub focal_length_mm: f64,
    /// A scenario is rejected when more camera rays than this miss the pane.
    pub max_missed_pixels: usize,
    pub max_delta_inclination_deg: f64,
    pub max_abs_inclination_deg: f64,
    pub max_abs_roll_deg: f64,
    /// Bend rays by Snell's law inside the pane when tracing the ghost.
    pub refract_in_pane: bool,
    /// Ghost shifts below this many pixels are treated as no ghost at all.
    pub min_ghost_shift_px: f64,
    /// Largest allowed ratio of crop to panorama angular sampling density.
    pub max_ibl_oversample: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            max_azimuth_deg: 50.0,
            vfov_range_deg: [50.0, 80.0],
            kappa_range: [1.47, 1.53],
            thickness_range_mm: [8.0, 20.0],
            viewing_distance_range_mm: [500.0, 2000.0],
            double_pane_probability: 0.5,
            pane_gap_range_mm: [0.0, 0.0],
            object_distance_range_ft: [1.0, 100.0],
            focus_distance_range_ft: [1.0, 100.0],
            f_number: 1.6,
            focal_length_mm: 26.0,
            max_missed_pixels: 4,
            max_delta_inclination_deg: 15.0,
            max_abs_inclination_deg: 45.0,
            max_abs_roll_deg: 10.0,
            refract_in_pane: true,
            min_ghost_shift_px: 0.01,
            max_ibl_oversample: 4.0,
        }
    }
}

fn check_range(name: &str, r: [f64; 2], lo: f64, hi: f64) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && lo <= r[0] && r[0] <= r[1] && r[1] <= hi) {
        return Err(Error::InvalidArgument(format!(
            "{name} {r:?} must be an ordered range within [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("max_azimuth_deg", [0.0, self.max_azimuth_deg], 0.0, 90.0)?;
        check_range("vfov_range_deg", self.vfov_range_deg, f64::MIN_POSITIVE, 179.0)?;
        check_range("kappa_range", self.kappa_range, 1.0 + f64::EPSILON, 2.0 - f64::EPSILON)?;
        check_range("thickness_range_mm", self.thickness_range_mm, f64::MIN_POSITIVE, f64::MAX)?;
        check_range(
            "viewing_distance_range_mm",
            self.viewing_distance_range_mm,
            f64::MIN_POSITIVE,
            f64::MAX,
        )?;
        check_range("double_pane_probability", [0.0, self.double_pane_probability], 0.0, 1.0)?;
        check_range("pane_gap_range_mm", self.pane_gap_range_mm, 0.0, f64::MAX)?;
        check_range("object_distance_range_ft", self.object_distance_range_ft, f64::MIN_POSITIVE, f64::MAX)?;
        check_range("focus_distance_range_ft", self.focus_distance_range_ft, f64::MIN_POSITIVE, f64::MAX)?;
        for (name, v) in [
            ("f_number", self.f_number),
            ("focal_length_mm", self.focal_length_mm),
            ("max_ibl_oversample", self.max_ibl_oversample),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.focus_distance_range_ft[0] * FEET_TO_MM <= self.focal_length_mm {
            return Err(Error::InvalidArgument(
                "focus distances must exceed the focal length".into(),
            ));
        }
        Ok(())
    }

    /// Pose gate for a candidate pair. Both poses must be usable, their
    /// inclinations must agree, and neither may be steep or rolled.
    pub fn pose_compatible(&self, a: &PoseMeta, b: &PoseMeta) -> bool {
        let usable = |p: &PoseMeta| {
            p.vfov_deg > 0.0
                && p.inclination_deg.abs() <= self.max_abs_inclination_deg
                && p.roll_deg.abs() <= self.max_abs_roll_deg
        };
        usable(a)
            && usable(b)
            && (a.inclination_deg - b.inclination_deg).abs() <= self.max_delta_inclination_deg
    }
}

pub const FEET_TO_MM: f64 = 304.8;

/// One random draw of glass and camera geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureScenario {
    pub azimuth_deg: f64,
    pub vfov_deg: f64,
    pub refractive_index: f64,
    /// Thickness of one pane.
    pub pane_thickness_mm: f64,
    pub pane_gap_mm: f64,
    pub viewing_distance_mm: f64,
    pub double_pane: bool,
    pub object_dist_ft: f64,
    pub focus_dist_ft: f64,
    pub f_number: f64,
    pub focal_length_mm: f64,
    /// Heading of synthetic cameras inside panoramas.
    pub ibl_azimuth_deg: f64,
    pub rng_seed: u64,
}

impl CaptureScenario {
    pub fn validate(&self) -> Result<()> {
        let ok = self.refractive_index > 1.0
            && self.refractive_index < 2.0
            && self.pane_thickness_mm > 0.0
            && self.pane_gap_mm >= 0.0
            && self.viewing_distance_mm > 0.0
            && self.object_dist_ft > 0.0
            && self.focus_dist_ft > 0.0
            && self.f_number > 0.0
            && self.focal_length_mm > 0.0
            && self.vfov_deg > 0.0
            && self.vfov_deg < 180.0
            && self.azimuth_deg.abs() < 90.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid scenario {self:?}")))
        }
    }

    /// Thickness seen by the ghost ray. A double pane counts both panes
    /// plus the gap between them.
    pub fn effective_thickness_mm(&self) -> f64 {
        if self.double_pane {
            2.0 * self.pane_thickness_mm + self.pane_gap_mm
        } else {
            self.pane_thickness_mm
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        // Still consume a draw so the stream does not depend on the ranges.
        let _: f64 = rng.random();
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Draws every scenario field from its configured distribution.
pub fn sample_scenario<R: Rng + ?Sized>(rng: &mut R, config: &SimulationConfig) -> CaptureScenario {
    let azimuth_deg = uniform(rng, [-config.max_azimuth_deg, config.max_azimuth_deg]);
    let vfov_deg = uniform(rng, config.vfov_range_deg);
    let refractive_index = uniform(rng, config.kappa_range);
    let pane_thickness_mm = uniform(rng, config.thickness_range_mm);
    let viewing_distance_mm = uniform(rng, config.viewing_distance_range_mm);
    let double_pane = rng.random_bool(config.double_pane_probability);
    let pane_gap_mm = uniform(rng, config.pane_gap_range_mm);
    let object_dist_ft = uniform(rng, config.object_distance_range_ft);
    let focus_dist_ft = uniform(rng, config.focus_distance_range_ft);
    let ibl_azimuth_deg = uniform(rng, [0.0, 360.0]);
    let rng_seed = rng.next_u64();
    CaptureScenario {
        azimuth_deg,
        vfov_deg,
        refractive_index,
        pane_thickness_mm,
        pane_gap_mm,
        viewing_distance_mm,
        double_pane,
        object_dist_ft,
        focus_dist_ft,
        f_number: config.f_number,
        focal_length_mm: config.focal_length_mm,
        ibl_azimuth_deg,
        rng_seed,
    }
}

/// Per-example geometry diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryStats {
    pub mean_alpha: f64,
    pub max_alpha: f64,
    pub missed_pixels: usize,
    pub delta_p: f64,
    pub kernel_diameter_px: usize,
    pub max_ghost_shift_px: f64,
}

/// Transmission and reflection after the glass.
#[derive(Debug, Clone)]
pub struct GlassImages {
    pub t: LinearImage,
    pub r: LinearImage,
    pub stats: GeometryStats,
}

/// Applies the glass to a transmission source `i` and reflection source `j`
/// of equal size: `t = (1 - alpha) i` and `r = blur(alpha j + beta j_w)`.
///
/// `delta_p_scale` converts the defocus diameter, a fraction of the full
/// source frame, into a fraction of the crop that `j` came from.
pub fn simulate_glass(
    i: &LinearImage,
    j: &LinearImage,
    scenario: &CaptureScenario,
    pose: &PoseMeta,
    delta_p_scale: f64,
    config: &SimulationConfig,
) -> Result<GlassImages> {
    i.check_same_dims(j)?;
    let (w, h) = i.dims();
    let imap = incidence_map(scenario, pose, w, h, config.max_missed_pixels)?;
    let alpha = imap.alpha(scenario.refractive_index);
    let mut t = i.clone();
    for c in 0..crate::image::CHANNELS {
        for (v, a) in t.plane_mut(c).iter_mut().zip(&alpha) {
            *v = (*v as f64 * (1.0 - a)) as f32;
        }
    }
    let ghosted = double_reflection(j, &imap, scenario, &alpha, config)?;
    let delta_p = defocus_diameter(scenario)? * delta_p_scale;
    let r = defocus_blur(&ghosted.image, delta_p)?;
    let n = alpha.len() as f64;
    let stats = GeometryStats {
        mean_alpha: alpha.iter().sum::<f64>() / n,
        max_alpha: alpha.iter().copied().fold(0.0, f64::max),
        missed_pixels: imap.missed_count(),
        delta_p,
        kernel_diameter_px: kernel_diameter_px(delta_p, w.min(h)),
        max_ghost_shift_px: ghosted.max_shift_px,
    };
    Ok(GlassImages { t, r, stats })
}
