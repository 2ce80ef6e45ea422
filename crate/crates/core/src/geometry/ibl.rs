use std::f64::consts::PI;

use super::CameraRig;
use crate::error::{Error, Result};
use crate::image::{LinearImage, PoseMeta, CHANNELS};

/// Bilinear lookup in an equirectangular panorama at continuous coordinates,
/// wrapping in longitude and clamping in latitude.
fn sample_wrapped(plane: &[f32], w: usize, h: usize, u: f64, v: f64) -> f64 {
    let x = u - 0.5;
    let y = (v - 0.5).clamp(0.0, (h - 1) as f64);
    let x0 = x.floor();
    let fx = x - x0;
    let xa = (x0 as i64).rem_euclid(w as i64) as usize;
    let xb = (xa + 1) % w;
    let y0 = y.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let fy = y - y0 as f64;
    let at = |xx: usize, yy: usize| plane[yy * w + xx] as f64;
    (at(xa, y0) * (1.0 - fx) + at(xb, y0) * fx) * (1.0 - fy) + (at(xa, y1) * (1.0 - fx) + at(xb, y1) * fx) * fy
}

/// Perspective view of a 360 x 180 degree equirectangular panorama.
///
/// The synthetic camera uses the field of view, inclination and roll of
/// `pose` and looks along `azimuth_deg`. Longitude zero is the panorama's
/// center column; positive azimuth turns toward larger columns.
pub fn ibl_crop(
    panorama: &LinearImage,
    pose: &PoseMeta,
    azimuth_deg: f64,
    out_width: usize,
    out_height: usize,
    max_oversample: f64,
) -> Result<LinearImage> {
    pose.validate()?;
    let (pw, ph) = panorama.dims();
    if pw != 2 * ph || ph == 0 {
        return Err(Error::InvalidArgument(format!(
            "panorama must be 2:1 equirectangular, got {pw}x{ph}"
        )));
    }
    if out_width == 0 || out_height == 0 {
        return Err(Error::InvalidArgument("empty crop".into()));
    }
    let crop_density = out_height as f64 / pose.vfov_deg;
    let pano_density = pw as f64 / 360.0;
    let oversample = crop_density / pano_density;
    if oversample > max_oversample {
        return Err(Error::InvalidArgument(format!(
            "crop samples the panorama {oversample:.2}x denser than it was captured (limit {max_oversample})"
        )));
    }
    let rig = CameraRig::new(out_width, out_height, pose.vfov_deg, azimuth_deg, pose);
    let mut coords = Vec::with_capacity(out_width * out_height);
    for y in 0..out_height {
        for x in 0..out_width {
            let d = rig.ray(x as f64 + 0.5, y as f64 + 0.5);
            let lon = d.x.atan2(d.z);
            let lat = d.y.clamp(-1.0, 1.0).asin();
            coords.push(((lon / (2.0 * PI) + 0.5) * pw as f64, (0.5 - lat / PI) * ph as f64));
        }
    }
    let mut data = vec![0.0f32; out_width * out_height * CHANNELS];
    for c in 0..CHANNELS {
        let plane = panorama.plane(c);
        let dst = &mut data[c * coords.len()..(c + 1) * coords.len()];
        for (o, (u, v)) in dst.iter_mut().zip(&coords) {
            *o = sample_wrapped(plane, pw, ph, *u, *v) as f32;
        }
    }
    let mut out = LinearImage::new(out_width, out_height, panorama.color_space, data)?;
    out.white_xy = panorama.white_xy;
    out.saturation_level = panorama.saturation_level;
    out.exposure = panorama.exposure;
    out.scene_class = panorama.scene_class;
    out.camera_profile = panorama.camera_profile.clone();
    out.pose = Some(*pose);
    Ok(out)
}

/// Median, averaging the two middle values for even counts. Reorders `values`.
pub fn median(values: &mut [f32]) -> f64 {
    let n = values.len();
    values.sort_unstable_by(f32::total_cmp);
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] as f64 + values[n / 2] as f64) / 2.0
    }
}

/// Median of the second channel (luminance `Y` for XYZ images).
pub fn luminance_median(img: &LinearImage) -> f64 {
    median(&mut img.plane(1).to_vec())
}

/// Scales the panorama so its luminance median equals `reference_median`.
pub fn calibrate_ibl_exposure(panorama: &LinearImage, reference_median: f64) -> Result<LinearImage> {
    if !(reference_median > 0.0) || !reference_median.is_finite() {
        return Err(Error::InvalidArgument(format!("reference median {reference_median}")));
    }
    let median = luminance_median(panorama);
    if !(median > 0.0) {
        return Err(Error::DegenerateStats(format!("panorama median {median}")));
    }
    Ok(panorama.scale(reference_median / median))
}
