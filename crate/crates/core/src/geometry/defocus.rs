use super::{CaptureScenario, FEET_TO_MM};
use crate::error::{Error, Result};
use crate::image::{LinearImage, CHANNELS};

/// Height of the 35 mm-equivalent sensor.
pub const SENSOR_HEIGHT_MM: f64 = 24.0;

/// Circle-of-confusion diameter on the sensor,
/// `|d_o - d_f| / d_o * f^2 / (N (d_f - f))`.
pub fn defocus_diameter_mm(s: &CaptureScenario) -> Result<f64> {
    let d_o = s.object_dist_ft * FEET_TO_MM;
    let d_f = s.focus_dist_ft * FEET_TO_MM;
    let f = s.focal_length_mm;
    if d_f <= f {
        return Err(Error::InvalidArgument(format!(
            "focus distance {d_f} mm must exceed focal length {f} mm"
        )));
    }
    Ok((d_o - d_f).abs() / d_o * f * f / (s.f_number * (d_f - f)))
}

/// Circle-of-confusion diameter as a fraction of the sensor height.
pub fn defocus_diameter(s: &CaptureScenario) -> Result<f64> {
    Ok(defocus_diameter_mm(s)? / SENSOR_HEIGHT_MM)
}

pub fn kernel_diameter_px(delta_p: f64, min_dim: usize) -> usize {
    (min_dim as f64 * delta_p).round().max(0.0) as usize
}

/// Normalized disk on an odd square support, each tap weighted by the
/// fraction of its pixel covered by the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskKernel {
    pub diameter: usize,
    pub radius: usize,
    /// Row-major `(2 radius + 1)^2` weights summing to one.
    pub weights: Vec<f64>,
}

const SUPERSAMPLE: usize = 8;

pub fn disk_kernel(diameter: usize) -> DiskKernel {
    let radius = diameter.div_ceil(2);
    let side = 2 * radius + 1;
    let r2 = (diameter as f64 / 2.0).powi(2);
    let mut weights = vec![0.0; side * side];
    for ky in 0..side {
        for kx in 0..side {
            let mut hits = 0usize;
            for sy in 0..SUPERSAMPLE {
                for sx in 0..SUPERSAMPLE {
                    let dx = kx as f64 - radius as f64 + (sx as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
                    let dy = ky as f64 - radius as f64 + (sy as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
                    hits += (dx * dx + dy * dy <= r2) as usize;
                }
            }
            weights[ky * side + kx] = hits as f64;
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    DiskKernel {
        diameter,
        radius,
        weights,
    }
}

/// Half-sample symmetric reflection, periodic in `2 n`.
fn mirror(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Convolves with a disk of diameter `round(h * delta_p)` pixels, `h` the
/// smaller image dimension. Diameters of one pixel or less leave the image
/// untouched. Mirror padding keeps the image mean.
pub fn defocus_blur(img: &LinearImage, delta_p: f64) -> Result<LinearImage> {
    if !(delta_p >= 0.0) || !delta_p.is_finite() {
        return Err(Error::InvalidArgument(format!("defocus fraction {delta_p}")));
    }
    let (w, h) = img.dims();
    let diameter = kernel_diameter_px(delta_p, w.min(h));
    if diameter <= 1 {
        return Ok(img.clone());
    }
    let kernel = disk_kernel(diameter);
    let side = 2 * kernel.radius + 1;
    let rad = kernel.radius as isize;
    let taps: Vec<(isize, isize, f64)> = kernel
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, w)| ((i % side) as isize - rad, (i / side) as isize - rad, *w))
        .collect();
    let (pw, ph) = (w + 2 * kernel.radius, h + 2 * kernel.radius);
    let xs: Vec<usize> = (0..pw).map(|x| mirror(x as isize - rad, w)).collect();
    let ys: Vec<usize> = (0..ph).map(|y| mirror(y as isize - rad, h)).collect();
    let mut out = img.clone();
    let mut padded = vec![0.0f64; pw * ph];
    for c in 0..CHANNELS {
        let plane = img.plane(c);
        for (py, &sy) in ys.iter().enumerate() {
            for (px, &sx) in xs.iter().enumerate() {
                padded[py * pw + px] = plane[sy * w + sx] as f64;
            }
        }
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let (cx, cy) = ((x as isize + rad) as usize, (y as isize + rad) as usize);
                let mut acc = 0.0;
                for &(dx, dy, wt) in &taps {
                    acc += wt * padded[(cy as isize + dy) as usize * pw + (cx as isize + dx) as usize];
                }
                dst[y * w + x] = acc as f32;
            }
        }
    }
    Ok(out)
}
