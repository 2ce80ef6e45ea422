//! Cropping and separable linear resampling. Both are linear in the samples,
//! so sums of images survive them.

use super::{LinearImage, CHANNELS};
use crate::error::{Error, Result};

pub fn crop(img: &LinearImage, x0: usize, y0: usize, width: usize, height: usize) -> Result<LinearImage> {
    if width == 0 || height == 0 || x0 + width > img.width() || y0 + height > img.height() {
        return Err(Error::DimensionMismatch(format!(
            "crop {width}x{height}+{x0}+{y0} outside {}x{}",
            img.width(),
            img.height()
        )));
    }
    let mut out = Vec::with_capacity(width * height * CHANNELS);
    for c in 0..CHANNELS {
        let plane = img.plane(c);
        for y in y0..y0 + height {
            out.extend_from_slice(&plane[y * img.width() + x0..y * img.width() + x0 + width]);
        }
    }
    let mut result = LinearImage::new(width, height, img.color_space, out)?;
    copy_meta(img, &mut result);
    Ok(result)
}

fn copy_meta(from: &LinearImage, to: &mut LinearImage) {
    to.white_xy = from.white_xy;
    to.saturation_level = from.saturation_level;
    to.exposure = from.exposure;
    to.pose = from.pose;
    to.scene_class = from.scene_class;
    to.camera_profile = from.camera_profile.clone();
}

/// Per-output-sample (source index, weight) lists along one axis.
/// Box-area integration when shrinking, linear interpolation when enlarging.
fn axis_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            if scale >= 1.0 {
                let lo = o as f64 * scale;
                let hi = lo + scale;
                let mut taps = Vec::new();
                let mut i = lo.floor() as usize;
                while (i as f64) < hi && i < src {
                    let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                    if overlap > 0.0 {
                        taps.push((i, overlap / scale));
                    }
                    i += 1;
                }
                taps
            } else {
                let pos = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let i0 = pos.floor() as usize;
                let i1 = (i0 + 1).min(src - 1);
                let f = pos - i0 as f64;
                if i1 == i0 || f == 0.0 {
                    vec![(i0, 1.0)]
                } else {
                    vec![(i0, 1.0 - f), (i1, f)]
                }
            }
        })
        .collect()
}

pub fn resize(img: &LinearImage, width: usize, height: usize) -> Result<LinearImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("resize to empty raster".into()));
    }
    if img.dims() == (width, height) {
        return Ok(img.clone());
    }
    let wx = axis_weights(img.width(), width);
    let wy = axis_weights(img.height(), height);
    let mut out = Vec::with_capacity(width * height * CHANNELS);
    let mut rows = vec![0.0f64; width * img.height()];
    for c in 0..CHANNELS {
        let plane = img.plane(c);
        for y in 0..img.height() {
            let src = &plane[y * img.width()..(y + 1) * img.width()];
            for (x, taps) in wx.iter().enumerate() {
                rows[y * width + x] = taps.iter().map(|&(i, w)| src[i] as f64 * w).sum();
            }
        }
        for taps in &wy {
            for x in 0..width {
                let v: f64 = taps.iter().map(|&(j, w)| rows[j * width + x] * w).sum();
                out.push(v as f32);
            }
        }
    }
    let mut result = LinearImage::new(width, height, img.color_space, out)?;
    copy_meta(img, &mut result);
    Ok(result)
}
