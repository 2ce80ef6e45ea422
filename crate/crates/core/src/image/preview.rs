use std::path::Path;

use super::{ColorSpace, LinearImage};
use crate::color::encode_srgb;
use crate::error::{Error, Result};

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreviewImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl PreviewImage {
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Png(e.to_string()))
    }
}

pub(crate) fn quantize(x: f64) -> u8 {
    (encode_srgb(x.clamp(0.0, 1.0)) * 255.0).round() as u8
}

/// Gamma-encodes a linear sRGB image for display.
pub fn to_preview_srgb(img: &LinearImage) -> Result<PreviewImage> {
    if img.color_space != ColorSpace::LinearSrgb {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::LinearSrgb.name(),
            actual: img.color_space.name(),
        });
    }
    let n = img.pixel_count();
    let mut data = Vec::with_capacity(n * 3);
    for i in 0..n {
        for c in 0..3 {
            data.push(quantize(img.plane(c)[i] as f64));
        }
    }
    Ok(PreviewImage {
        width: img.width(),
        height: img.height(),
        data,
    })
}
