use crate::error::{Error, Result};
use crate::image::{crop, LinearImage};

/// Top-left corner and side of a square crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Square {
    pub x0: usize,
    pub y0: usize,
    pub side: usize,
}

/// The two largest non-overlapping squares of a `width x height` frame:
/// left and right for landscape (and square) frames, top and bottom for
/// portrait ones.
pub fn split_squares(width: usize, height: usize, min_side: usize) -> Result<[Square; 2]> {
    let landscape = width >= height;
    let side = if landscape {
        height.min(width / 2)
    } else {
        width.min(height / 2)
    };
    if side == 0 || side < min_side {
        return Err(Error::ImageTooSmall(format!(
            "{width}x{height} cannot hold two {min_side}-pixel squares"
        )));
    }
    Ok(if landscape {
        [
            Square { x0: 0, y0: 0, side },
            Square {
                x0: width - side,
                y0: 0,
                side,
            },
        ]
    } else {
        [
            Square { x0: 0, y0: 0, side },
            Square {
                x0: 0,
                y0: height - side,
                side,
            },
        ]
    })
}

pub fn crop_square(img: &LinearImage, s: Square) -> Result<LinearImage> {
    crop(img, s.x0, s.y0, s.side, s.side)
}

/// Vertical field of view of a square of `side` rows cut from a frame of
/// `full_height` rows with vertical field of view `vfov_deg`.
pub fn crop_vfov_deg(vfov_deg: f64, full_height: usize, side: usize) -> f64 {
    let half = (vfov_deg.to_radians() / 2.0).tan() * side as f64 / full_height as f64;
    2.0 * half.atan().to_degrees()
}

/// Source crops for one example.
#[derive(Debug, Clone)]
pub struct ContextCrops {
    pub t_src: LinearImage,
    pub r_src: LinearImage,
    pub c_src: LinearImage,
}

/// `t_src = i_a`, `r_src = j_b` and `c_src = j_(1-b)`. The other half of
/// `i` is discarded.
pub fn make_context_crops(i: &LinearImage, j: &LinearImage, a: u8, b: u8, min_side: usize) -> Result<ContextCrops> {
    if a > 1 || b > 1 {
        return Err(Error::InvalidArgument(format!("crop selectors ({a}, {b}) must be 0 or 1")));
    }
    let si = split_squares(i.width(), i.height(), min_side)?;
    let sj = split_squares(j.width(), j.height(), min_side)?;
    Ok(ContextCrops {
        t_src: crop_square(i, si[a as usize])?,
        r_src: crop_square(j, sj[b as usize])?,
        c_src: crop_square(j, sj[1 - b as usize])?,
    })
}
