//! Color math used to move pixels between camera, XYZ and linear sRGB:
//! chromaticity and correlated color temperature, Bradford white mapping,
//! dual-illuminant camera matrices and the sRGB transfer curve.

mod adapt;
mod profile;
mod temperature;
mod transfer;
mod xy;

pub use adapt::{map_white_matrix, xyz_d50_to_srgb, xyz_to_srgb_matrix, BRADFORD};
pub use profile::{
    find_xyz_to_cam, highlight_recovery, neutral_to_xy, CameraProfile, NeutralSolution,
};
pub use temperature::{
    mired_grid, temperature_to_xy, xy_to_mired, xy_to_temperature, MAX_KELVIN, MIN_KELVIN,
};
pub use transfer::{encode_srgb, srgb_to_linear};
pub use xy::{d50_xy, xy_to_xyz, xyz_to_xy, XyCoord};

/// Row-major 3x3 color transform.
pub type Matrix3 = nalgebra::Matrix3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Ratio of extreme singular values; infinite for singular matrices.
pub fn condition_number(m: &Matrix3) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Angle in radians between two vectors; zero when either is zero.
pub fn angle_between(a: &Vector3, b: &Vector3) -> f64 {
    let cross = a.cross(b).norm();
    let dot = a.dot(b);
    if cross == 0.0 && dot == 0.0 {
        return 0.0;
    }
    cross.atan2(dot)
}
