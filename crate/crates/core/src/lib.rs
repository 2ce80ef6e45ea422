//! Synthesis of glass-reflection training examples `(m, t, r, c)` from pairs
//! of linear, scene-referred images.
//!
//! Images are mixed in XYZ before white balancing so that the illuminant
//! colors of the transmitted and reflected scenes combine the way light does.
//! Geometry (Fresnel attenuation, ghosting from the back face of the pane,
//! defocus) is applied before mixing, and a capture function re-exposes and
//! re-white-balances the sum. Candidates are then culled by exposure and SSIM.

pub mod color;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod image;
pub mod photometric;
pub mod search;

pub use error::{Error, Result};
