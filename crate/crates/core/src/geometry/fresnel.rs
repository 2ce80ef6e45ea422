use super::IncidenceMap;
use crate::error::{Error, Result};
use crate::image::{LinearImage, CHANNELS};

/// Unpolarized reflectance of a dielectric surface,
/// `alpha = (sin^2(ti - tt) / sin^2(ti + tt) + tan^2(ti - tt) / tan^2(ti + tt)) / 2`
/// with `tt = asin(sin(ti) / kappa)`. Normal incidence returns the limit
/// `((kappa - 1) / (kappa + 1))^2`.
pub fn fresnel_alpha(theta_i: f64, kappa: f64) -> f64 {
    if theta_i == 0.0 {
        return ((kappa - 1.0) / (kappa + 1.0)).powi(2);
    }
    let theta_t = (theta_i.sin() / kappa).asin();
    let diff = theta_i - theta_t;
    let sum = theta_i + theta_t;
    let perp = (diff.sin() / sum.sin()).powi(2);
    let par = (diff.tan() / sum.tan()).powi(2);
    0.5 * (perp + par)
}

/// `r <- alpha r` and `t <- (1 - alpha) t`, pixel by pixel.
pub fn apply_fresnel(
    t: &LinearImage,
    r: &LinearImage,
    imap: &IncidenceMap,
    kappa: f64,
) -> Result<(LinearImage, LinearImage)> {
    t.check_same_dims(r)?;
    if t.dims() != (imap.width(), imap.height()) {
        return Err(Error::DimensionMismatch("incidence map".into()));
    }
    let alpha = imap.alpha(kappa);
    let (mut t_out, mut r_out) = (t.clone(), r.clone());
    for c in 0..CHANNELS {
        for ((tv, rv), a) in t_out.plane_mut(c).iter_mut().zip(r_out.plane_mut(c)).zip(&alpha) {
            *tv = (*tv as f64 * (1.0 - a)) as f32;
            *rv = (*rv as f64 * a) as f32;
        }
    }
    Ok((t_out, r_out))
}
