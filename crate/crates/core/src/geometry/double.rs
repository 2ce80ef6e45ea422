use super::{CameraRig, CaptureScenario, IncidenceMap, SimulationConfig};
use crate::color::Vector3;
use crate::error::{Error, Result};
use crate::image::{LinearImage, CHANNELS};

/// Attenuation of the ghost: transmitted in, reflected off the back face and
/// transmitted out, `(1 - alpha) alpha (1 - alpha)`.
pub fn double_reflection_beta(alpha: f64) -> f64 {
    (1.0 - alpha) * alpha * (1.0 - alpha)
}

/// Pixel offset `x' - x` of the ghost seen at continuous position `(u, v)`.
///
/// The camera ray enters the front face at `P`, crosses the pane, reflects
/// off the back face and leaves the front face at `P'`, displaced along the
/// in-plane direction of the ray by `2 T tan(theta)`. `theta` is the
/// refracted angle when `refract` is set, else the angle of incidence.
/// Returns `None` for rays that miss the pane.
pub fn reflection_shift(
    rig: &CameraRig,
    scenario: &CaptureScenario,
    u: f64,
    v: f64,
    refract: bool,
) -> Option<(f64, f64)> {
    let d = rig.ray(u, v);
    if d.z <= 0.0 {
        return None;
    }
    let entry = d * (scenario.viewing_distance_mm / d.z);
    let sin_i = d.x.hypot(d.y);
    if sin_i == 0.0 {
        return Some((0.0, 0.0));
    }
    let sin_t = if refract {
        sin_i / scenario.refractive_index
    } else {
        sin_i
    };
    let cos_t = (1.0 - sin_t * sin_t).max(0.0).sqrt();
    if cos_t == 0.0 {
        return None;
    }
    let lateral = 2.0 * scenario.effective_thickness_mm() * sin_t / cos_t;
    let along = Vector3::new(d.x / sin_i, d.y / sin_i, 0.0);
    let exit = entry + along * lateral;
    let (pu, pv) = rig.project(&exit)?;
    Some((pu - u, pv - v))
}

/// Bilinear sample at continuous coordinates, clamped to the edge.
fn bilinear(plane: &[f32], w: usize, h: usize, u: f64, v: f64) -> f64 {
    let x = (u - 0.5).clamp(0.0, (w - 1) as f64);
    let y = (v - 0.5).clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let at = |xx: usize, yy: usize| plane[yy * w + xx] as f64;
    (at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx) * (1.0 - fy) + (at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx) * fy
}

#[derive(Debug, Clone)]
pub struct GhostedReflection {
    pub image: LinearImage,
    pub max_shift_px: f64,
}

/// `alpha r + beta r_w`, where `r_w(x) = r(x')` samples the reflection at the
/// ghost position. Where the shift is below the configured minimum the output
/// is exactly `alpha r`.
pub fn double_reflection(
    r: &LinearImage,
    imap: &IncidenceMap,
    scenario: &CaptureScenario,
    alpha: &[f64],
    config: &SimulationConfig,
) -> Result<GhostedReflection> {
    let (w, h) = r.dims();
    if (w, h) != (imap.width(), imap.height()) || alpha.len() != w * h {
        return Err(Error::DimensionMismatch("alpha map".into()));
    }
    let mut shifts = Vec::with_capacity(w * h);
    let mut max_shift = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let s = reflection_shift(&imap.rig, scenario, x as f64 + 0.5, y as f64 + 0.5, config.refract_in_pane)
                .filter(|(du, dv)| du.hypot(*dv) >= config.min_ghost_shift_px);
            if let Some((du, dv)) = s {
                max_shift = max_shift.max(du.hypot(dv));
            }
            shifts.push(s);
        }
    }
    let mut out = r.clone();
    for c in 0..CHANNELS {
        let src = r.plane(c);
        let dst = out.plane_mut(c);
        for (i, shift) in shifts.iter().enumerate() {
            let a = alpha[i];
            let primary = a * src[i] as f64;
            dst[i] = match shift {
                None => primary as f32,
                Some((du, dv)) => {
                    let (x, y) = ((i % w) as f64 + 0.5, (i / w) as f64 + 0.5);
                    let ghost = bilinear(src, w, h, x + du, y + dv);
                    (primary + double_reflection_beta(a) * ghost) as f32
                }
            };
        }
    }
    Ok(GhostedReflection {
        image: out,
        max_shift_px: max_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{incidence_map, sample_scenario};
    use crate::image::{ColorSpace, PoseMeta};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario(azimuth: f64, thickness: f64) -> CaptureScenario {
        let mut s = sample_scenario(&mut ChaCha8Rng::seed_from_u64(6), &SimulationConfig::default());
        s.azimuth_deg = azimuth;
        s.vfov_deg = 60.0;
        s.pane_thickness_mm = thickness;
        s.double_pane = false;
        s.viewing_distance_mm = 800.0;
        s
    }

    #[test]
    fn beta_value() {
        assert!((double_reflection_beta(0.04) - 0.036864).abs() < 1e-15);
    }

    #[test]
    fn no_ghost_along_normal() {
        for az in [-40.0, -10.0, 0.0, 25.0] {
            let pose = PoseMeta {
                inclination_deg: 8.0,
                roll_deg: 3.0,
                vfov_deg: 60.0,
            };
            let s = scenario(az, 15.0);
            let rig = CameraRig::new(128, 96, 60.0, az, &pose);
            let (u, v) = rig.glass_normal_pixel().unwrap();
            let (du, dv) = reflection_shift(&rig, &s, u, v, true).unwrap();
            assert!(du.hypot(dv) < 1e-6, "{du} {dv}");
        }
    }

    /// Independent trace: walk the ray through the slab with explicit
    /// intersections and project with a fresh pinhole.
    fn traced_offset(rig: &CameraRig, s: &CaptureScenario, u: f64, v: f64) -> f64 {
        let d = rig.ray(u, v);
        let l = s.viewing_distance_mm;
        let p = d * (l / d.z);
        let kappa = s.refractive_index;
        // Snell in vector form for a +z normal.
        let n = Vector3::z();
        let cos_i = d.dot(&n);
        let k = 1.0 / kappa;
        let inside = d * k + n * ((1.0 - k * k * (1.0 - cos_i * cos_i)).sqrt() - k * cos_i);
        let back = p + inside * (s.effective_thickness_mm() / inside.z);
        let reflected = Vector3::new(inside.x, inside.y, -inside.z);
        let exit = back + reflected * (s.effective_thickness_mm() / inside.z);
        let (pu, pv) = rig.project(&exit).unwrap();
        (pu - u).hypot(pv - v)
    }

    #[test]
    fn matches_explicit_trace() {
        let s = scenario(30.0, 12.0);
        let rig = CameraRig::new(64, 64, 60.0, 30.0, &PoseMeta::level(60.0));
        for (u, v) in [(1.5, 2.5), (40.0, 10.0), (63.5, 63.5)] {
            let (du, dv) = reflection_shift(&rig, &s, u, v, true).unwrap();
            let oracle = traced_offset(&rig, &s, u, v);
            assert!((du.hypot(dv) - oracle).abs() < 1e-9, "{} vs {oracle}", du.hypot(dv));
        }
    }

    #[test]
    fn shift_grows_with_thickness() {
        let rig = CameraRig::new(64, 64, 60.0, 35.0, &PoseMeta::level(60.0));
        for (u, v) in [(5.5, 5.5), (60.5, 32.5)] {
            let thin = reflection_shift(&rig, &scenario(35.0, 8.0), u, v, true).unwrap();
            let thick = reflection_shift(&rig, &scenario(35.0, 20.0), u, v, true).unwrap();
            assert!(thick.0.hypot(thick.1) > thin.0.hypot(thin.1));
        }
    }

    #[test]
    fn refraction_shortens_the_shift() {
        let rig = CameraRig::new(64, 64, 60.0, 35.0, &PoseMeta::level(60.0));
        let s = scenario(35.0, 20.0);
        let bent = reflection_shift(&rig, &s, 60.5, 32.5, true).unwrap();
        let straight = reflection_shift(&rig, &s, 60.5, 32.5, false).unwrap();
        assert!(straight.0.hypot(straight.1) > bent.0.hypot(bent.1));
    }

    fn noise(seed: u64, w: usize, h: usize) -> LinearImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h * 3).map(|_| rand::Rng::random::<f32>(&mut rng)).collect();
        LinearImage::new(w, h, ColorSpace::Xyz, data).unwrap()
    }

    #[test]
    fn small_shifts_give_primary_only() {
        let s = scenario(20.0, 10.0);
        let pose = PoseMeta::level(60.0);
        let imap = incidence_map(&s, &pose, 48, 40, 4).unwrap();
        let alpha = imap.alpha(s.refractive_index);
        let r = noise(1, 48, 40);
        let config = SimulationConfig {
            min_ghost_shift_px: 1.0e9,
            ..Default::default()
        };
        let out = double_reflection(&r, &imap, &s, &alpha, &config).unwrap();
        for c in 0..3 {
            for (i, (o, v)) in out.image.plane(c).iter().zip(r.plane(c)).enumerate() {
                assert_eq!(*o, (alpha[i] * *v as f64) as f32);
            }
        }
        assert_eq!(out.max_shift_px, 0.0);

        let ghosted = double_reflection(&r, &imap, &s, &alpha, &SimulationConfig::default()).unwrap();
        assert!(ghosted.max_shift_px > 0.01);
        let (u, v) = imap.rig.glass_normal_pixel().unwrap();
        let (x, y) = (u.floor() as usize, v.floor() as usize);
        if x < 48 && y < 40 {
            let i = y * 48 + x;
            let shift = reflection_shift(&imap.rig, &s, x as f64 + 0.5, y as f64 + 0.5, true).unwrap();
            if shift.0.hypot(shift.1) < 0.01 {
                assert_eq!(ghosted.image.plane(0)[i], (alpha[i] * r.plane(0)[i] as f64) as f32);
            }
        }
    }

    proptest! {
        #[test]
        fn linear_in_image(seed in 0u64..200, k in -2.0f64..2.0, az in -40.0f64..40.0) {
            let s = scenario(az, 14.0);
            let imap = incidence_map(&s, &PoseMeta::level(60.0), 24, 20, 4).unwrap();
            let alpha = imap.alpha(s.refractive_index);
            let config = SimulationConfig::default();
            let (x, y) = (noise(seed, 24, 20), noise(seed + 1000, 24, 20));
            let lhs = double_reflection(&x.scale(k).add(&y).unwrap(), &imap, &s, &alpha, &config).unwrap().image;
            let gx = double_reflection(&x, &imap, &s, &alpha, &config).unwrap().image;
            let gy = double_reflection(&y, &imap, &s, &alpha, &config).unwrap().image;
            let rhs = gx.scale(k).add(&gy).unwrap();
            for (a, b) in lhs.data().iter().zip(rhs.data()) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }

        #[test]
        fn beta_closed_form(alpha in 0.0f64..1.0) {
            let expanded = alpha - 2.0 * alpha * alpha + alpha * alpha * alpha;
            prop_assert!((double_reflection_beta(alpha) - expanded).abs() < 1e-12);
        }
    }
}
