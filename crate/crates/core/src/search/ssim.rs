//! Windowed SSIM between a mixture and its transmission, computed on
//! gamma-encoded linear sRGB and collapsed to one channel with weights taken
//! from the mixture's per-channel means.

use serde::{Deserialize, Serialize};

use crate::color::encode_srgb;
use crate::error::{Error, Result};
use crate::image::{ColorSpace, LinearImage, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    fn kernel(&self) -> Vec<f64> {
        let half = (self.window as f64 - 1.0) / 2.0;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| (-(i as f64 - half).powi(2) / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsimReport {
    pub mean_ssim: f64,
    pub std_ssim: f64,
    pub width: usize,
    pub height: usize,
    /// Row-major combined SSIM map over the valid window positions.
    pub ssim_map: Vec<f64>,
}

impl SsimReport {
    fn from_map(width: usize, height: usize, ssim_map: Vec<f64>) -> Self {
        let n = ssim_map.len() as f64;
        let mean = ssim_map.iter().sum::<f64>() / n;
        let var = ssim_map.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        SsimReport {
            mean_ssim: mean,
            std_ssim: var.sqrt(),
            width,
            height,
            ssim_map,
        }
    }

    /// A report with summary statistics and no map, for exercising the
    /// cull rule directly.
    pub fn summary_only(mean_ssim: f64, std_ssim: f64) -> Self {
        SsimReport {
            mean_ssim,
            std_ssim,
            width: 0,
            height: 0,
            ssim_map: Vec::new(),
        }
    }
}

/// Valid-mode separable filtering of a row-major plane.
fn filter_valid(plane: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let (ow, oh) = (width + 1 - k, height + 1 - k);
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let src = &plane[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = kernel.iter().zip(&src[x..x + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(j, w)| w * rows[(y + j) * ow + x])
                .sum();
        }
    }
    out
}

fn encoded_plane(img: &LinearImage, c: usize) -> Vec<f64> {
    img.plane(c)
        .iter()
        .map(|&v| encode_srgb((v as f64).clamp(0.0, 1.0)))
        .collect()
}

/// Per-channel SSIM map between two single planes (already encoded).
fn channel_map(a: &[f64], b: &[f64], width: usize, height: usize, params: &SsimParams) -> Vec<f64> {
    let kernel = params.kernel();
    let (c1, c2) = (params.c1(), params.c2());
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(a, width, height, &kernel);
    let mu_b = filter_valid(b, width, height, &kernel);
    let e_aa = filter_valid(&aa, width, height, &kernel);
    let e_bb = filter_valid(&bb, width, height, &kernel);
    let e_ab = filter_valid(&ab, width, height, &kernel);
    (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .collect()
}

/// Channel weights: per-channel means of the linear mixture, clamped at zero
/// and normalized to sum to one. Falls back to equal weights for black input.
pub fn channel_weights(m: &LinearImage) -> [f64; CHANNELS] {
    let means = m.channel_means().map(|v| v.max(0.0));
    let total: f64 = means.iter().sum();
    if total > 0.0 {
        means.map(|v| v / total)
    } else {
        [1.0 / CHANNELS as f64; CHANNELS]
    }
}

pub fn ssim_weighted(m: &LinearImage, t: &LinearImage, params: &SsimParams) -> Result<SsimReport> {
    m.check_same_dims(t)?;
    for img in [m, t] {
        if img.color_space != ColorSpace::LinearSrgb {
            return Err(Error::WrongColorSpace {
                expected: ColorSpace::LinearSrgb.name(),
                actual: img.color_space.name(),
            });
        }
    }
    let (w, h) = m.dims();
    if w < params.window || h < params.window {
        return Err(Error::ImageTooSmall(format!(
            "{w}x{h} is smaller than the {0}x{0} SSIM window",
            params.window
        )));
    }
    let weights = channel_weights(m);
    let (ow, oh) = (w + 1 - params.window, h + 1 - params.window);
    let mut combined = vec![0.0; ow * oh];
    for (c, weight) in weights.iter().enumerate() {
        if *weight == 0.0 {
            continue;
        }
        let map = channel_map(&encoded_plane(m, c), &encoded_plane(t, c), w, h, params);
        for (acc, v) in combined.iter_mut().zip(map) {
            *acc += weight * v;
        }
    }
    Ok(SsimReport::from_map(ow, oh, combined))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(seed: usize) -> LinearImage {
        LinearImage::from_fn(32, 24, ColorSpace::LinearSrgb, |c, x, y| {
            (((x * 7 + y * 13 + c * 5 + seed) % 17) as f32) / 20.0 + 0.05
        })
    }

    #[test]
    fn identical_inputs() {
        let img = textured(0);
        let r = ssim_weighted(&img, &img, &SsimParams::default()).unwrap();
        assert!((r.mean_ssim - 1.0).abs() < 1e-12);
        assert!(r.std_ssim < 1e-9);
        assert_eq!((r.width, r.height), (22, 14));
    }

    #[test]
    fn constants_reduce_to_luminance_term() {
        let m = LinearImage::filled(16, 16, ColorSpace::LinearSrgb, [0.5; 3]);
        let t = LinearImage::filled(16, 16, ColorSpace::LinearSrgb, [0.25; 3]);
        let r = ssim_weighted(&m, &t, &SsimParams::default()).unwrap();
        let a = 1.055 * 0.5f64.powf(1.0 / 2.4) - 0.055;
        let b = 1.055 * 0.25f64.powf(1.0 / 2.4) - 0.055;
        let c1 = 0.01f64.powi(2);
        let expected = (2.0 * a * b + c1) / (a * a + b * b + c1);
        assert!((r.mean_ssim - expected).abs() < 1e-9, "{} vs {expected}", r.mean_ssim);
    }

    #[test]
    fn duplicated_channel_matches_single_channel() {
        let base_m = textured(3);
        let base_t = textured(9);
        let copy = |img: &LinearImage| {
            let p = img.plane(1).to_vec();
            LinearImage::from_fn(img.width(), img.height(), ColorSpace::LinearSrgb, |_, x, y| {
                p[y * img.width() + x]
            })
        };
        let (m, t) = (copy(&base_m), copy(&base_t));
        let r = ssim_weighted(&m, &t, &SsimParams::default()).unwrap();
        let enc = |img: &LinearImage| encoded_plane(img, 1);
        let single = channel_map(&enc(&m), &enc(&t), 32, 24, &SsimParams::default());
        for (a, b) in r.ssim_map.iter().zip(&single) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn report_stats_match_map() {
        let r = ssim_weighted(&textured(1), &textured(4), &SsimParams::default()).unwrap();
        let n = r.ssim_map.len() as f64;
        let mean = r.ssim_map.iter().sum::<f64>() / n;
        let std = (r.ssim_map.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((mean - r.mean_ssim).abs() < 1e-9 && (std - r.std_ssim).abs() < 1e-9);
        assert!(r.mean_ssim < 1.0 && r.mean_ssim > -1.0);
    }

    #[test]
    fn weights() {
        let m = LinearImage::filled(2, 2, ColorSpace::LinearSrgb, [0.2, 0.6, 0.2]);
        let w = channel_weights(&m);
        for (a, b) in w.iter().zip([0.2, 0.6, 0.2]) {
            assert!((a - b).abs() < 1e-7);
        }
        let black = LinearImage::zeros(2, 2, ColorSpace::LinearSrgb);
        assert_eq!(channel_weights(&black), [1.0 / 3.0; 3]);
    }

    #[test]
    fn errors() {
        let a = textured(0);
        let b = LinearImage::zeros(31, 24, ColorSpace::LinearSrgb);
        assert!(matches!(ssim_weighted(&a, &b, &SsimParams::default()), Err(Error::DimensionMismatch(_))));
        let small = LinearImage::zeros(8, 8, ColorSpace::LinearSrgb);
        assert!(matches!(ssim_weighted(&small, &small, &SsimParams::default()), Err(Error::ImageTooSmall(_))));
        let xyz = LinearImage::zeros(32, 24, ColorSpace::Xyz);
        assert!(ssim_weighted(&xyz, &a, &SsimParams::default()).is_err());
    }
}
