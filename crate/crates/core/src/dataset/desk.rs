//! A small procedural corpus for smoke tests and demonstrations: six raster
//! captures (one portrait, one with a clipped highlight, one tilted too far
//! to pair with the rest) and two panoramas, with two camera profiles.
//! Outdoor scenes are twenty times brighter than indoor ones.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::{Corpus, SourceEntry, SourceKind};
use crate::color::{temperature_to_xy, xyz_to_srgb_matrix, CameraProfile, Matrix3};
use crate::error::{Error, Result};
use crate::image::{write_image, ColorSpace, ExposureMeta, LinearImage, PoseMeta, SceneClass, CHANNELS};

/// Scene luminance of outdoor relative to indoor sources.
pub const OUTDOOR_BRIGHTNESS: f64 = 20.0;

/// Mean value of a capture after exposure.
const CAPTURE_MEAN: f64 = 0.2;

struct RasterSpec {
    id: &'static str,
    class: SceneClass,
    width: usize,
    height: usize,
    kelvin: f64,
    pose: PoseMeta,
    sun: bool,
    profile: usize,
}

fn pose(inclination_deg: f64, roll_deg: f64, vfov_deg: f64) -> PoseMeta {
    PoseMeta {
        inclination_deg,
        roll_deg,
        vfov_deg,
    }
}

fn rasters() -> [RasterSpec; 6] {
    use SceneClass::*;
    [
        RasterSpec { id: "street", class: Outdoor, width: 160, height: 96, kelvin: 6000.0, pose: pose(2.0, 1.0, 60.0), sun: false, profile: 0 },
        RasterSpec { id: "park", class: Outdoor, width: 176, height: 96, kelvin: 5600.0, pose: pose(-5.0, -2.0, 55.0), sun: true, profile: 1 },
        RasterSpec { id: "tower", class: Outdoor, width: 96, height: 160, kelvin: 6500.0, pose: pose(8.0, 0.0, 70.0), sun: false, profile: 0 },
        RasterSpec { id: "kitchen", class: Indoor, width: 160, height: 96, kelvin: 3800.0, pose: pose(0.0, 3.0, 62.0), sun: false, profile: 0 },
        RasterSpec { id: "library", class: Indoor, width: 160, height: 100, kelvin: 4200.0, pose: pose(6.0, -1.0, 58.0), sun: false, profile: 1 },
        RasterSpec { id: "stairwell", class: Indoor, width: 160, height: 96, kelvin: 4000.0, pose: pose(25.0, 2.0, 65.0), sun: false, profile: 0 },
    ]
}

#[rustfmt::skip]
fn profiles() -> Result<[CameraProfile; 2]> {
    Ok([
        CameraProfile::new(
            Matrix3::new(0.6722, -0.0635, -0.0963, -0.4287, 1.2460, 0.2028, -0.0908, 0.2162, 0.5668),
            Matrix3::new(0.6444, -0.0104, -0.0746, -0.5044, 1.2991, 0.1883, -0.1258, 0.2769, 0.5010),
            6504.0,
            2856.0,
        )?,
        CameraProfile::new(
            Matrix3::new(0.7188, -0.2153, -0.0296, -0.3947, 1.1856, 0.2364, -0.0510, 0.1623, 0.6215),
            Matrix3::new(0.7641, -0.2848, 0.0041, -0.3847, 1.1994, 0.2134, -0.0389, 0.1260, 0.7113),
            6504.0,
            2856.0,
        )?,
    ])
}

/// Soft-edged shapes over a gradient. `wrap` makes the pattern periodic in
/// x, as a panorama must be. Returns reflectance-like linear RGB planes.
fn texture(rng: &mut ChaCha8Rng, w: usize, h: usize, wrap: bool, sun: bool) -> Vec<[f64; CHANNELS]> {
    let color = |rng: &mut ChaCha8Rng| -> [f64; CHANNELS] { std::array::from_fn(|_| rng.random_range(0.03..0.9)) };
    let top = color(rng);
    let bottom = color(rng);
    let mut px: Vec<[f64; CHANNELS]> = (0..w * h)
        .map(|n| {
            let v = (n / w) as f64 / h as f64;
            std::array::from_fn(|c| top[c] * (1.0 - v) + bottom[c] * v)
        })
        .collect();
    let dx = |x: f64, cx: f64| {
        let d = x - cx;
        if wrap {
            d - (d / w as f64).round() * w as f64
        } else {
            d
        }
    };
    let smooth = |d: f64, soft: f64| 1.0 / (1.0 + (d / soft).exp());
    let scale = w.min(h) as f64;
    for _ in 0..14 {
        let (cx, cy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
        let (hw, hh) = (rng.random_range(0.04..0.3) * scale, rng.random_range(0.04..0.3) * scale);
        let round = rng.random_bool(0.4);
        let fill = color(rng);
        let soft = rng.random_range(0.3..2.0);
        for y in 0..h {
            for x in 0..w {
                let (ex, ey) = (dx(x as f64 + 0.5, cx), y as f64 + 0.5 - cy);
                let d = if round {
                    (ex / hw).hypot(ey / hh) * hw.min(hh) - hw.min(hh)
                } else {
                    (ex.abs() - hw).max(ey.abs() - hh)
                };
                let k = smooth(d, soft);
                let p = &mut px[y * w + x];
                for c in 0..CHANNELS {
                    p[c] = p[c] * (1.0 - k) + fill[c] * k;
                }
            }
        }
    }
    // A striped patch and fine grain give SSIM something to measure.
    let period = rng.random_range(3.0..9.0);
    let (gx, gy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
    let reach = 0.25 * scale;
    for y in 0..h {
        for x in 0..w {
            let (ex, ey) = (dx(x as f64 + 0.5, gx), y as f64 + 0.5 - gy);
            if ex.abs() < reach && ey.abs() < reach {
                let s = 0.75 + 0.25 * (2.0 * PI * (x as f64 + y as f64) / period).sin();
                px[y * w + x].iter_mut().for_each(|v| *v *= s);
            }
            let grain = 1.0 + rng.random_range(-0.04..0.04);
            px[y * w + x].iter_mut().for_each(|v| *v *= grain);
        }
    }
    if sun {
        let (cx, cy, rad) = (0.8 * w as f64, 0.2 * h as f64, 0.06 * scale);
        for y in 0..h {
            for x in 0..w {
                if (x as f64 + 0.5 - cx).hypot(y as f64 + 0.5 - cy) < rad {
                    px[y * w + x] = [40.0; CHANNELS];
                }
            }
        }
    }
    px
}

/// XYZ image of a scene lit by an illuminant at `kelvin`, scaled by `gain`.
fn to_xyz(px: &[[f64; CHANNELS]], w: usize, h: usize, kelvin: f64, gain: f64) -> Result<LinearImage> {
    let white = temperature_to_xy(kelvin)?;
    let to_xyz = xyz_to_srgb_matrix(white)
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular sRGB matrix".into()))?;
    let mut img = LinearImage::from_fn(w, h, ColorSpace::Xyz, |c, x, y| {
        let p = px[y * w + x];
        let v = (0..CHANNELS).map(|k| to_xyz[(c, k)] * p[k]).sum::<f64>() * gain;
        v.max(0.0) as f32
    });
    img.white_xy = Some(white);
    Ok(img)
}

/// Writes the corpus under `dir` and returns the path of its corpus file.
pub fn write_desk_corpus(dir: &Path, seed: u64) -> Result<PathBuf> {
    let images = dir.join("images");
    std::fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let profile_paths = ["profiles/camera_a.json", "profiles/camera_b.json"];
    std::fs::create_dir_all(dir.join("profiles")).map_err(|e| Error::io(dir.join("profiles"), e))?;
    for (p, path) in profiles()?.iter().zip(profile_paths) {
        let text = serde_json::to_string_pretty(p).map_err(|e| Error::json("camera profile", e))?;
        std::fs::write(dir.join(path), text + "\n").map_err(|e| Error::io(dir.join(path), e))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for raster in rasters() {
        let px = texture(&mut rng, raster.width, raster.height, false, raster.sun);
        let brightness = match raster.class {
            SceneClass::Outdoor => OUTDOOR_BRIGHTNESS,
            SceneClass::Indoor => 1.0,
        };
        let scene = to_xyz(&px, raster.width, raster.height, raster.kelvin, brightness)?;
        // Expose so the capture averages CAPTURE_MEAN, ignoring any highlight.
        let clipped_mean = px.iter().flat_map(|p| p.iter().map(|v| v.min(1.0))).sum::<f64>() / (3 * px.len()) as f64;
        let e = CAPTURE_MEAN / (brightness * clipped_mean);
        let exposure = ExposureMeta::new(e * 4.0 / 100.0, 100.0, 2.0)?;
        let mut capture = scene.scale(exposure.exposure());
        let clipped: Vec<f32> = capture.data().iter().map(|v| v.min(1.0)).collect();
        capture = capture.with_data(clipped);
        capture.saturation_level = [1.0; CHANNELS];
        capture.exposure = Some(exposure);
        capture.pose = Some(raster.pose);
        capture.scene_class = Some(raster.class);
        let rel = PathBuf::from("images").join(format!("{}.lrim", raster.id));
        write_image(&capture, dir.join(&rel))?;
        entries.push(SourceEntry {
            id: raster.id.into(),
            path: rel,
            scene_class: raster.class,
            kind: SourceKind::Raster,
            pose: Some(raster.pose),
            exposure: Some(exposure),
            camera_profile: profile_paths[raster.profile].into(),
        });
    }
    for (id, class, kelvin) in [("plaza_360", SceneClass::Outdoor, 6200.0), ("hall_360", SceneClass::Indoor, 4000.0)] {
        let (w, h) = (1024, 512);
        let px = texture(&mut rng, w, h, true, false);
        let mut pano = to_xyz(&px, w, h, kelvin, 1.0)?;
        pano.saturation_level = [f32::INFINITY; CHANNELS];
        pano.scene_class = Some(class);
        let rel = PathBuf::from("images").join(format!("{id}.lrim"));
        write_image(&pano, dir.join(&rel))?;
        entries.push(SourceEntry {
            id: id.into(),
            path: rel,
            scene_class: class,
            kind: SourceKind::IblPanorama,
            pose: None,
            exposure: None,
            camera_profile: profile_paths[0].into(),
        });
    }
    let corpus = Corpus {
        root: dir.to_path_buf(),
        entries,
    };
    corpus.validate()?;
    let path = dir.join("corpus.jsonl");
    corpus.save(&path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LoadedCorpus;

    #[test]
    fn writes_a_loadable_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_desk_corpus(dir.path(), 1).unwrap();
        let corpus = Corpus::load(&path).unwrap();
        assert_eq!(corpus.entries.len(), 8);
        let loaded = LoadedCorpus::load(&corpus).unwrap();
        let mean_of = |id: &str| loaded.sources[loaded.index_of(id).unwrap()].image.mean();
        // Unexposed outdoor scenes are much brighter than indoor ones.
        assert!(mean_of("street") > 10.0 * mean_of("kitchen"));
        let park = &loaded.sources[loaded.index_of("park").unwrap()];
        assert!(park.image.is_saturated());
        assert!(loaded.ibl_reference_median.unwrap() > 0.0);
    }

    #[test]
    fn same_seed_same_bytes() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_desk_corpus(a.path(), 4).unwrap();
        write_desk_corpus(b.path(), 4).unwrap();
        for name in ["images/street.lrim", "images/hall_360.lrim", "corpus.jsonl"] {
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
    }
}
