//! Raster container: magic `LRIM`, u32 width, u32 height, u32 channels, then
//! planar little-endian f32 samples. Metadata lives in a JSON sidecar next to
//! the raster (same stem, `.json` extension).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ColorSpace, ExposureMeta, LinearImage, PoseMeta, SceneClass, CHANNELS};
use crate::color::XyCoord;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LRIM";
const HEADER_LEN: usize = 16;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    width: u32,
    height: u32,
    color_space: ColorSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    white_xy: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exposure: Option<ExposureMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pose: Option<PoseMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scene_class: Option<SceneClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera_profile: Option<String>,
}

pub fn sidecar_path(raster: &Path) -> PathBuf {
    raster.with_extension("json")
}

pub fn read_image(path: impl AsRef<Path>) -> Result<LinearImage> {
    let path = path.as_ref();
    let side_path = sidecar_path(path);
    if !side_path.is_file() {
        return Err(Error::MissingSidecar(side_path));
    }
    let side_text = fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
    let side: Sidecar = serde_json::from_str(&side_text).map_err(|e| Error::Sidecar {
        path: side_path.clone(),
        message: e.to_string(),
    })?;

    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let raster_err = |message: String| Error::Raster {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(raster_err("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (width, height, channels) = (word(0), word(1), word(2));
    if channels as usize != CHANNELS {
        return Err(raster_err(format!("expected 3 channels, found {channels}")));
    }
    if width != side.width || height != side.height {
        return Err(Error::DimensionMismatch(format!(
            "raster is {width}x{height} but sidecar says {}x{}",
            side.width, side.height
        )));
    }
    let count = width as usize * height as usize * CHANNELS;
    if bytes.len() != HEADER_LEN + 4 * count {
        return Err(raster_err(format!(
            "expected {} payload bytes, found {}",
            4 * count,
            bytes.len() - HEADER_LEN
        )));
    }
    let data: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();

    // Derived linear-sRGB rasters may hold out-of-gamut negatives; captures may not.
    if side.color_space != ColorSpace::LinearSrgb {
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeSample { index, value });
        }
    }

    let mut img = LinearImage::new(width as usize, height as usize, side.color_space, data)?;
    img.white_xy = side
        .white_xy
        .map(|[x, y]| XyCoord::new(x, y))
        .transpose()
        .map_err(|e| Error::Sidecar {
            path: side_path.clone(),
            message: e.to_string(),
        })?;
    img.exposure = side.exposure;
    img.pose = side.pose;
    img.scene_class = side.scene_class;
    img.camera_profile = side.camera_profile;
    img.validate().map_err(|e| Error::Sidecar {
        path: side_path,
        message: e.to_string(),
    })?;
    Ok(img)
}

pub fn write_image(img: &LinearImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    img.validate()?;
    let side = Sidecar {
        width: img.width() as u32,
        height: img.height() as u32,
        color_space: img.color_space,
        white_xy: img.white_xy.map(|w| [w.x, w.y]),
        exposure: img.exposure,
        pose: img.pose,
        scene_class: img.scene_class,
        camera_profile: img.camera_profile.clone(),
    };
    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * img.data().len());
    bytes.extend_from_slice(MAGIC);
    for word in [img.width() as u32, img.height() as u32, CHANNELS as u32] {
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    for v in img.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut text = serde_json::to_string_pretty(&side).map_err(|e| Error::json("sidecar", e))?;
    text.push('\n');

    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side_path = sidecar_path(path);
    fs::write(&side_path, text).map_err(|e| Error::io(&side_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant_xyz() -> LinearImage {
        let mut img = LinearImage::filled(2, 2, ColorSpace::Xyz, [0.5; 3]);
        img.white_xy = Some(XyCoord::new(1.0 / 3.0, 1.0 / 3.0).unwrap());
        img
    }

    #[test]
    fn constant_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lrim");
        write_image(&constant_xyz(), &path).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.data().len(), 12);
        assert!(back.data().iter().all(|&v| v == 0.5));
        let w = back.white_xy.unwrap();
        assert_eq!((w.x, w.y), (1.0 / 3.0, 1.0 / 3.0));
    }

    #[test]
    fn zeros_and_absent_white() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.lrim");
        write_image(&LinearImage::zeros(3, 1, ColorSpace::LinearSrgb), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes[HEADER_LEN..].iter().all(|&b| b == 0));
        let side = fs::read_to_string(sidecar_path(&path)).unwrap();
        assert!(!side.contains("white_xy"));
        assert!(side.contains("\"color_space\": \"linear_srgb\""));
    }

    #[test]
    fn missing_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lrim");
        write_image(&constant_xyz(), &path).unwrap();
        fs::remove_file(sidecar_path(&path)).unwrap();
        assert!(matches!(read_image(&path), Err(Error::MissingSidecar(_))));
    }

    fn corrupt_sample(path: &Path, index: usize, value: f32) {
        let mut bytes = fs::read(path).unwrap();
        let at = HEADER_LEN + 4 * index;
        bytes[at..at + 4].copy_from_slice(&value.to_le_bytes());
        fs::write(path, bytes).unwrap();
    }

    #[test]
    fn nan_sample_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lrim");
        write_image(&constant_xyz(), &path).unwrap();
        corrupt_sample(&path, 5, f32::NAN);
        let err = read_image(&path).unwrap_err();
        assert!(err.to_string().contains("non-finite sample"), "{err}");
    }

    #[test]
    fn negative_sample_rejected_for_captures() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lrim");
        write_image(&constant_xyz(), &path).unwrap();
        corrupt_sample(&path, 3, -0.01);
        assert!(matches!(read_image(&path), Err(Error::NegativeSample { index: 3, .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lrim");
        write_image(&constant_xyz(), &path).unwrap();
        let side = fs::read_to_string(sidecar_path(&path)).unwrap();
        fs::write(sidecar_path(&path), side.replace("\"width\": 2", "\"width\": 3")).unwrap();
        assert!(matches!(read_image(&path), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = write_image(&constant_xyz(), blocker.join("a.lrim")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn arb_image() -> impl Strategy<Value = LinearImage> {
        (1usize..6, 1usize..6, 0usize..3, any::<bool>(), any::<bool>(), any::<u64>()).prop_flat_map(
            |(w, h, space, with_white, with_meta, tag)| {
                prop::collection::vec(0.0f32..1e4, w * h * 3).prop_map(move |data| {
                    let space = [ColorSpace::Xyz, ColorSpace::LinearSrgb, ColorSpace::CameraNative][space];
                    let mut img = LinearImage::new(w, h, space, data).unwrap();
                    if space == ColorSpace::CameraNative {
                        img.camera_profile = Some(format!("cam-{tag}"));
                    }
                    if with_white {
                        img.white_xy = Some(XyCoord::new(0.3127, 0.3290).unwrap());
                    }
                    if with_meta {
                        img.exposure = Some(ExposureMeta::new(1.0 / 60.0, 400.0, 1.8).unwrap());
                        img.pose = Some(PoseMeta {
                            inclination_deg: -3.5,
                            roll_deg: 1.25,
                            vfov_deg: 61.0,
                        });
                        img.scene_class = Some(if tag % 2 == 0 {
                            SceneClass::Indoor
                        } else {
                            SceneClass::Outdoor
                        });
                    }
                    img
                })
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn read_write_round_trip(img in arb_image()) {
            let dir = tempfile::tempdir().unwrap();
            let first = dir.path().join("a.lrim");
            let second = dir.path().join("b.lrim");
            write_image(&img, &first).unwrap();
            let back = read_image(&first).unwrap();
            prop_assert_eq!(&back, &img);
            write_image(&back, &second).unwrap();
            prop_assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
            prop_assert_eq!(
                fs::read(sidecar_path(&first)).unwrap(),
                fs::read(sidecar_path(&second)).unwrap()
            );
        }
    }
}
