use std::path::Path;

use rayon::prelude::*;

use super::manifest::{DatasetManifest, ManifestRecord};
use crate::error::Result;
use crate::image::{read_image, ColorSpace, LinearImage};
use crate::search::{ssim_weighted, SearchConfig};

/// Largest relative violation of `m = t + r` tolerated on reload.
pub const ADDITIVITY_TOLERANCE: f64 = 1e-5;

/// Tolerance on recomputed SSIM statistics.
const SSIM_TOLERANCE: f64 = 1e-9;

/// `max |m - (t + r)| / max |m|` over all samples.
pub fn additivity_error(m: &LinearImage, t: &LinearImage, r: &LinearImage) -> Result<f64> {
    m.check_same_dims(t)?;
    m.check_same_dims(r)?;
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for ((mv, tv), rv) in m.data().iter().zip(t.data()).zip(r.data()) {
        worst = worst.max((*mv as f64 - (*tv as f64 + *rv as f64)).abs());
        peak = peak.max((*mv as f64).abs());
    }
    Ok(if peak > 0.0 { worst / peak } else { worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub records: usize,
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reloads every kept example of the manifest at `path` and re-checks
/// additivity, the shared white point and the SSIM acceptance band.
pub fn validate_manifest(path: impl AsRef<Path>, search: &SearchConfig) -> Result<ValidationReport> {
    let path = path.as_ref();
    let manifest = DatasetManifest::load(path)?;
    let root = path.parent().unwrap_or(Path::new(""));
    let mut report = ValidationReport {
        records: manifest.records.len(),
        ..Default::default()
    };
    if manifest.records.is_empty() {
        report.warnings.push(format!("{} has no records", path.display()));
        return Ok(report);
    }
    let kept: Vec<&ManifestRecord> = manifest.kept().collect();
    if kept.is_empty() {
        report.warnings.push("no kept examples".into());
    }
    report.checked = kept.len();
    report.violations = kept
        .par_iter()
        .flat_map_iter(|r| check_record(r, root, search).into_iter().map(|message| Violation { seed: r.seed, message }))
        .collect();
    Ok(report)
}

/// Problems found with one kept record, empty when it is sound.
pub fn check_record(record: &ManifestRecord, root: &Path, search: &SearchConfig) -> Vec<String> {
    let mut problems = Vec::new();
    let Some(paths) = &record.outputs else {
        return vec!["kept record lists no outputs".into()];
    };
    let mut images = Vec::new();
    for (name, rel) in paths.iter() {
        match read_image(root.join(rel)) {
            Ok(img) => images.push(img),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    if !problems.is_empty() {
        return problems;
    }
    let [m, t, r, c] = <[LinearImage; 4]>::try_from(images).expect("four images");
    for (name, img) in [("m", &m), ("t", &t), ("r", &r), ("c", &c)] {
        if img.color_space != ColorSpace::LinearSrgb {
            problems.push(format!("{name} is {}, expected linear_srgb", img.color_space.name()));
        }
        if img.white_xy != m.white_xy {
            problems.push(format!("{name} white point {:?} differs from m {:?}", img.white_xy, m.white_xy));
        }
        if img.dims() != m.dims() {
            problems.push(format!("{name} is {:?}, m is {:?}", img.dims(), m.dims()));
        }
    }
    if !problems.is_empty() {
        return problems;
    }
    match additivity_error(&m, &t, &r) {
        Ok(err) if err < ADDITIVITY_TOLERANCE => {}
        Ok(err) => problems.push(format!("m != t + r: relative error {err:.3e}")),
        Err(e) => problems.push(e.to_string()),
    }
    let Some(stats) = &record.stats else {
        problems.push("kept record has no statistics".into());
        return problems;
    };
    if m.white_xy.map(<[f64; 2]>::from) != Some(stats.white_xy_awb) {
        problems.push(format!("white point {:?} differs from recorded {:?}", m.white_xy, stats.white_xy_awb));
    }
    match ssim_weighted(&m, &t, &search.ssim) {
        Ok(rep) => {
            if (rep.mean_ssim - stats.mean_ssim).abs() > SSIM_TOLERANCE
                || (rep.std_ssim - stats.std_ssim).abs() > SSIM_TOLERANCE
            {
                problems.push(format!(
                    "SSIM {:.6}/{:.6} differs from recorded {:.6}/{:.6}",
                    rep.mean_ssim, rep.std_ssim, stats.mean_ssim, stats.std_ssim
                ));
            }
            let th = &search.thresholds;
            if !(th.min_mean_ssim..=th.max_mean_ssim).contains(&rep.mean_ssim) || rep.std_ssim < th.min_std_ssim {
                problems.push(format!(
                    "SSIM {:.6}/{:.6} outside the acceptance band",
                    rep.mean_ssim, rep.std_ssim
                ));
            }
        }
        Err(e) => problems.push(format!("SSIM: {e}")),
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additivity_examples() {
        let t = LinearImage::filled(4, 4, ColorSpace::LinearSrgb, [0.25, 0.5, 0.125]);
        let r = LinearImage::filled(4, 4, ColorSpace::LinearSrgb, [0.25, 0.0, 0.125]);
        let m = t.add(&r).unwrap();
        assert_eq!(additivity_error(&m, &t, &r).unwrap(), 0.0);
        let mut bad = m.clone();
        bad.set(1, 2, 2, 0.6);
        // |0.6 - 0.5| / 0.6
        assert!((additivity_error(&bad, &t, &r).unwrap() - 0.1 / 0.6).abs() < 1e-6);
    }

    #[test]
    fn empty_manifest_passes_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        std::fs::write(&path, "").unwrap();
        let report = validate_manifest(&path, &SearchConfig::default()).unwrap();
        assert!(report.passed());
        assert_eq!(report.warnings.len(), 1);
    }
}
