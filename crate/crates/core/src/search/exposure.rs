use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::LinearImage;

/// Distribution of per-image mean pixel values over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusStats {
    pub mean: f64,
    pub sigma: f64,
    pub n: usize,
}

impl CorpusStats {
    /// Population mean and standard deviation of `image_means`.
    pub fn from_means(image_means: &[f64], min_images: usize) -> Result<Self> {
        if image_means.len() < min_images.max(1) {
            return Err(Error::DegenerateStats(format!(
                "{} images, need at least {min_images}",
                image_means.len()
            )));
        }
        let n = image_means.len() as f64;
        let mean = image_means.iter().sum::<f64>() / n;
        let var = image_means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let stats = CorpusStats {
            mean,
            sigma: var.sqrt(),
            n: image_means.len(),
        };
        stats.check()?;
        Ok(stats)
    }

    fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.mean.is_finite() || !self.sigma.is_finite() {
            return Err(Error::DegenerateStats(format!(
                "sigma {} over {} images",
                self.sigma, self.n
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::json("corpus stats", e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Inclusive normality gate: |mean(m) - mean| <= k * sigma.
pub fn well_exposed(m: &LinearImage, stats: &CorpusStats, k: f64) -> Result<bool> {
    stats.check()?;
    Ok((m.mean() - stats.mean).abs() <= k * stats.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;

    fn stats() -> CorpusStats {
        CorpusStats {
            mean: 0.25,
            sigma: 0.0625,
            n: 40,
        }
    }

    fn constant(v: f32) -> LinearImage {
        LinearImage::filled(4, 4, ColorSpace::LinearSrgb, [v; 3])
    }

    #[test]
    fn gate() {
        assert!(well_exposed(&constant(0.25), &stats(), 2.0).unwrap());
        assert!(!well_exposed(&constant(0.25 + 3.0 * 0.0625), &stats(), 2.0).unwrap());
        // 0.375 is exact in binary, so this is the boundary itself.
        assert!(well_exposed(&constant(0.375), &stats(), 2.0).unwrap());
        assert!(well_exposed(&constant(0.125), &stats(), 2.0).unwrap());
    }

    #[test]
    fn degenerate() {
        let flat = CorpusStats {
            sigma: 0.0,
            ..stats()
        };
        assert!(matches!(well_exposed(&constant(0.2), &flat, 2.0), Err(Error::DegenerateStats(_))));
        assert!(CorpusStats::from_means(&[0.25; 40], 30).is_err());
        assert!(CorpusStats::from_means(&[0.1, 0.2], 30).is_err());
    }

    #[test]
    fn from_means() {
        let values: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let s = CorpusStats::from_means(&values, 30).unwrap();
        assert_eq!(s.n, 30);
        assert!((s.mean - 14.5).abs() < 1e-12);
        assert!((s.sigma - (899.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stats.json");
        stats().save(&p).unwrap();
        assert_eq!(CorpusStats::load(&p).unwrap(), stats());
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"mean\"") && text.contains("\"sigma\"") && text.contains("\"n\""));
    }
}
