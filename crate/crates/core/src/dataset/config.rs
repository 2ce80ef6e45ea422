use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SimulationConfig;
use crate::photometric::PhotometricConfig;
use crate::search::SearchConfig;

/// Fractions of source images assigned to train, validation and test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.80,
            val: 0.15,
            test: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Side of the square output images.
    pub resolution: usize,
    pub scenarios_per_pair: usize,
    /// Also pair outdoor transmissions with outdoor reflections.
    pub include_outdoor_pairs: bool,
    /// Write images for culled candidates too.
    pub emit_culled: bool,
    pub splits: SplitFractions,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            resolution: 256,
            scenarios_per_pair: 2,
            include_outdoor_pairs: false,
            emit_culled: false,
            splits: SplitFractions::default(),
        }
    }
}

/// Everything that influences generated pixels, loadable from one JSON file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub simulation: SimulationConfig,
    pub photometric: PhotometricConfig,
    pub search: SearchConfig,
    pub dataset: DatasetConfig,
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.simulation.validate()?;
        let d = &self.dataset;
        if d.resolution < self.search.ssim.window {
            return Err(Error::InvalidArgument(format!(
                "resolution {} is smaller than the SSIM window",
                d.resolution
            )));
        }
        if d.scenarios_per_pair == 0 {
            return Err(Error::InvalidArgument("scenarios_per_pair must be positive".into()));
        }
        let s = d.splits;
        let parts = [s.train, s.val, s.test];
        if parts.iter().any(|v| !(*v >= 0.0)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("split fractions {s:?} must sum to 1")));
        }
        if !(self.search.exposure_k > 0.0) {
            return Err(Error::InvalidArgument("exposure_k must be positive".into()));
        }
        if !(self.photometric.max_white_shift_mired > 0.0) {
            return Err(Error::InvalidArgument("max_white_shift_mired must be positive".into()));
        }
        Ok(())
    }
}
