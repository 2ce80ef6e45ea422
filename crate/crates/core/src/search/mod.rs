//! Mixture search: decides whether a simulated mixture is well exposed and
//! well mixed enough to keep.

mod cull;
mod exposure;
mod ssim;

pub use cull::{cull, CullDecision, CullReason, CullThresholds};
pub use exposure::{well_exposed, CorpusStats};
pub use ssim::{channel_weights, ssim_weighted, SsimParams, SsimReport};

use serde::{Deserialize, Serialize};

/// Settings for the exposure gate and the SSIM acceptance band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub ssim: SsimParams,
    pub thresholds: CullThresholds,
    /// Width of the exposure gate in standard deviations.
    pub exposure_k: f64,
    /// Fewest corpus images from which exposure statistics are trusted.
    pub min_stats_images: usize,
    /// Precomputed statistics. When absent they are measured on the corpus.
    pub corpus_stats: Option<CorpusStats>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            ssim: SsimParams::default(),
            thresholds: CullThresholds::default(),
            exposure_k: 2.0,
            min_stats_images: 30,
            corpus_stats: None,
        }
    }
}
