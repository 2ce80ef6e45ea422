use std::fmt;

use serde::{Deserialize, Serialize};

use super::ssim::SsimReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CullReason {
    #[serde(rename = "Keep")]
    None,
    OverUnderExposed,
    TooTransparent,
    TooDestroyed,
    LowVariance,
    WhiteShift,
    GeometryCull,
    AwbFailure,
}

impl CullReason {
    pub const ALL: [CullReason; 8] = [
        CullReason::None,
        CullReason::OverUnderExposed,
        CullReason::TooTransparent,
        CullReason::TooDestroyed,
        CullReason::LowVariance,
        CullReason::WhiteShift,
        CullReason::GeometryCull,
        CullReason::AwbFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CullReason::None => "Keep",
            CullReason::OverUnderExposed => "OverUnderExposed",
            CullReason::TooTransparent => "TooTransparent",
            CullReason::TooDestroyed => "TooDestroyed",
            CullReason::LowVariance => "LowVariance",
            CullReason::WhiteShift => "WhiteShift",
            CullReason::GeometryCull => "GeometryCull",
            CullReason::AwbFailure => "AwbFailure",
        }
    }
}

impl fmt::Display for CullReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CullDecision {
    pub keep: bool,
    pub reason: CullReason,
}

impl CullDecision {
    pub fn keep() -> Self {
        CullDecision {
            keep: true,
            reason: CullReason::None,
        }
    }

    pub fn reject(reason: CullReason) -> Self {
        debug_assert_ne!(reason, CullReason::None);
        CullDecision {
            keep: false,
            reason,
        }
    }
}

/// SSIM acceptance band for a mixture against its transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CullThresholds {
    pub min_mean_ssim: f64,
    pub max_mean_ssim: f64,
    pub min_std_ssim: f64,
}

impl Default for CullThresholds {
    fn default() -> Self {
        CullThresholds {
            min_mean_ssim: 0.4,
            max_mean_ssim: 0.94,
            min_std_ssim: 0.05,
        }
    }
}

/// Bounds are inclusive: a mean of exactly 0.4 or 0.94, or a std of exactly
/// 0.05, is kept.
pub fn cull(report: &SsimReport, exposed: bool, thresholds: &CullThresholds) -> CullDecision {
    if report.mean_ssim > thresholds.max_mean_ssim {
        CullDecision::reject(CullReason::TooTransparent)
    } else if report.mean_ssim < thresholds.min_mean_ssim {
        CullDecision::reject(CullReason::TooDestroyed)
    } else if report.std_ssim < thresholds.min_std_ssim {
        CullDecision::reject(CullReason::LowVariance)
    } else if !exposed {
        CullDecision::reject(CullReason::OverUnderExposed)
    } else {
        CullDecision::keep()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(mean: f64, std: f64) -> SsimReport {
        SsimReport::summary_only(mean, std)
    }

    #[test]
    fn thresholds() {
        let t = CullThresholds::default();
        assert_eq!(cull(&report(0.95, 0.2), true, &t).reason, CullReason::TooTransparent);
        assert_eq!(cull(&report(0.5, 0.1), true, &t), CullDecision::keep());
        assert_eq!(cull(&report(0.5, 0.01), true, &t).reason, CullReason::LowVariance);
        assert_eq!(cull(&report(0.3, 0.2), true, &t).reason, CullReason::TooDestroyed);
        assert_eq!(cull(&report(0.5, 0.2), false, &t).reason, CullReason::OverUnderExposed);
    }

    #[test]
    fn inclusive_boundaries() {
        let t = CullThresholds::default();
        assert!(cull(&report(0.4, 0.05), true, &t).keep);
        assert!(cull(&report(0.94, 0.05), true, &t).keep);
        assert!(!cull(&report(0.94f64.next_up(), 0.05), true, &t).keep);
        assert!(!cull(&report(0.4f64.next_down(), 0.05), true, &t).keep);
        assert!(!cull(&report(0.5, 0.05f64.next_down()), true, &t).keep);
    }

    #[test]
    fn keep_iff_no_reason() {
        let t = CullThresholds::default();
        for mean in [0.0, 0.39, 0.4, 0.7, 0.94, 0.95, 1.0] {
            for std in [0.0, 0.049, 0.05, 0.3] {
                for exposed in [false, true] {
                    let d = cull(&report(mean, std), exposed, &t);
                    assert_eq!(d.keep, d.reason == CullReason::None);
                    assert_eq!(d, cull(&report(mean, std), exposed, &t));
                }
            }
        }
    }

    #[test]
    fn reason_names() {
        assert_eq!(serde_json::to_string(&CullReason::None).unwrap(), "\"Keep\"");
        assert_eq!(
            serde_json::from_str::<CullReason>("\"TooTransparent\"").unwrap(),
            CullReason::TooTransparent
        );
        for r in CullReason::ALL {
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{r}\""));
        }
    }
}
