use std::path::PathBuf;

use crate::search::CullReason;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing sidecar {0}")]
    MissingSidecar(PathBuf),

    #[error("malformed sidecar {path}: {message}")]
    Sidecar { path: PathBuf, message: String },

    #[error("malformed raster {path}: {message}")]
    Raster { path: PathBuf, message: String },

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("negative sample {value} at index {index}")]
    NegativeSample { index: usize, value: f32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("wrong color space: expected {expected}, got {actual}")]
    WrongColorSpace {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("temperature {0} K outside [1667, 25000]")]
    TemperatureOutOfRange(f64),

    #[error("degenerate mixture: {0}")]
    DegenerateMixture(String),

    #[error("white balance estimate failed: {0}")]
    AwbFailure(String),

    #[error("white point shift of {0:.1} mired exceeds the limit")]
    WhiteShift(f64),

    #[error("glass does not fill FOV ({0} pixels miss the pane)")]
    GlassDoesNotFillFov(usize),

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("degenerate corpus statistics: {0}")]
    DegenerateStats(String),

    #[error("empty class: {0}")]
    EmptyClass(String),

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("png encoding failed: {0}")]
    Png(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Cull reason for errors that reject a candidate rather than abort a run.
    pub fn cull_reason(&self) -> Option<CullReason> {
        match self {
            Error::DegenerateMixture(_) => Some(CullReason::OverUnderExposed),
            Error::AwbFailure(_) => Some(CullReason::AwbFailure),
            Error::WhiteShift(_) => Some(CullReason::WhiteShift),
            Error::GlassDoesNotFillFov(_) => Some(CullReason::GeometryCull),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
