//! Dataset generation: pairing source images, cropping, running the
//! simulate, capture and cull stages for every attempt, and persisting the
//! results as a JSON-lines manifest that can be replayed seed by seed.

mod config;
mod corpus;
mod crops;
mod desk;
mod manifest;
mod pairs;
mod pipeline;
mod seed;
mod split;
mod validate;

pub use config::{DatasetConfig, PipelineConfig, SplitFractions};
pub use corpus::{Corpus, LoadedCorpus, LoadedSource, SourceEntry, SourceKind};
pub use crops::{crop_square, crop_vfov_deg, make_context_crops, split_squares, ContextCrops, Square};
pub use desk::{write_desk_corpus, OUTDOOR_BRIGHTNESS};
pub use manifest::{DatasetManifest, Decision, ManifestRecord, ManifestWriter, OutputPaths, RecordStats};
pub use pairs::{both_panoramas, build_pairs, PairSpec};
pub use pipeline::{
    Attempt, AttemptOutcome, Pipeline, Rejection, SimulatedExample, MANIFEST_FILE, RASTER_EXTENSION,
};
pub use seed::{example_seed, hash_u64};
pub use split::{example_split, source_split, Split};
pub use validate::{additivity_error, check_record, validate_manifest, ValidationReport, Violation, ADDITIVITY_TOLERANCE};
