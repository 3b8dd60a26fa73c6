//! Random scene generation, speech ingestion and dataset files.

pub mod generate;
pub mod grids;
pub mod ranges;
pub mod sample;
pub mod scene;
pub mod speech;

pub use generate::{gen_dataset, read_manifest, DatasetOptions, PartialFooter, MANIFEST_FILE};
pub use grids::Split;
pub use ranges::{Range, SceneRanges};
pub use sample::{
    build_sample, load_sample, write_sample, Sample, SceneManifestRecord, SourceRecord, StoredSample, TargetConfig,
    TARGET_AZIMUTH_DEG,
};
pub use scene::{derive_seed, sample_scene, SceneSpec, SourceSpec};
pub use speech::{ingest_speech, normalize_rms, synthetic_speech, Clip, SpeechCatalog, SpeechSource, MIN_LOUDNESS_DBFS, SOURCE_LEVEL_DBFS};
