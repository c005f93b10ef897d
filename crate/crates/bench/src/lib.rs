//! Benchmark harness around `advfid-core`: manifest ingestion, cached
//! pair-parallel scoring, subjective-data processing and report emission.

pub mod cache;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod score;

pub use commands::{
    cmd_bench, cmd_descriptors, cmd_fit, cmd_mos, cmd_score, BenchRun, DescriptorRun, FitRun,
    MosRun,
};
pub use config::{ConfigError, RunConfig};
pub use manifest::{
    load_manifest, Attack, ImageCheck, Manifest, ManifestError, ParamValue, StimulusPair,
};
pub use score::{score_manifest, RunError, ScoreRun};
