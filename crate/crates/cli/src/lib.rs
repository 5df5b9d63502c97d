//! Data ingestion, configuration, experiment drivers and artifact writers
//! for the `cytolot` command-line tool.

pub mod config;
pub mod manifest;
pub mod matrix_io;
pub mod pipeline;
pub mod plot;

pub use config::RunConfig;
pub use manifest::{load_samples, LoadedSamples, SampleManifest};
pub use pipeline::{compare_methods, run_pipeline, sweep_k};
