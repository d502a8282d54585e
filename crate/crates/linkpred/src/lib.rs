//! File formats, configuration, threaded drivers and end-to-end pipeline
//! for `linkpred-core`. The `linkpred` binary exposes each stage as a
//! subcommand.

pub mod config;
pub mod io;
pub mod parallel;
pub mod pipeline;

pub use config::PipelineConfig;
pub use pipeline::{run_pipeline, run_with_inputs, Inputs, PipelineError, Report};
