//! File formats, configuration and command-line driver for `qwalk-core`.
//!
//! The `qwalk` binary reads a TOML experiment description, runs it and writes
//! labelled CSV matrices, a JSON result document, optional graymap heatmaps and a
//! timestamped sidecar log into an output directory.

pub mod config;
pub mod driver;
pub mod output;

pub use config::{ConfigError, LoadedConfig};
pub use driver::{exit_code, optimize_parallel, run, RunOptions, RunReport, Verb};
