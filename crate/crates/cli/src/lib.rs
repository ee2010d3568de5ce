//! Experiment runner: configuration files, seeded runs over a worker pool,
//! trace and summary files, and plot-data export.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod runner;
pub mod summary;
pub mod trace;

pub use config::{ExperimentConfig, Method};
pub use runner::{run, run_seed, RunReport};
pub use summary::{aggregate, aggregate_dir, Summary};
