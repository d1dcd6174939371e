//! Seeded, gridded experiment execution.
//!
//! An [`ExperimentConfig`] names an experiment kind, a parameter map whose
//! list-valued entries span a grid, and a list of seeds. [`run_experiment`]
//! validates every grid cell up front, runs one job per `(cell, seed)` with
//! a sub-seed derived from the seed and the cell key, and emits one row per
//! job, sorted by cell and seed.

mod config;
mod datasets;
mod output;
mod params;
mod runner;

pub use config::{default_tail_grid, parse_seeds, ExperimentConfig, ExperimentKind, GridCell, OutputFormat, OutputSpec};
pub use datasets::{synthesize_dataset, Dataset, DatasetKind, DatasetSpec};
pub use output::{header_meta_line, Table};
pub use runner::{event_e_summary, run_experiment, EventSummary, ExperimentOutcome};
