//! Experiment configuration, seeded trials, sweeps and scaling fits.

mod config;
mod fit;
mod sweep;
mod trial;

pub use config::{noise_label, space_label, Cell, ExperimentConfig, LearnerSpec, PolicySpec, SweepAxes, SCHEMA_VERSION};
pub use fit::{fit_groups, fit_rows, fit_scaling, ols, FitAxis, ScalingFit};
pub use sweep::{config_hash, median, read_rows, resume_path, run_cell, summarize, sweep, CellSummary, CsvRow};
pub use trial::{run_trial, trial_seed, CellRunner, TrialRecord, DEFAULT_STREAM};
