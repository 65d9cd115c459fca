//! Ensemble runner, analysis drivers and fixture generation behind the
//! `annealkz` binary.

pub mod analyze;
pub mod config;
pub mod fixtures;
pub mod runner;

pub use config::{ExperimentConfig, Job, Mode, ModelKind, VelocitySchedule, OUT_DIR_ENV};
pub use runner::{execute_job, load_records, run_ensemble, RunRecord, RunSummary, CODE_VERSION, RECORDS_FILE};
