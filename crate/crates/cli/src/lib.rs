//! Config-driven front end for the boundary-triple laboratory: parses
//! sectioned key=value experiment configs, runs verification tasks against
//! [`spectriples_core`], and writes deterministic JSON reports with CSV
//! side files.

pub mod config;
pub mod report;
pub mod suite;
pub mod tasks;

pub use config::{
    load_config, parse_config, serialize, ConfigError, ExperimentConfig, KConfig,
    PotentialSpec, ProblemSpec, TaskName, TaskSpec, Tolerances, DEFAULT_SEED,
};
pub use report::{read_matrix_csv, write_matrix_csv, ReportRecord, ScalarValue, Verdict};
pub use suite::{resolve_workers, run_suite, SuiteOutcome, TaskOutcome, WORKERS_ENV};
pub use tasks::{run_task, TaskError};
