//! Configuration, artifact formats and runners behind the `kpsim` binary.
//!
//! A run resolves an [`ExperimentConfig`], integrates the spectral system,
//! and writes three artifacts: a time series of every functional and moment,
//! a report with one verdict line per check, and a manifest holding the
//! fully resolved configuration (parsing it back reproduces the run).

// `!(x > y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod initial;
pub mod output;
pub mod quadform_cmd;
pub mod run;

pub use config::{Check, ExperimentConfig, SweepConfig};
pub use error::{ConfigError, RunError};
pub use quadform_cmd::{verify_quadform_cmd, QuadformConfig};
pub use run::{
    report_from_files, run_experiment, run_in_memory, run_sweep, simulate, RunStatus, Verdict, VerdictStatus,
};
