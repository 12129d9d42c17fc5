//! Config-driven sweeps over `(kind, n, p)` for the `ncmart` estimators:
//! deterministic runs, CSV/JSON/plot reports, growth fits and witness replay.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{load_config, ExperimentConfig, Method, Overrides};
pub use error::{LabError, Result};
pub use report::{emit_report, fit_rows, FitSummary, ReportFormat, ResultRow};
pub use runner::{run_and_report, run_experiment, RunOptions};
pub use verify::{verify_results, VerifyReport};
