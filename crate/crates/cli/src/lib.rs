//! Configuration, scan orchestration and report emission for `bose2d`.

pub mod config;
pub mod report;
pub mod tasks;
pub mod trend;

pub use config::{parse_config, parse_str, validate, RunConfig, TaskKind};
pub use report::{emit_report, Report};
pub use tasks::run_task;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Exit status for a finished run.
pub fn exit_code(report: &Report) -> i32 {
    if report.all_points_ok() && report.all_verdicts_pass() {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}
