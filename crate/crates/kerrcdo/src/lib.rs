//! Batch front end for `kerrcdo-core`: configuration, the input-state
//! mini-language, scenario drivers and CSV/JSON output.

pub mod config;
pub mod output;
pub mod run;
pub mod state;
pub mod value;

pub use config::{Job, RunConfig, Scenario};
pub use output::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] kerrcdo_core::Error),
    #[error("{0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Csv(String, #[source] csv::Error),
}

/// Process exit status for a failed run.
pub fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Config(_) => 2,
        _ => 1,
    }
}

/// Exit status when the run finished but a configured tolerance was missed.
pub const EXIT_TOLERANCE: u8 = 3;
