//! Library half of the `chemrep` binary: configuration, single runs,
//! parameter sweeps and VTK output.

pub mod config;
pub mod run;
pub mod sweep;
pub mod vtk;

use std::path::PathBuf;

pub use config::RunConfig;
pub use run::{execute, RunSummary};
pub use sweep::{sweep, SweepAxes};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_BAD_CONFIG: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("step {step} failed: {source}")]
    Step { step: usize, source: chemrep_core::Error },
    #[error("non-finite diagnostics at step {step}")]
    NonFinite { step: usize },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{failed} verification criteria failed")]
    Verify { failed: usize },
    #[error("{failed} of {total} sweep runs failed")]
    Sweep { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify { .. } => EXIT_VERIFY,
            CliError::Step { .. } | CliError::NonFinite { .. } | CliError::Sweep { .. } => EXIT_NOT_CONVERGED,
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv(_) => EXIT_BAD_CONFIG,
        }
    }
}
