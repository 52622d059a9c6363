//! Command-line experiments for `H = -Δ + α F(κ)` on flat circles and tori.
//!
//! Wraps [`mineig_core`] with a plain-text config format ([`config`]),
//! tabulated inputs ([`table`]), deterministic CSV / JSON emission
//! ([`output`]) and one runner per subcommand ([`commands`]).

pub mod commands;
pub mod config;
pub mod output;
pub mod random;
pub mod table;

pub use commands::{execute, write_report, Command, Report};
pub use config::RunConfig;

/// Failures surfaced to the command line, each with its exit status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for validation, 3 for numerical failure, 1 for output errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<mineig_core::Error> for CliError {
    fn from(e: mineig_core::Error) -> Self {
        use mineig_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::UndefinedCriticalCoupling { .. } => CliError::Validation(e.to_string()),
            E::NumericalFailure { .. } | E::Degeneracy { .. } | E::LineSearchFailure { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
