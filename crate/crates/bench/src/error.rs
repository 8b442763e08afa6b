use dme_dc::DcError;
use thiserror::Error;

/// Failures surfaced by the command-line front end, each tied to an exit code.
#[derive(Clone, Debug, Error)]
pub enum CliError {
    /// Bad flags, config, instance file or solver/instance pairing.
    #[error("{0}")]
    Config(String),
    /// The solver failed at run time.
    #[error("solver error: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
        }
    }
}

impl From<DcError> for CliError {
    fn from(e: DcError) -> Self {
        match e {
            DcError::MaxIterExceeded { .. }
            | DcError::ConvergenceFailure { .. }
            | DcError::DualBoundViolated { .. }
            | DcError::PotentialBelowFloor { .. }
            | DcError::NotPositiveDefinite { .. }
            | DcError::SingularSystem(_) => Self::Solver(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Config(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Config(format!("json error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
