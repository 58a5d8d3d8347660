use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] diffusivity_core::Error),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("oracle check failed: {0}")]
    Oracle(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        use diffusivity_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::DataInconsistent { .. }) => 3,
            CliError::Core(E::NotConverged { .. }) => 4,
            CliError::Core(E::OracleFailure(_)) | CliError::Oracle(_) => 5,
            _ => 1,
        }
    }

    /// Short category printed as `error[<category>]: ...`.
    pub fn category(&self) -> &'static str {
        use diffusivity_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Core(E::DataInconsistent { .. }) => "data-inconsistent",
            CliError::Core(E::NotConverged { .. }) => "not-converged",
            CliError::Core(E::OracleFailure(_)) | CliError::Oracle(_) => "oracle-failure",
            CliError::Core(E::AssumptionViolated(_)) => "assumption",
            CliError::Core(E::Coefficient(_)) => "coefficient",
            CliError::Core(_) => "model",
            CliError::Input { .. } => "input",
            CliError::Io { .. } => "io",
        }
    }
}
