use std::path::PathBuf;

use charge_sphere::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::Core(CoreError::UnsupportedTopology { .. }) => 2,
            CliError::Core(
                CoreError::NoConvergence { .. }
                | CoreError::InvalidResult(_)
                | CoreError::RoundTrip(_)
                | CoreError::RegionsOverlap { .. },
            ) => 3,
            CliError::Core(CoreError::InvalidMap(_)) => 4,
            CliError::ChecksFailed { .. } => 5,
            _ => 1,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            CliError::MissingInput(_) => "missing_input",
            CliError::Io { .. } => "io",
            CliError::Argument(_) => "argument",
            CliError::Core(e) => core_kind(e),
            CliError::ChecksFailed { .. } => "checks_failed",
        };
        serde_json::json!({ "error": kind, "message": self.to_string(), "exit_code": self.exit_code() })
    }
}

fn core_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::UnsupportedTopology { .. } => "unsupported_topology",
        CoreError::NoConvergence { .. } => "no_convergence",
        CoreError::InvalidResult(_) => "invalid_result",
        CoreError::RoundTrip(_) => "round_trip",
        CoreError::RegionsOverlap { .. } => "regions_overlap",
        CoreError::InvalidMap(_) => "invalid_map",
        CoreError::InvalidConfig(_) | CoreError::InvalidIntensity(_) | CoreError::NotOnSphere { .. } => {
            "invalid_config"
        }
        CoreError::Json(_) => "invalid_json",
        _ => "numerical",
    }
}
