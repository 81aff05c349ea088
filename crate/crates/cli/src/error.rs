use std::path::PathBuf;
use strong_taylor::coeff::CoeffError;
use strong_taylor::noise::NoiseError;
use strong_taylor::oracle::OracleError;
use strong_taylor::schemes::SchemeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 usage, 2 I/O, 3 unsupported request.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Oracle(OracleError::Invalid(_)) => 1,
            CliError::Io { .. } => 2,
            CliError::Coeff(CoeffError::Cache { .. }) => 2,
            CliError::Coeff(_) | CliError::Noise(NoiseError::Invalid(_)) => 1,
            CliError::Scheme(SchemeError::Invalid(_)) => 1,
            CliError::Unsupported(_) | CliError::Oracle(_) | CliError::Noise(_) | CliError::Scheme(_) => 3,
        }
    }
}
