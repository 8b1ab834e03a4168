use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] hamflow_core::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 configuration or I/O, 3 missing capability,
    /// 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use hamflow_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Json { .. } | CliError::Csv(_) => 2,
            CliError::Core(E::Parameter(_)) => 2,
            CliError::Core(E::Capability(_) | E::Inconsistent(_) | E::NotReparametrizable(_)) => 3,
            CliError::Core(E::Domain(_) | E::Numerical(_) | E::Pipeline { .. }) => 4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hamflow_core::{Error, PipelineFailure};

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(Error::Parameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Capability("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::NotReparametrizable("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 4);
        let p = Error::Pipeline {
            step: 7,
            reason: PipelineFailure::OutsideWindow { energy: 1.0, lo: 2.0, hi: 3.0 },
        };
        assert_eq!(CliError::from(p).exit_code(), 4);
    }
}
