use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value in embedding")]
    NonFinite,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate {role} id {id:?} in ground truth")]
    DuplicateGroundTruthId { role: &'static str, id: String },

    #[error("duplicate source id {0:?} in match results")]
    DuplicateSourceId(String),

    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not place {needed} identity centers with separation {separation} after {attempts} attempts")]
    InfeasibleSeparation {
        needed: usize,
        separation: f64,
        attempts: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
