//! Error type shared across the crate.
//!
//! Variants are grouped into three families that map onto the CLI exit
//! codes: configuration (1), data (2), and numerical failures (3).

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // -- configuration (exit code 1) --
    #[error("config error: {0}")]
    Config(String),

    // -- data (exit code 2) --
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Malformed {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("column `{0}` does not match any schema feature")]
    UnknownColumn(String),
    #[error("row {row}: unknown value `{value}` for feature `{feature}`")]
    UnknownValue {
        row: usize,
        feature: String,
        value: String,
    },
    #[error("empty input: {0}")]
    EmptyInput(PathBuf),
    #[error("embedding file line {line}: expected {expected} values, found {found}")]
    RaggedEmbedding {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("labels contain a single class; training requires both")]
    SingleClass,
    #[error("feature `{feature}` leaves an empty counterfactual search space")]
    EmptySearchSpace { feature: String },
    #[error("instance {index}: {source}")]
    AtInstance {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    // -- numerical (exit code 3) --
    #[error("non-finite training loss at epoch {epoch}; lower the learning rate")]
    NonFiniteLoss { epoch: usize },
    #[error("ridge system is singular despite regularization")]
    SingularFit,
    #[error("non-finite objective at iteration {iter}; lower the step size")]
    NonFiniteObjective { iter: usize },
    #[error("cosine distance is undefined for a zero vector")]
    ZeroVector,
    #[error("all counterfactual distances are zero; CES is undefined")]
    ZeroDistance,
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. }
            | Error::Malformed { .. }
            | Error::MissingColumn(_)
            | Error::UnknownColumn(_)
            | Error::UnknownValue { .. }
            | Error::EmptyInput(_)
            | Error::RaggedEmbedding { .. }
            | Error::Schema(_)
            | Error::DimensionMismatch { .. }
            | Error::SingleClass
            | Error::EmptySearchSpace { .. } => 2,
            Error::AtInstance { source, .. } => source.exit_code(),
            Error::NonFiniteLoss { .. }
            | Error::SingularFit
            | Error::NonFiniteObjective { .. }
            | Error::ZeroVector
            | Error::ZeroDistance => 3,
        }
    }

    pub(crate) fn at_instance(index: usize) -> impl FnOnce(Error) -> Error {
        move |source| Error::AtInstance {
            index,
            source: Box::new(source),
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
