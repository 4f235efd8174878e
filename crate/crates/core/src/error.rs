use thiserror::Error;

/// Error type shared across the crate.
///
/// Every variant maps to a stable machine-parsable category string via
/// [`Error::category`], which the CLI prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A sub-network cannot be matched into a larger layout.
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),

    /// Artifacts that must agree (encoder spec vs. data, model vs. dataset) do not.
    #[error("artifact mismatch: {0}")]
    ArtifactMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Data that cannot be fit (e.g. zero total variance for PCA).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// ODE integration produced a non-finite state.
    #[error("integration failed at step {step}: {message}")]
    Integration { step: usize, message: String },

    /// Model/dataset combination that can never work (e.g. label out of range).
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid<S: Into<String>>(msg: S) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Stable category identifier for machine-parsable CLI output.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::StructureMismatch(_) => "structure-mismatch",
            Error::ArtifactMismatch(_) => "artifact-mismatch",
            Error::Parse(_) => "parse-error",
            Error::DegenerateData(_) => "degenerate-data",
            Error::Integration { .. } => "integration-error",
            Error::Config(_) => "config-error",
            Error::Io(_) => "io-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
