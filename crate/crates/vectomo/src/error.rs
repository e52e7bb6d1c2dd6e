use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad parameter combinations, empty angle lists,
    /// geometry that does not fit the target grid, and similar caller errors.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid input data: shape mismatches, non-finite values,
    /// out-of-bounds sample points.
    #[error("input error: {0}")]
    Input(String),

    /// Malformed binary file. `offset` is the byte position at which the
    /// problem was detected.
    #[error("format error at byte {offset}: {msg}")]
    Format { msg: String, offset: u64 },

    /// A filter was evaluated at a tilt angle where its denominator
    /// vanishes and clamping was disabled.
    #[error("singularity error: {0}")]
    Singularity(String),

    /// Metric normalization is undefined (constant ground truth).
    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),

    /// Phase-stack/sidecar mismatch during ingestion.
    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: usage/configuration problems exit
    /// with 2, runtime failures with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input(_) => 2,
            _ => 1,
        }
    }
}
