use thiserror::Error;

/// Errors shared across the numerics, estimator, simulation and experiment
/// layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Gram matrix of a least-squares problem is numerically singular.
    #[error("singular matrix in {context}")]
    SingularMatrix { context: &'static str },

    /// Distinct from outright singularity: the solve would go through but the
    /// condition number exceeds the trust threshold.
    #[error("ill-conditioned system (condition number {cond:.3e} > {limit:.3e})")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("channel file {path}, line {line}: {message}")]
    ChannelParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
