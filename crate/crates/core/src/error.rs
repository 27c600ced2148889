use thiserror::Error;

/// Errors produced by the estimators, the linear-algebra layer and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A least-squares solve met a (numerically) rank-deficient matrix.
    #[error("ill-conditioned matrix: sigma_min / sigma_max = {sigma_min:e} / {sigma_max:e}")]
    IllConditioned { sigma_min: f64, sigma_max: f64 },

    /// Fewer admissible grid minima than requested frequencies.
    #[error("initialization failure: found {found} admissible grid candidates, need {requested}")]
    InitializationFailure { requested: usize, found: usize },

    #[error("estimation failure: {0}")]
    EstimationFailure(String),

    /// Automatic rank detection kept no singular value.
    #[error("no signal: rank detection returned 0")]
    NoSignal,

    #[error("identifiability violated: n = {n} < 2r = {}", 2 * r)]
    Identifiability { n: usize, r: usize },

    #[error("frequency generator infeasible after {attempts} rejected draws")]
    GeneratorInfeasible { attempts: usize },

    #[error("matrix decomposition did not converge: {0}")]
    Decomposition(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
