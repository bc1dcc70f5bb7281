use thiserror::Error;

/// Errors produced by fitting, classification, and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("matrix is singular ({0})")]
    Singular(String),

    #[error("design matrix is rank deficient ({0})")]
    RankDeficient(String),

    #[error("training response is degenerate: all {0} observations are class {1}")]
    DegenerateResponse(usize, u8),

    #[error("maximum likelihood estimate does not exist: data are separable")]
    Separation,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("invalid truncation bounds: lower {lower} >= upper {upper}")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("chain segment has zero variance")]
    DegenerateChain,

    #[error("variogram is degenerate (constant covariate)")]
    DegenerateVariogram,

    #[error("index {index} out of range for {len} locations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("posterior chain is empty")]
    EmptyChain,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from user-supplied input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::MissingColumn(_)
                | Error::DegenerateResponse(..)
                | Error::LengthMismatch(..)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
