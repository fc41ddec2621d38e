use thiserror::Error;

/// Error type shared across the toolkit.
#[derive(Debug, Error)]
pub enum PtError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter validation failed: {0}")]
    Validation(String),

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("series did not converge: {0}")]
    Convergence(String),

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("phase-space grids do not match: {0}")]
    GridMismatch(String),

    #[error("potential parameters do not match: {0}")]
    ParamsMismatch(String),

    #[error("clone basis is rank-deficient: {0}")]
    RankDeficient(String),

    #[error("no interference extremum found: {0}")]
    NoExtremum(String),

    #[error("feature walk left the search window: {0}")]
    Boundary(String),

    #[error("displacement leaked past the basis cap: {0}")]
    Leakage(String),

    #[error("not enough points: {0}")]
    InsufficientPoints(String),

    #[error("period extraction failed: {0}")]
    PeriodExtraction(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PtError>;
