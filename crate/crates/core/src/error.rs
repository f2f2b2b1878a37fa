use thiserror::Error;

/// Errors raised by contrast evaluation, samplers, map construction and experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col}): {value}")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("rank deficient: smallest/largest singular value ratio {ratio:e} is below {tol:e}")]
    RankDeficient { ratio: f64, tol: f64 },

    #[error("column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {point:?} lies outside the map domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("coordinate {coord} = {value} sits on a grid knot; the unsmoothed map has no Jacobian there")]
    OnKnot { coord: usize, value: f64 },

    #[error("point lies within {radius} of an inversion pole")]
    NearPole { radius: f64 },

    #[error("value {value} for component {component} is outside the support of its law")]
    Support { component: usize, value: f64 },

    #[error("density is not positive at ({x1}, {x2})")]
    NonPositiveDensity { x1: f64, x2: f64 },

    #[error("quadrature mass {mass} deviates from 1 by more than {tol:e}")]
    Normalization { mass: f64, tol: f64 },

    #[error("point ({x1}, {x2}) is outside the tabulated rectangle")]
    OutOfTable { x1: f64, x2: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rotation is a signed permutation of the axes carrying non-Gaussian sources")]
    TrivialRotation,

    #[error("degenerate map: {rejected} of {total} draws were rank deficient")]
    DegenerateMap { rejected: usize, total: usize },

    #[error("transform is not strictly monotone: {0}")]
    NonMonotone(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Variant name, used in structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::ZeroColumn(_) => "ZeroColumn",
            Error::Domain(_) => "Domain",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::OnKnot { .. } => "OnKnot",
            Error::NearPole { .. } => "NearPole",
            Error::Support { .. } => "Support",
            Error::NonPositiveDensity { .. } => "NonPositiveDensity",
            Error::Normalization { .. } => "Normalization",
            Error::OutOfTable { .. } => "OutOfTable",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::TrivialRotation => "TrivialRotation",
            Error::DegenerateMap { .. } => "DegenerateMap",
            Error::NonMonotone(_) => "NonMonotone",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures caused by numerics rather than by caller input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::DegenerateMap { .. }
                | Error::ZeroColumn(_)
                | Error::Normalization { .. }
                | Error::NonPositiveDensity { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
