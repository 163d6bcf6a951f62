use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants fall into three families: data problems (bad input files,
/// rank-deficient designs), numerical problems (quadrature or series that
/// failed to converge) and domain problems (arguments outside the region
/// where a formula is defined). [`Error::kind`] exposes that grouping so
/// front ends can map errors onto exit codes or status values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input has no `y` column")]
    MissingResponseColumn,
    #[error("non-finite value at data row {row}, column `{col}`")]
    NonFiniteValue { row: usize, col: String },
    #[error("cannot parse `{text}` at data row {row}, column `{col}` as a number")]
    InvalidNumber { row: usize, col: String, text: String },
    #[error("regressor `{0}` is constant and collinear with the intercept")]
    ConstantRegressor(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("design [1 | X] is rank deficient for subset {0}")]
    RankDeficient(String),
    #[error("insufficient residual degrees of freedom: n = {n}, model dimension j = {j}")]
    InsufficientDegreesOfFreedom { n: usize, j: usize },
    #[error("response is constant (zero centered sum of squares)")]
    ConstantResponse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model subset: {0}")]
    InvalidSubset(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("quadrature did not converge: last change {last_change:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { last_change: f64, tolerance: f64 },
    #[error("series did not converge within {0} terms")]
    SeriesNonConvergence(usize),
    #[error("model space too large to enumerate: k = {k} exceeds the cap of {cap}")]
    EnumerationCapExceeded { k: usize, cap: usize },
    #[error("decision rule never rejects the null model at n = {n}, j = {j}")]
    NoRoot { n: usize, j: usize },
}

/// Coarse classification of [`Error`] values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Numerical,
    Domain,
    Capacity,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            MissingResponseColumn
            | NonFiniteValue { .. }
            | InvalidNumber { .. }
            | ConstantRegressor(_)
            | EmptyDataset
            | Malformed(_)
            | Io(_)
            | RankDeficient(_)
            | InsufficientDegreesOfFreedom { .. }
            | ConstantResponse
            | DimensionMismatch(_)
            | InvalidSubset(_) => ErrorKind::Data,
            QuadratureNonConvergence { .. } | SeriesNonConvergence(_) | NoRoot { .. } => {
                ErrorKind::Numerical
            }
            Domain(_) => ErrorKind::Domain,
            EnumerationCapExceeded { .. } => ErrorKind::Capacity,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
