use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resolvent pole: lambda = {lambda} is not above the spectral abscissa {abscissa} (gap {gap})")]
    ResolventPole { lambda: f64, abscissa: f64, gap: f64 },

    #[error("Laplace integral does not decay: lambda = {lambda}, abscissa = {abscissa}")]
    DecayFailure { lambda: f64, abscissa: f64 },

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("hypothesis violated: {what} (margin {margin:e})")]
    Hypothesis { what: String, margin: f64 },

    #[error("numerical inconsistency: {what} (discrepancy {discrepancy:e})")]
    Inconsistent { what: String, discrepancy: f64 },

    #[error("schema error in field `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

impl Error {
    pub(crate) fn dim(expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension { expected: expected.to_string(), found: found.to_string() }
    }

    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), reason: reason.into() }
    }
}
