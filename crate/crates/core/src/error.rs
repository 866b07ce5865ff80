use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A user-facing parameter failed validation.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("argument outside the function's domain: {0}")]
    Domain(String),

    /// Effect sizes imply a response probability outside (0, 1).
    #[error("unrealizable binary scenario, cell {cell} = {value} is not in (0, 1)")]
    InvalidBinaryCells { cell: &'static str, value: f64 },

    #[error("root is not bracketed on [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("alpha spent at analysis {analysis} is not positive ({increment:e})")]
    Spending { analysis: usize, increment: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("variance estimate is not positive")]
    DegenerateVariance,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Domain(_) | Error::InvalidBinaryCells { .. }
        )
    }
}
