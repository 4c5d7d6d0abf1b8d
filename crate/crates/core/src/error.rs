//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AuditError>;

/// Errors surfaced by the audit library.
#[derive(Debug, Error)]
pub enum AuditError {
    /// A caller-supplied value is out of range; names the offending field.
    #[error("invalid {field}: {detail}")]
    InvalidInput { field: &'static str, detail: String },

    /// The requested computation only exists when the alternative holds
    /// (population mean strictly above the null boundary).
    #[error("alternative infeasible: {0}")]
    InfeasibleAlternative(String),

    /// Rates round to category counts that cannot fit in the population.
    #[error("infeasible population counts: {0}")]
    InfeasibleCounts(String),

    /// A without-replacement stream was asked for more draws than ballots.
    #[error("population exhausted: {0}")]
    ExhaustedPopulation(String),

    /// A workload ratio over empty, mismatched, or zero-mean results.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// A three-point support whose values collapse or straddle the threshold
    /// in a way that leaves no valid bet range.
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),
}

impl AuditError {
    pub(crate) fn input(field: &'static str, detail: impl Into<String>) -> Self {
        AuditError::InvalidInput {
            field,
            detail: detail.into(),
        }
    }
}
