use thiserror::Error;

/// Failures raised anywhere in the certification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("input error: {0}")]
    Input(String),

    /// Some `x_i` may exceed 1, so the chart pivoting on the centre index no longer applies.
    #[error("reframe needed: x_{index} may exceed 1 (upper bound {upper})")]
    ReframeNeeded { index: usize, upper: f64 },

    #[error("step failure at tau = {tau}: {reason}")]
    StepFailure { tau: f64, reason: String },

    #[error("step budget exhausted after {steps} steps")]
    BudgetExhausted { steps: usize },

    #[error("validation failure: {0}")]
    ValidationFailure(String),

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
