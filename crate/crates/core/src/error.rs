use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An enumeration would exceed its configured budget.
    #[error("{what} needs {needed} steps, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// A proven inequality failed during a survey. This is an implementation defect.
    #[error("theorem violation in instance {seed}: check `{check}` failed ({detail})")]
    TheoremViolation {
        seed: u64,
        check: String,
        detail: String,
    },

    #[error("no maximal-rank witness verified containment over {0}")]
    NoWitness(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
