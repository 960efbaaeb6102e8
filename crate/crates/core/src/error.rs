use thiserror::Error;

/// Errors raised across the laboratory.
///
/// The variants line up with the CLI exit codes: validation and structural
/// problems exit with 2, numerical failures with 3.
#[derive(Debug, Error)]
pub enum NsvError {
    /// An input violates a documented invariant (mean-free field, ν > 0, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument lies outside the domain of an operation (negative time,
    /// r* below −n/2, nonpositive fit values).
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes or schedules that must match do not.
    #[error("structural error: {0}")]
    Structural(String),

    /// Quadrature or time integration failed to meet its target.
    #[error("numerical failure: {message} (achieved relative error {achieved:e})")]
    Numerical { message: String, achieved: f64 },

    /// The integrator produced NaN/inf; the last valid time is attached.
    #[error("instability detected at t = {t}: {message}")]
    Instability { t: f64, message: String },

    /// A verification plan is missing required pieces.
    #[error("plan error: {0}")]
    Plan(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl NsvError {
    pub fn validation(msg: impl Into<String>) -> Self {
        NsvError::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        NsvError::Domain(msg.into())
    }

    pub fn structural(msg: impl Into<String>) -> Self {
        NsvError::Structural(msg.into())
    }

    /// Process exit status used by the CLI for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            NsvError::Numerical { .. } | NsvError::Instability { .. } => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for NsvError {
    fn from(e: serde_json::Error) -> Self {
        NsvError::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for NsvError {
    fn from(e: toml::de::Error) -> Self {
        NsvError::Parse(e.to_string())
    }
}

impl From<toml::ser::Error> for NsvError {
    fn from(e: toml::ser::Error) -> Self {
        NsvError::Parse(e.to_string())
    }
}

impl From<csv::Error> for NsvError {
    fn from(e: csv::Error) -> Self {
        NsvError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NsvError>;
