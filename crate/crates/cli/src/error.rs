use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] spectral_lift::Error),
    #[error("check `{check}` failed: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    CheckFailed { check: String, deviation: f64, tolerance: f64 },
    #[error("baseline mismatch: {0} eigenvalue differences")]
    BaselineMismatch(usize),
    #[error("baseline error: {0}")]
    Baseline(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// 2 for malformed input, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Baseline(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) | CliError::CheckFailed { .. } | CliError::BaselineMismatch(_) => 1,
        }
    }
}
