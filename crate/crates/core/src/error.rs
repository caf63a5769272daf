use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The variants map onto CLI exit codes: `Parse`, `Domain`, `Structural` and
/// `Plan` are usage problems; `Numerical`, `Divergence` and `IllConditioned`
/// are numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("divergent integral: exponent {exponent} must exceed 1")]
    Divergence { exponent: f64 },

    #[error("ill-conditioned system: condition estimate {estimate:e}")]
    IllConditioned { estimate: f64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl LabError {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::Numerical(_) | LabError::Divergence { .. } | LabError::IllConditioned { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
