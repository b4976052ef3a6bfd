use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by what the caller did wrong: `Domain` for an argument
/// outside its mathematical domain, `Configuration` for an inconsistent model
/// description, `AssumptionViolation` when a scenario falls outside the
/// regime where a limit result is valid.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("exact tie between calibration score and test score {score}")]
    Tie { score: f64 },

    #[error("degenerate weights: normalising mass w(+inf) + sum w(S_k) = {total}")]
    DegenerateWeights { total: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("level alpha = {alpha} is not above the critical value {critical}")]
    Subcritical { alpha: f64, critical: f64 },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Tie { .. } => "tie",
            Error::DegenerateWeights { .. } => "degenerate_weights",
            Error::Configuration(_) => "configuration",
            Error::AssumptionViolation(_) => "assumption_violation",
            Error::Subcritical { .. } => "subcritical",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }

    /// True when the input was well formed but a limit result does not apply.
    pub fn is_assumption(&self) -> bool {
        matches!(
            self,
            Error::AssumptionViolation(_) | Error::Subcritical { .. }
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
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn check_probability_open(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} must lie in (0, 1)")))
    }
}
