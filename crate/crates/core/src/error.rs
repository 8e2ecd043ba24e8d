use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires the subcritical regime (b > 0 and theta > 0), got b = {b}, theta = {theta}")]
    NotSubcritical { b: f64, theta: f64 },

    #[error("Riccati solution became negative ({value:e}) at t = {t}; reduce the step size")]
    StepTooLarge { t: f64, value: f64 },

    #[error("truncation at t_max = {t_max} leaves a tail bound of {tail:e} (tolerance {tol:e})")]
    TruncationTooShort { t_max: f64, tail: f64, tol: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("initial value y0 = {0} is negative")]
    NegativeY0(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-positive Y value {value} at index {index}")]
    NonpositiveY { index: usize, value: f64 },

    #[error("degenerate denominator `{name}` = {value:e}")]
    DegenerateDenominator { name: &'static str, value: f64 },

    #[error("degenerate moments: {0}")]
    DegenerateMoments(String),

    #[error("moment `{0}` is not available")]
    MissingMoment(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by degenerate input data rather than misconfiguration.
    pub fn is_degenerate_input(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator { .. }
                | Error::NonpositiveY { .. }
                | Error::DegenerateMoments(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
