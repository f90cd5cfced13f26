use std::path::PathBuf;

/// Everything that can go wrong in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("trim failed at {wind} m/s (residual {residual:.3e} N·m)")]
    TrimFailed { wind: f64, residual: f64 },

    #[error("simulation diverged at t = {time:.4} s: {detail}")]
    Diverged { time: f64, detail: String },

    #[error("Riccati iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    RiccatiNonConvergence { iterations: usize, residual: f64 },

    #[error("pair (A, B) is not stabilizable: mode {mode} is uncontrollable")]
    Unstabilizable { mode: String },

    #[error("pair (A, C) is not detectable: mode {mode} is unobservable")]
    Undetectable { mode: String },

    #[error("closed loop is not stable: max Re(eig) = {max_real:.3e}")]
    UnstableClosedLoop { max_real: f64 },

    #[error("solver did not converge within {passes} passes (last improvement {gap:.3e})")]
    NonConvergence { passes: usize, gap: f64 },

    #[error("feature `{feature}` has zero variance")]
    ZeroVariance { feature: String },

    #[error("target range is zero")]
    ZeroRange,

    #[error("configuration invalid:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("parse error in {source_name}: {detail}")]
    Parse { source_name: String, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("plot error: {0}")]
    Plot(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidInput(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Reject NaN and infinities with a named message.
pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
