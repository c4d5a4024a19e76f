use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: f64, right: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data: need {needed} observations, got {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("region mark floor {region} lies below the pattern completeness floor {pattern}")]
    IncompleteRegion { region: f64, pattern: f64 },

    #[error("mark of norm {norm} does not exceed threshold {threshold}")]
    MarkBelowThreshold { norm: f64, threshold: f64 },

    #[error("no observation exceeds the threshold {threshold}")]
    NoExceedances { threshold: f64 },

    #[error("exact enumeration limited to n <= {max}, got {n}")]
    EnumerationTooLarge { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}
