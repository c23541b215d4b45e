use thiserror::Error;

/// Errors raised by sequence access, class checks and series probes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequence indices start at 1, got 0")]
    ZeroIndex,

    #[error("index {index} is beyond the known length {len} of `{label}`")]
    OutOfRange { label: String, index: u64, len: u64 },

    #[error("term {index} of `{label}` is negative or not finite: {value}")]
    InvalidTerm { label: String, index: u64, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid window [{n_min}, {n_max}]: {reason}")]
    InvalidWindow { n_min: u64, n_max: u64, reason: String },

    #[error("evaluation point x = {0} must lie strictly inside (0, pi)")]
    PointOutsideInterval(f64),

    #[error("regulator is decreasing at n = {index}: R(n) = {current} > R(n+1) = {next_value}")]
    RegulatorDecreasing { index: u64, current: f64, next_value: f64 },

    #[error("complex value {re} + {im}i is outside the sector of half-angle {theta0}")]
    OutsideSector { re: f64, im: f64, theta0: f64 },

    #[error("malformed sequence spec at `{path}`: {reason}")]
    Spec { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn spec(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
