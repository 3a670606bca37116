use thiserror::Error;

/// Errors raised by validation and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("squared norm {norm_sq} exceeds 1")]
    NormTooLarge { norm_sq: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("direction is not a unit vector (norm {norm})")]
    NotUnitNorm { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point with squared norm {norm_sq} lies outside the unit ball")]
    OutsideDomain { norm_sq: f64 },

    #[error("density is singular on the boundary of the unit ball (n - l - 2 < 0)")]
    BoundarySingularity,

    #[error("window does not intersect the unit ball")]
    EmptyWindow,

    #[error("inversion requires ||alpha||_2 < 1 (got squared norm {norm_sq})")]
    NoGaussianDamping { norm_sq: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
