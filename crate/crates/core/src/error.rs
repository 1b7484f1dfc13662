//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("observation vector is empty")]
    EmptyInput,

    #[error("noise level must be positive and finite, got {0}")]
    NonPositiveNoise(f64),

    #[error("grid truncation {truncation} is not an integer multiple of step {step}")]
    MisalignedGrid { step: f64, truncation: f64 },

    #[error("grid needs at least 3 points, got {points}")]
    DegenerateGrid { points: usize },

    #[error(
        "Gaussian mean of the functional is not finite at mean {mean}, variance {variance}, tau {tau}; \
         the functional is unsuitable for a flat prior"
    )]
    NonFiniteQuadrature { mean: f64, variance: f64, tau: usize },

    #[error("all functional derivatives are zero; the risk ratio is undefined")]
    DegenerateRiskInputs,

    #[error("unknown functional {0:?}")]
    UnknownFunctional(String),
}
