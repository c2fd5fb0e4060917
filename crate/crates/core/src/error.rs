use thiserror::Error;

use crate::point::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain parameters: {0}")]
    InvalidDomain(String),

    #[error("unsupported domain for {what}: {domain}")]
    UnsupportedDomain { what: &'static str, domain: String },

    #[error("quadrature resolution {got} is below the minimum {min}")]
    ResolutionTooLow { got: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {0} lies outside the domain")]
    OutsideDomain(Point),

    #[error("non-finite integrand value at node {index} ({point})")]
    NonFiniteIntegrand { index: usize, point: Point },

    #[error("derivative stencil around {0} leaves the domain of definition")]
    StencilOutsideDomain(Point),

    #[error("invalid derivative stencil: {0}")]
    InvalidStencil(String),

    #[error(
        "Gram matrix is numerically indefinite (pivot {pivot:.3e} at basis index {index}); \
         lower the degree or raise the quadrature resolution"
    )]
    IndefiniteGram { pivot: f64, index: usize },

    #[error("kernel diagonal K(z,z) = {value} is not positive at {point}")]
    NonPositiveDiagonal { point: Point, value: f64 },

    #[error("kernel vanishes at ({z}, {xi})")]
    KernelVanishes { z: Point, xi: Point },

    #[error("metric at {point} is not positive definite (min eigenvalue {min_eigenvalue:.3e}): {matrix}")]
    MetricNotPositive {
        point: Point,
        min_eigenvalue: f64,
        matrix: String,
    },

    #[error("Fisher matrix at {point} has eigenvalue {min_eigenvalue:.3e} below the numerical floor")]
    FisherNotPositive { point: Point, min_eigenvalue: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("point {0} lies in the exclusion tube around the critical image")]
    ExcludedPoint(Point),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncation too narrow: density mass {mass} differs from 1")]
    InsufficientTruncation { mass: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by invalid user input rather than numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDomain(_)
                | Error::UnsupportedDomain { .. }
                | Error::ResolutionTooLow { .. }
                | Error::DimensionMismatch { .. }
                | Error::OutsideDomain(_)
                | Error::InvalidStencil(_)
                | Error::InvalidMap(_)
                | Error::ExcludedPoint(_)
                | Error::EmptySample(_)
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}
