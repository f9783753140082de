use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("evaluation point {0} lies outside [0, 1]")]
    PointOutsideDomain(f64),

    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("invalid exponent rule: {0}")]
    InvalidRule(String),

    #[error("least exponent {0} is below 1, division by x leaves the space")]
    DivisionUndefined(f64),

    #[error("rho must lie in (0, 1), got {0}")]
    RhoOutOfRange(f64),

    #[error("exponent {0} is not a member of the materialized exponent set")]
    ExponentNotInRule(f64),

    #[error("invalid block spec: {0}")]
    InvalidBlocks(String),

    #[error("no grid point inside the smallest ball around t0 = {t0} (radius {radius})")]
    EmptyBall { t0: f64, radius: f64 },

    #[error("alpha = {0} is not attained by theta on the grid")]
    AlphaNotAttained(f64),

    #[error("theta jumps by {jump} between adjacent grid points; not continuous at grid scale")]
    ThetaDiscontinuous { jump: f64 },

    #[error("exponent pool exhausted after {built} of {wanted} terms")]
    PoolExhausted { built: usize, wanted: usize },

    #[error("input must have unit L1 norm, got {0}")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
