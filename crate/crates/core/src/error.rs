use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("jet order {actual} too small, need at least {required}")]
    OrderTooSmall { required: usize, actual: usize },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("integral diverges at s = 0 for these exponents")]
    DivergentAtZero,

    #[error("quadrature tolerance not met: achieved {achieved:.3e}, requested {requested:.3e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },

    #[error("point lies on the excluded slit [0,1] x {{0}}")]
    Slit,

    #[error("root branch undefined at the vertex z = 0")]
    Vertex,

    #[error("density V vanishes along the orbit")]
    DensityVanishes,

    #[error("orbit did not exit the sector within the step limit")]
    NoExit,

    #[error("vanishing hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("need at least {required} sample points, got {actual}")]
    InsufficientPoints { required: usize, actual: usize },

    #[error("singular-series fit is ill-conditioned (pivot {0:.3e})")]
    IllConditionedFit(f64),

    #[error("samples are missing derivative order {0}")]
    MissingDerivative(usize),

    #[error("one-sided limit did not converge: {0}")]
    NoLimit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
