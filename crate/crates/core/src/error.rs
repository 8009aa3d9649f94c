use thiserror::Error;

/// Errors raised by the operator, channel, and protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix entry is not finite")]
    NonFinite,
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("vector is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("vectors are not orthonormal (max Gram deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("eigendecomposition did not converge within {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("operator is not idempotent (max deviation {0:.3e})")]
    NotIdempotent(f64),
    #[error("channel is not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("Kraus operators exceed the identity: largest eigenvalue of Σ K†K is {0}")]
    NotSubNormalized(f64),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("outcome probabilities sum to {0}, not 1")]
    ProbabilitiesUnnormalized(f64),
    #[error("ancilla dimension {ancilla} is smaller than the state rank {rank}")]
    AncillaTooSmall { rank: usize, ancilla: usize },
    #[error("target ensemble average differs from the marginal (Frobenius distance {0:.3e})")]
    AverageMismatch(f64),
    #[error("target member {index} lies outside the support of the marginal (residual {residual:.3e})")]
    NotInSupport { index: usize, residual: f64 },
    #[error("selective (non trace-preserving) channel rejected")]
    SelectiveChannel,
    #[error("commitment scheme does not conceal the bit (Frobenius distance {0:.3e})")]
    ConcealmentViolated(f64),
    #[error("algebra is not commutative")]
    NonCommutativeAlgebra,
}

pub type Result<T> = std::result::Result<T, Error>;
