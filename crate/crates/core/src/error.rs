use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix exponential rejected: operator norm {norm:.3e} exceeds cap {cap:.3e}")]
    ExpNormCap { norm: f64, cap: f64 },

    #[error("SVD failed to converge")]
    SvdFailure,

    #[error("invalid tagged partition: {0}")]
    InvalidPartition(String),

    #[error("invalid integrator specification: {0}")]
    InvalidIntegrator(String),

    #[error("invalid kernel specification: {0}")]
    InvalidKernel(String),

    #[error("product integral did not converge: certificate {certificate:.3e} > tol {tol:.3e} after {levels} refinement levels")]
    NonConvergence {
        certificate: f64,
        tol: f64,
        levels: u32,
    },

    #[error("point {0} outside integrator domain [{1}, {2}]")]
    OutOfDomain(f64, f64, f64),

    #[error("change of variables requires a strictly increasing map: {0}")]
    NotStrictlyIncreasing(String),

    #[error("matrix has no numerical kernel at the requested point (defect 0)")]
    NoZero,

    #[error("ill-conditioned singular frame: {0}")]
    IllConditionedFrame(String),

    #[error("zero-location budget exhausted ({0} boxes examined)")]
    ZeroSearchBudget(usize),

    #[error("imaginary part fails positivity: min eigenvalue {0:.3e} on sample circle")]
    NegativeImaginaryPart(f64),

    #[error("singular matrix in Cayley transform: det(wI - A(z)) vanishes")]
    SingularCayley,

    #[error("angle partition budget exhausted before meeting 1/k target (reached {achieved:.3e}, target {target:.3e})")]
    PartitionBudget { achieved: f64, target: f64 },

    #[error("Blaschke-Potapov product has a zero at the origin; representation requires nonzero zeros")]
    ZeroAtOrigin,

    #[error("factor zeros must be sorted by increasing angle")]
    UnsortedAngles,

    #[error("log-integrability violation: sampled boundary log-modulus integral {0:.3e}")]
    LogIntegrability(f64),

    #[error("boundary Gram data mismatch: max residual {0:.3e} exceeds tolerance {1:.3e}")]
    BoundaryMismatch(f64, f64),

    #[error("malformed job spec: {0}")]
    MalformedSpec(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
