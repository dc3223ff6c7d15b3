use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {coords} lies outside the {domain}")]
    PointOutsideDomain { coords: String, domain: String },

    #[error("domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: String, found: String },

    #[error("method {method} is not available for family {family}")]
    UnsupportedMethodForFamily { method: String, family: String },

    #[error("derivative order {order} exceeds the closed-form limit {limit}")]
    DerivativeOrderTooHigh { order: u32, limit: u32 },

    #[error("Cauchy radius {radius} pushes the contour outside the domain")]
    CauchyRadiusExceedsDomain { radius: f64 },

    #[error("normalizing factor K(z, w0) vanishes at z = {at}")]
    NormalizerVanishes { at: String },

    #[error("parameter {0} must lie in the open unit disc")]
    ParameterOutsideDisc(String),

    #[error("series has zero constant term")]
    ZeroConstantTerm,

    #[error("sample is empty")]
    EmptySample,

    #[error("input matrix is not Hermitian (deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("order {order} is not supported on the {domain}")]
    UnsupportedOrderForDomain { order: u32, domain: String },

    #[error("family {0} has no series representation for powers")]
    NonSeriesRepresentable(String),

    #[error("kernel vanishes on the diagonal at {0}")]
    KernelVanishesOnDiagonal(String),

    #[error("Gram matrix is singular (smallest eigenvalue {min_eig:e})")]
    SingularGram { min_eig: f64 },

    #[error("rational function has a pole at {0}")]
    PoleAtPoint(String),

    #[error("bad mu matrix: {0}")]
    BadMuShape(String),

    #[error("diagonal restriction needs two equal factors")]
    FactorsDiffer,

    #[error("truncation degree {degree} too small (residual {residual:e})")]
    TruncationTooSmall { degree: usize, residual: f64 },

    #[error("K1 vanishes on the diagonal at {0}")]
    K1VanishesOnGrid(String),

    #[error("block matrix is singular: {0}")]
    SingularBlock(String),

    #[error("not a disc automorphism: {0}")]
    NotAnAutomorphism(String),

    #[error("kernel is matrix valued ({size}x{size}); a scalar kernel is required")]
    NotScalar { size: usize },

    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),

    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),

    #[error("spec parse error at {path}{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    SpecParse {
        path: String,
        line: Option<usize>,
        message: String,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
