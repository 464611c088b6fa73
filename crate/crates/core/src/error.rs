use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("piece kind has no closed-form Fourier integral: {0}")]
    UnsupportedPiece(String),

    #[error("quadrature needs at least {required} nodes per piece, got {nodes}")]
    InsufficientNodes { nodes: usize, required: usize },

    #[error("shape leaves the periodic domain (-pi, pi]^2: {0}")]
    ShapeOutOfDomain(String),

    #[error("reconstruction is not real: imaginary residual {residual:.3e} at x = {x}")]
    NonRealResult { residual: f64, x: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("jump count mismatch: truth has {truth}, estimate has {estimate}")]
    CardinalityMismatch { truth: usize, estimate: usize },

    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("too few Fourier coefficients: band limit {band} cannot support model order {order} from k_min {k_min}")]
    TooFewCoefficients { band: usize, order: usize, k_min: usize },

    #[error("ill-conditioned Vandermonde system (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("concentration factor built for N = {factor} applied to spectrum with N = {spectrum}")]
    BandMismatch { factor: usize, spectrum: usize },

    #[error("spectrum carries no energy")]
    ZeroSignal,

    #[error("column oversampling {m_over} is below 2N+1 = {required}")]
    UndersampledColumn { m_over: usize, required: usize },

    #[error("reference grid is identically zero")]
    ZeroReference,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
