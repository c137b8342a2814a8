use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 16")]
    InvalidGrid(usize),
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("grids differ: {0} vs {1} points")]
    GridMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("function vanishes on the grid: min modulus {min_modulus:.3e} below threshold {threshold:.3e}")]
    ZeroOnGrid { min_modulus: f64, threshold: f64 },
    #[error("circle of radius {radius} about {center} leaves the open unit disk")]
    RadiusOutOfDomain { center: num_complex::Complex64, radius: f64 },
    #[error("point {0} is not in the open unit disk; boundary values come from the multiplier route")]
    BoundaryEvaluation(num_complex::Complex64),
    #[error("point {0} lies outside the closed unit disk")]
    OutsideDisk(num_complex::Complex64),
    #[error("function is identically zero")]
    AllZero,
    #[error("degree {degree} exceeds the cap {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("invertibility inconclusive: margin {margin:.3e} lies in [{tau_zero:.3e}, {tau_inv:.3e})")]
    Inconclusive { margin: f64, tau_zero: f64, tau_inv: f64 },
    #[error("element is not in the two-point subalgebra (defect {defect:.3e})")]
    NotInSubalgebra { defect: f64 },
    #[error("no degree up to {max_degree} reaches the tolerance; best residual {best_residual:.3e}")]
    TruncationFailure { best_residual: f64, max_degree: usize },
    #[error("log f does not look integrable: {0}")]
    NotLogIntegrable(String),
    #[error("peak set does not match the zero set of f: {0}")]
    PeakSetMismatch(String),
    #[error("smoothing failed: {0}")]
    SmoothingFailure(String),
    #[error("stage failed its own verification: {0}")]
    StageCheckFailed(String),
    #[error("multiplier is not invertible")]
    NotInvertible,
    #[error("points lie in the same Gleason part (functional distance {functional_norm:.6})")]
    SamePart { functional_norm: f64 },
    #[error("construction failed: {0}")]
    ConstructionFailure(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
