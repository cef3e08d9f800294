use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("eigensolver did not converge on a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },
    #[error("operator is not an orthogonal projection: deviation {deviation:.3e}")]
    NotProjection { deviation: f64 },
    #[error("output of {requested} entries exceeds the cap of {cap}")]
    ElementCap { requested: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("label {0} is outside the truncation window")]
    OutOfWindow(String),
    #[error("freeness violated in {check}: deviation {deviation:.3e}")]
    FreenessViolation { check: String, deviation: f64 },
    #[error("product label {0} escapes the window margin")]
    WindowOverflow(String),
    #[error("representations are not comparable: {0}")]
    NotComparable(String),
    #[error("assembly needs a Clifford representation with a grading")]
    GradingMissing,
    #[error("not a grading: {0}")]
    NotAGrading(String),
    #[error("spectrum growth needs at least two window sizes")]
    InsufficientData,
    #[error("alpha is not a *-automorphism: deviation {deviation:.3e}")]
    AutomorphismInvalid { deviation: f64 },
    #[error("invalid theta: {0}")]
    BadTheta(String),
    #[error("unsupported subgroup: {0}")]
    UnsupportedSubgroup(String),
    #[error("quadrature resolution too low: orthogonality deviation {deviation:.3e}")]
    ResolutionTooLow { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
