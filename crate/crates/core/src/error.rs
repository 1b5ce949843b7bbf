use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes. `is_numerical` separates numerical breakdowns from bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("polyhedron is empty (infeasible constraints)")]
    Infeasible,
    #[error("invalid face dimension k = {k} for ambient dimension {n}")]
    InvalidFaceDimension { k: usize, n: usize },
    #[error("vertex set is not a face of the polytope")]
    NotAFace,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parity violation: symmetrized evaluations disagree in absolute value (max gap {0:.3e})")]
    ParityViolation(f64),
    #[error("symmetrization vanishes identically; the form has the wrong parity")]
    VanishingSymmetrization,
    #[error("bump of width {width} overlaps another edge direction at angle {angle}")]
    BumpOverlap { width: f64, angle: f64 },
    #[error("argument not contained in the restriction subspace: {0}")]
    NotInSubspace(String),
    #[error("non-convex bulge: {0}")]
    NonConvex(String),
    #[error("projection did not reach the duality-gap target after {0} iterations")]
    ProjectionCap(usize),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
    #[error("harmonic degree {0} exceeds the supported maximum")]
    DegreeTooLarge(usize),
    #[error("odd input: {0}")]
    OddInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ProjectionCap(_) | Error::QuadratureFailure(_) | Error::Numerical(_)
        )
    }
}
