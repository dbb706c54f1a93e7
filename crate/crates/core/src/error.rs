use thiserror::Error;

/// Errors produced by the polygon laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("consecutive vertices {0} and {1} coincide")]
    DuplicateConsecutiveVertex(usize, usize),
    #[error("polygon has zero area")]
    DegenerateZeroArea,
    #[error("vertex barycenter is not inside the polygon (central angles sum to {angle_sum})")]
    BarycenterOutside { angle_sum: f64 },
    #[error("vertex {0} coincides with the barycenter")]
    ZeroRadius(usize),
    #[error("point is not on the polygonal manifold: {0}")]
    InvalidManifoldPoint(String),
    #[error("not on the polygonal manifold: {0}")]
    NotOnManifold(String),
    #[error("polygon area is not positive ({0})")]
    NonpositiveArea(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sampling exhausted after {0} attempts")]
    SamplingExhausted(usize),
    #[error("retraction failed: {0}")]
    RetractionFailed(String),
    #[error("finite-difference step {step} too small: Richardson disagreement {disagreement:e}")]
    StepTooSmall { step: f64, disagreement: f64 },
    #[error("finite-difference step {0} outside [1e-7, 1e-3]")]
    StepOutOfRange(f64),
    #[error("{what} mismatch at ({row}, {col}): error {error:e} exceeds {tolerance:e}")]
    MismatchExceedsTolerance {
        what: &'static str,
        row: usize,
        col: usize,
        error: f64,
        tolerance: f64,
    },
    #[error("restricted Hessian of the deficit is not positive definite (min eigenvalue {0:e})")]
    NonpositiveSigma(f64),
    #[error("direction is not tangent to the manifold at the regular polygon (residual {0:e})")]
    NotTangent(f64),
    #[error("direction is degenerate: <Phi w, w> = {0:e}")]
    DegenerateDirection(f64),
    #[error("budget {0} is below the minimum of 1000")]
    BudgetTooSmall(usize),
    #[error("polygon is not simple")]
    NotSimple,
    #[error("reflecting pocket {0:?} creates a self-intersection")]
    ReflectionCreatesSelfIntersection(Vec<usize>),
    #[error("polygon not convex after {0} flips")]
    FlipBudgetExhausted(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
