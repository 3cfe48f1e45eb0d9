use thiserror::Error;

/// Errors produced by the geometric pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lines are parallel (within 1 degree)")]
    ParallelLines,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("pixel ({u:.3}, {v:.3}) is outside the image")]
    OutOfBounds { u: f64, v: f64 },
    #[error("point projects behind the destination camera")]
    BehindCamera,
    #[error("cost volume needs at least one neighbor frame")]
    NoNeighbors,
    #[error("frames do not share intrinsics")]
    IntrinsicsMismatch,
    #[error("frame {0} has no depth map")]
    MissingDepth(usize),
    #[error("buffer size mismatch: expected {expected}, got {got}")]
    BufferSize { expected: usize, got: usize },
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("alpha shape is empty: every triangle was discarded")]
    EmptyShape,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("too few points: need more than {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point cloud has no normals")]
    MissingNormals,
    #[error("need at least 3 wall clusters, got {0}")]
    TooFewClusters(usize),
    #[error("degenerate layout: {0}")]
    DegenerateLayout(String),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("perimeter has no corners")]
    EmptyPerimeter,
    #[error("label arrays differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("generation failed: {0}")]
    GenerationFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
