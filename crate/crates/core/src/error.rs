//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("insufficient points: need at least {need}, got {got}")]
    InsufficientPoints { need: usize, got: usize },

    #[error("degenerate neighborhood: all points coincide")]
    DegenerateNeighborhood,

    #[error("segmentation produced an empty point set")]
    EmptySegment,

    #[error("degenerate cloud extent: bounding box has zero {0} span")]
    DegenerateExtent(&'static str),

    #[error("operation requires a {expected} voxel grid")]
    WrongGridKind { expected: &'static str },

    #[error("point cloud has no normals")]
    MissingNormals,

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("descriptor layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("missing skeleton joint `{0}`")]
    MissingJoint(String),

    #[error("degenerate skeleton: {0}")]
    DegenerateSkeleton(String),

    #[error("training data has zero variance")]
    ZeroVariance,

    #[error("need at least {need} classes, got {got}")]
    TooFewClasses { need: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),

    #[error("normalization mean must be positive")]
    ZeroMean,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("degenerate protocol: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("missing input: {0}")]
    MissingInput(String),
}
