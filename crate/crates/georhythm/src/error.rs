//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Variants are grouped by origin so the CLI can map them onto its exit
/// codes: configuration problems (2), input-data problems (3), and
/// numerical failures (4).
#[derive(Debug, Error)]
pub enum Error {
    // --- configuration ---
    #[error("invalid kernel hyperparameter {name}: {value} (must be positive and finite)")]
    InvalidHyperparameter { name: &'static str, value: f64 },

    #[error("nonpositive regularization")]
    NonpositiveRegularization,

    #[error("invalid configuration: {0}")]
    Config(String),

    // --- input data ---
    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("non-finite training time at index {0}")]
    NonFiniteTime(usize),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("trajectory times must be strictly increasing (duplicate time {0} with differing points)")]
    NonMonotoneTrajectory(f64),

    #[error("timestamp mismatch between prediction and ground truth at index {0}")]
    TimestampMismatch(usize),

    #[error("empty generalization set")]
    EmptyGeneralizationSet,

    #[error("pattern check requires samples aligned across periods (time {0} has no counterpart)")]
    MisalignedSampling(f64),

    #[error("point cloud too small: {got} points, need at least {need}")]
    CloudTooSmall { got: usize, need: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    // --- numerical ---
    #[error("non-finite query time")]
    NonFiniteQuery,

    #[error("gram matrix not positive definite")]
    GramNotPositiveDefinite,

    #[error("point is not on the sphere (distance from surface {dist:e}, radius {radius:e})")]
    OffSphere { dist: f64, radius: f64 },

    #[error("log map undefined at cut locus")]
    CutLocus,

    #[error("degenerate patch: sphere fit ill-posed")]
    DegeneratePatch,

    #[error("rank-deficient covariance: points are collinear")]
    CollinearCloud,

    #[error("point not liftable")]
    NotLiftable,

    #[error("cell ({col}, {row}) has no fitted spherelet")]
    EmptyCell { col: usize, row: usize },

    #[error("path leaves fitted surface")]
    PathLeavesSurface,

    #[error("no fittable cells: every grid cell is empty or degenerate")]
    NoFittableCells,

    #[error("drift step of arc length {step:e} reaches the cut locus (limit {limit:e})")]
    DriftTooLarge { step: f64, limit: f64 },

    #[error("decoder initialization is not liftable onto the surface")]
    InitNotLiftable,
}

impl Error {
    /// CLI exit code for this error: 2 config, 3 input data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidHyperparameter { .. } | NonpositiveRegularization | Config(_) => 2,
            EmptyTrainingSet
            | NonFiniteTime(_)
            | Parse { .. }
            | NonMonotoneTrajectory(_)
            | TimestampMismatch(_)
            | EmptyGeneralizationSet
            | MisalignedSampling(_)
            | CloudTooSmall { .. }
            | Io(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
