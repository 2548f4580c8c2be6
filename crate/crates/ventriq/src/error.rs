//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Voxel index outside the volume dimensions.
    #[error("voxel index {index:?} out of range for dims {dims:?}")]
    IndexError {
        index: (i64, i64, i64),
        dims: (usize, usize, usize),
    },

    /// Contour with fewer than 3 vertices or self-intersecting.
    #[error("degenerate contour: {0}")]
    DegenerateContour(String),

    /// Similarity fit attempted on a collinear or otherwise rank-deficient configuration.
    #[error("degenerate similarity fit: {0}")]
    DegenerateFit(String),

    /// Malformed volume, shape, or model file.
    #[error("format error in {path:?}: {detail}")]
    FormatError { path: PathBuf, detail: String },

    /// Two inputs claim the same subject/phase/view slot.
    #[error("duplicate entry for subject {subject} phase {phase} view {view}")]
    DuplicateEntry {
        subject: String,
        phase: usize,
        view: String,
    },

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Shapes with mismatched landmark counts or labels.
    #[error("correspondence error: {0}")]
    CorrespondenceError(String),

    /// Too few samples for the requested statistic or model.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Training set carries no shape variance.
    #[error("insufficient variance: {0}")]
    InsufficientVariance(String),

    /// Vector or matrix dimension mismatch.
    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    /// Zero-length normal supplied for profile sampling.
    #[error("degenerate normal vector")]
    DegenerateNormal,

    /// Required acquisition view absent from the input.
    #[error("missing view: {0}")]
    MissingView(String),

    /// Organ detection found no usable cardiac blob.
    #[error("detection failure: {0}")]
    DetectionFailure(String),

    /// Boundary search produced no observed landmark in an iteration.
    #[error("no boundary observations")]
    NoObservations,

    /// Model matching failed for a subject/phase.
    #[error("match failure: {0}")]
    MatchFailure(String),

    /// Classifier training with single-class labels.
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// Too few slices for image quality assessment.
    #[error("insufficient slices: got {got}, need {need}")]
    InsufficientSlices { got: usize, need: usize },

    /// Quantification requested on an empty segmentation.
    #[error("empty segmentation: {0}")]
    EmptySegmentation(String),

    /// Functional index undefined (e.g. zero end-diastolic volume).
    #[error("quantification error: {0}")]
    QuantificationError(String),

    /// Phantom specification violates its invariants.
    #[error("phantom spec error: {0}")]
    SpecError(String),

    /// Correlation on a constant sample.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// Malformed configuration file or unknown key.
    #[error("config error: {0}")]
    ConfigError(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::FormatError {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
