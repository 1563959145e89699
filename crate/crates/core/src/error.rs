//! Error types for the pipeline stages.

use std::path::PathBuf;
use thiserror::Error;

/// Errors from constructing, loading, saving, or transforming grid fields.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("dimension mismatch: header says {expected} values, body has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value inside the domain at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("torus fields cannot carry a mask")]
    MaskOnTorus,
    #[error("masked-in region is empty")]
    EmptyDomain,
    #[error("grid dimensions must be positive")]
    ZeroDimension,
    #[error("mask length {found} does not match grid size {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("value count {found} does not match grid size {expected}")]
    ValueLength { expected: usize, found: usize },
    #[error("fields do not share shape, boundary, and mask")]
    ShapeMismatch,
    #[error("quantize requires at least two distinct values in the domain")]
    ConstantField,
    #[error("quantize requires at least 2 levels, got {0}")]
    BadLevels(u32),
    #[error("sampling interval dt must be positive, got {0}")]
    BadDt(f64),
    #[error("series has no frames")]
    EmptySeries,
    #[error("frame {index} does not share the shape of frame 0")]
    FrameShape { index: usize },
}

/// Errors from diagram metric computations.
#[derive(Debug, Error)]
pub enum MetricError {
    #[error("essential-point count mismatch in dimension {dim}: {left} vs {right} (distance is +inf)")]
    EssentialMismatch { dim: usize, left: usize, right: usize },
    #[error("diagonal distance is undefined for a point with infinite death")]
    InfiniteDeath,
    #[error("brute-force matching limited to {max} points, got {size}")]
    TooLarge { size: usize, max: usize },
}

/// Errors from point-cloud analysis in diagram space.
#[derive(Debug, Error)]
pub enum CloudError {
    #[error("distance between frames {i} and {j}: {source}")]
    PairDistance {
        i: usize,
        j: usize,
        #[source]
        source: MetricError,
    },
    #[error("distance matrix entry ({i},{j}) is not symmetric")]
    Asymmetric { i: usize, j: usize },
    #[error("distance matrix entry ({i},{j}) is negative or non-finite")]
    BadEntry { i: usize, j: usize },
    #[error("distance matrix diagonal entry ({i},{i}) is nonzero")]
    NonZeroDiagonal { i: usize },
    #[error("Rips filtration limited to {max} points, got {n}")]
    TooManyPoints { n: usize, max: usize },
    #[error("series must have at least 2 frames, got {0}")]
    TooShort(usize),
    #[error("subsample radius delta must be positive, got {0}")]
    BadDelta(f64),
    #[error("scale estimation requires d_big > d_small > 0, got d_big={d_big}, d_small={d_small}")]
    BadScales { d_big: f64, d_small: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// Errors from the synthetic data generators.
#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Errors from reading or writing diagram files.
#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("persistence point has birth {birth} >= death {death}")]
    BadPoint { birth: f64, death: f64 },
}
