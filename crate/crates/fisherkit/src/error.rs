use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        context: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("vector length mismatch: {context}: expected {expected}, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {deviation:e} exceeds tolerance")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix entry at ({row},{col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps; off-diagonal norm {off_diagonal_norm:e}")]
    EigenNonConvergence {
        sweeps: usize,
        off_diagonal_norm: f64,
    },

    #[error("within-class scatter is not positive definite (smallest eigenvalue {smallest_eigenvalue:e}); reduce the PCA dimension so each class spreads in the retained subspace")]
    NotPositiveDefinite { smallest_eigenvalue: f64 },

    #[error("retained dimension {requested} out of range; must be between 1 and {max}")]
    DimensionOutOfRange { requested: usize, max: usize },

    #[error("degenerate training data: centered images carry no variance in {available} directions (need {needed})")]
    DegenerateData { available: usize, needed: usize },

    #[error("k = {k} out of range; must be between 1 and {max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },

    #[error("{path}: not a binary PGM (expected magic \"P5\", found {found:?})")]
    PgmBadMagic { path: PathBuf, found: String },

    #[error("{path}: malformed PGM header: {detail}")]
    PgmBadHeader { path: PathBuf, detail: String },

    #[error("{path}: PGM maxval {maxval} exceeds 255")]
    PgmMaxvalTooLarge { path: PathBuf, maxval: u32 },

    #[error("{path}: truncated PGM payload: expected {expected} raster bytes, found {actual}")]
    PgmTruncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("gallery {root}: at least 2 classes required, found {found}")]
    TooFewClasses { root: PathBuf, found: usize },

    #[error("class {class}: at least 2 images required, found {found}")]
    TooFewImages { class: PathBuf, found: usize },

    #[error("{path}: image is {width}x{height} but the gallery is {expected_width}x{expected_height}")]
    HeterogeneousDimensions {
        path: PathBuf,
        width: usize,
        height: usize,
        expected_width: usize,
        expected_height: usize,
    },

    #[error("probe is {width}x{height} but the model expects {expected_width}x{expected_height}")]
    ProbeDimensionMismatch {
        width: usize,
        height: usize,
        expected_width: usize,
        expected_height: usize,
    },

    #[error("{path}: bad model magic (expected \"FKM1\")")]
    ModelBadMagic { path: PathBuf },

    #[error("{path}: unsupported model format version {version}")]
    ModelUnsupportedVersion { path: PathBuf, version: u32 },

    #[error("{path}: truncated model file: expected {expected} more bytes, found {actual}")]
    ModelTruncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: model invariant violated: {detail}")]
    ModelInvariant { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
