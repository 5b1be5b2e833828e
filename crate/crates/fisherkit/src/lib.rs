//! Statistical pattern-recognition toolkit: a PCA → LDA feature-extraction
//! cascade with k-nearest-neighbor identification and distance-threshold
//! impostor rejection, for class-labeled grayscale image galleries.

pub mod error;
pub mod ingestion;
pub mod knn;
pub mod lda;
pub mod linalg;
pub mod pca;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
