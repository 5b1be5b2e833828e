//! Principal component analysis over images-as-columns data matrices.
//!
//! The covariance eigenproblem is solved through the p x p Gram matrix
//! (the snapshot trick), so the pixel-space covariance is never
//! materialized: if G = X̄ᵀX̄ has eigenpair (λ, u), then v = X̄u/‖X̄u‖ is
//! an eigenvector of X̄X̄ᵀ with the same eigenvalue.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Mean vector plus the retained leading eigenbasis of the covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Pixel-space mean, length N.
    pub mean: Vec<f64>,
    /// N x d matrix with orthonormal columns.
    pub basis: Matrix,
    /// Retained covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Retained dimension.
    pub d: usize,
}

/// Gram eigenvalues at or below this fraction of trace(G) are treated as
/// numerically zero and never normalized into basis vectors.
const RANK_CUTOFF: f64 = 1e-12;

/// Fits a PCA model to an N x p data matrix, retaining `d` components.
pub fn fit_pca(x: &Matrix, d: usize) -> Result<PcaModel> {
    let n = x.rows();
    let p = x.cols();
    if p < 2 || d < 1 || d > p - 1 {
        return Err(Error::DimensionOutOfRange {
            requested: d,
            max: p.saturating_sub(1),
        });
    }

    let mut mean = vec![0.0; n];
    for j in 0..p {
        for (m, &v) in mean.iter_mut().zip(x.column(j)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= p as f64;
    }

    let mut centered = x.clone();
    for j in 0..p {
        for (v, m) in centered.column_mut(j).iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    let gram = linalg::matmul(&centered.transpose(), &centered)?;
    let trace: f64 = (0..p).map(|i| gram.get(i, i)).sum();
    if trace <= 0.0 {
        return Err(Error::DegenerateData {
            available: 0,
            needed: d,
        });
    }
    let eigen = linalg::symmetric_eigen(&gram, linalg::DEFAULT_TOL)?;

    let rank = eigen
        .values
        .iter()
        .take_while(|&&v| v > RANK_CUTOFF * trace)
        .count();
    if rank < d {
        return Err(Error::DegenerateData {
            available: rank,
            needed: d,
        });
    }

    let mut basis = Matrix::zeros(n, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for j in 0..d {
        let u = eigen.vectors.column(j);
        let v = linalg::matvec(&centered, u)?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (i, value) in v.iter().enumerate() {
            basis.set(i, j, value / norm);
        }
        eigenvalues.push(eigen.values[j].max(0.0));
    }
    linalg::apply_sign_convention(&mut basis);

    Ok(PcaModel {
        mean,
        basis,
        eigenvalues,
        d,
    })
}

/// Projects one pixel vector: basisᵀ·(y − mean).
pub fn project(model: &PcaModel, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != model.mean.len() {
        return Err(Error::LengthMismatch {
            context: "pca::project input",
            expected: model.mean.len(),
            actual: y.len(),
        });
    }
    Ok((0..model.d)
        .map(|j| {
            y.iter()
                .zip(&model.mean)
                .zip(model.basis.column(j))
                .map(|((yi, mi), bi)| (yi - mi) * bi)
                .sum()
        })
        .collect())
}

/// Column-wise projection of an N x p matrix; result is d x p.
pub fn project_matrix(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    if x.rows() != model.mean.len() {
        return Err(Error::LengthMismatch {
            context: "pca::project_matrix rows",
            expected: model.mean.len(),
            actual: x.rows(),
        });
    }
    let mut out = Matrix::zeros(model.d, x.cols());
    for j in 0..x.cols() {
        let projected = project(model, x.column(j))?;
        out.column_mut(j).copy_from_slice(&projected);
    }
    Ok(out)
}
