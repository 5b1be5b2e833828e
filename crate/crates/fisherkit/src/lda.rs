//! Fisher discriminant analysis in PCA space: within- and between-class
//! scatter matrices, the generalized eigenproblem, and projection onto the
//! Fisher basis.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Fisher basis with per-class means in Fisher space.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherModel {
    /// d x f matrix of unit-length Fisher basis vectors.
    pub basis: Matrix,
    /// Generalized eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Per-class mean vectors in Fisher space, C vectors of length f.
    pub class_means: Vec<Vec<f64>>,
    pub class_names: Vec<String>,
}

impl FisherModel {
    pub fn fisher_dim(&self) -> usize {
        self.basis.cols()
    }
}

fn check_labels(z: &Matrix, labels: &[usize]) -> Result<usize> {
    if labels.len() != z.cols() {
        return Err(Error::LengthMismatch {
            context: "lda labels vs projection columns",
            expected: z.cols(),
            actual: labels.len(),
        });
    }
    let class_count = labels.iter().copied().max().map_or(0, |m| m + 1);
    if class_count < 2 {
        return Err(Error::TooFewClasses {
            root: std::path::PathBuf::from("<in-memory labels>"),
            found: class_count,
        });
    }
    Ok(class_count)
}

fn class_means_of(z: &Matrix, labels: &[usize], class_count: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let d = z.rows();
    let mut means = vec![vec![0.0; d]; class_count];
    let mut counts = vec![0usize; class_count];
    for (j, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        for (m, &v) in means[label].iter_mut().zip(z.column(j)) {
            *m += v;
        }
    }
    for (mean, &count) in means.iter_mut().zip(&counts) {
        if count > 0 {
            for m in mean.iter_mut() {
                *m /= count as f64;
            }
        }
    }
    (means, counts)
}

fn accumulate_outer(target: &mut Matrix, v: &[f64], weight: f64) {
    let d = v.len();
    for j in 0..d {
        for i in 0..d {
            target.set(i, j, target.get(i, j) + weight * v[i] * v[j]);
        }
    }
}

/// S_W = Σ_i Σ_{x ∈ class i} (x − m_i)(x − m_i)ᵀ
pub fn within_class_scatter(z: &Matrix, labels: &[usize]) -> Result<Matrix> {
    let class_count = check_labels(z, labels)?;
    let (means, _) = class_means_of(z, labels, class_count);
    let d = z.rows();
    let mut scatter = Matrix::zeros(d, d);
    let mut diff = vec![0.0; d];
    for (j, &label) in labels.iter().enumerate() {
        for (slot, (&v, m)) in diff.iter_mut().zip(z.column(j).iter().zip(&means[label])) {
            *slot = v - m;
        }
        accumulate_outer(&mut scatter, &diff, 1.0);
    }
    Ok(scatter)
}

/// S_B = Σ_i n_i (m_i − m)(m_i − m)ᵀ with m the total mean.
pub fn between_class_scatter(z: &Matrix, labels: &[usize]) -> Result<Matrix> {
    let class_count = check_labels(z, labels)?;
    let (means, counts) = class_means_of(z, labels, class_count);
    let d = z.rows();
    let p = z.cols();
    let mut total_mean = vec![0.0; d];
    for j in 0..p {
        for (m, &v) in total_mean.iter_mut().zip(z.column(j)) {
            *m += v;
        }
    }
    for m in &mut total_mean {
        *m /= p as f64;
    }
    let mut scatter = Matrix::zeros(d, d);
    let mut diff = vec![0.0; d];
    for (mean, &count) in means.iter().zip(&counts) {
        if count == 0 {
            continue;
        }
        for (slot, (m_i, m)) in diff.iter_mut().zip(mean.iter().zip(&total_mean)) {
            *slot = m_i - m;
        }
        accumulate_outer(&mut scatter, &diff, count as f64);
    }
    Ok(scatter)
}

/// Fits the Fisher basis: top-f solutions of S_B·w = λ·S_W·w.
///
/// `class_names` must be indexed by the label values in `labels`.
pub fn fit_lda(
    z: &Matrix,
    labels: &[usize],
    class_names: &[String],
    f: usize,
) -> Result<FisherModel> {
    let class_count = check_labels(z, labels)?;
    if class_names.len() < class_count {
        return Err(Error::LengthMismatch {
            context: "lda class_names vs label range",
            expected: class_count,
            actual: class_names.len(),
        });
    }
    let class_count = class_names.len();
    if f < 1 || f > class_count - 1 {
        return Err(Error::DimensionOutOfRange {
            requested: f,
            max: class_count - 1,
        });
    }

    let s_w = within_class_scatter(z, labels)?;
    let s_b = between_class_scatter(z, labels)?;
    let eigen = linalg::generalized_symmetric_eigen(&s_b, &s_w, linalg::DEFAULT_TOL)?;

    let d = z.rows();
    let mut basis = Matrix::zeros(d, f);
    for j in 0..f {
        basis.column_mut(j).copy_from_slice(eigen.vectors.column(j));
    }
    let eigenvalues: Vec<f64> = eigen.values[..f].to_vec();

    let (pca_class_means, _) = class_means_of(z, labels, class_count);
    let class_means = pca_class_means
        .iter()
        .map(|m| project_fisher_unchecked(&basis, m))
        .collect();

    Ok(FisherModel {
        basis,
        eigenvalues,
        class_means,
        class_names: class_names.to_vec(),
    })
}

fn project_fisher_unchecked(basis: &Matrix, z: &[f64]) -> Vec<f64> {
    (0..basis.cols())
        .map(|j| basis.column(j).iter().zip(z).map(|(b, v)| b * v).sum())
        .collect()
}

/// Projects a PCA-space vector onto the Fisher basis: basisᵀ·z.
pub fn project_fisher(model: &FisherModel, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != model.basis.rows() {
        return Err(Error::LengthMismatch {
            context: "lda::project_fisher input",
            expected: model.basis.rows(),
            actual: z.len(),
        });
    }
    Ok(project_fisher_unchecked(&model.basis, z))
}
