//! Dense real linear algebra: matrices, symmetric eigendecomposition via
//! cyclic Jacobi rotations, and the whitening-based generalized symmetric
//! eigensolver used by the LDA stage.

use crate::error::{Error, Result};

/// Default tolerance for eigensolver convergence and definiteness checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const JACOBI_SWEEP_CAP: usize = 100;

/// Dense real matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from column-major data. Rejects empty shapes,
    /// length mismatches and non-finite entries.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                context: "Matrix::from_column_major data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        for (idx, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx % rows,
                    col: idx / rows,
                });
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from rows of equal length, mostly for tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = vec![0.0; r * c];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                data[j * r + i] = v;
            }
        }
        Matrix::from_column_major(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a single-column matrix from a vector.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        Matrix::from_column_major(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    /// Column-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "Matrix::add",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.add(&other.scale(-1.0))
    }

    fn check_square_symmetric(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let scale = self.frobenius_norm().max(1e-300);
        for j in 0..self.cols {
            for i in 0..j {
                let dev = (self.get(i, j) - self.get(j, i)).abs();
                if dev > 1e-9 * scale {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        deviation: dev,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Standard matrix product.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            context: "matmul",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for j in 0..b.cols {
        let out_col = &mut out.data[j * a.rows..(j + 1) * a.rows];
        for l in 0..a.cols {
            let blj = b.get(l, j);
            if blj == 0.0 {
                continue;
            }
            let a_col = &a.data[l * a.rows..(l + 1) * a.rows];
            for i in 0..a.rows {
                out_col[i] += a_col[i] * blj;
            }
        }
    }
    Ok(out)
}

/// Matrix-vector product a · v.
pub fn matvec(a: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if a.cols != v.len() {
        return Err(Error::LengthMismatch {
            context: "matvec",
            expected: a.cols,
            actual: v.len(),
        });
    }
    let mut out = vec![0.0; a.rows];
    for (l, &vl) in v.iter().enumerate() {
        let a_col = a.column(l);
        for i in 0..a.rows {
            out[i] += a_col[i] * vl;
        }
    }
    Ok(out)
}

/// Eigenvalues (descending) paired with orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Flips each column so its largest-magnitude entry is non-negative,
/// ties broken by lowest index. Makes eigenvector signs reproducible.
pub(crate) fn apply_sign_convention(vectors: &mut Matrix) {
    for j in 0..vectors.cols() {
        let col = vectors.column_mut(j);
        let mut best = 0usize;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                let v = a.get(i, j);
                sum += v * v;
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `tol * ||A||_F`; the sweep cap is 100. Eigenvalues come back in
/// descending order and every eigenvector column carries the fixed
/// sign convention, so identical input bits yield identical output bits.
pub fn symmetric_eigen(a: &Matrix, tol: f64) -> Result<EigenPairs> {
    assert!(tol > 0.0, "tol must be positive");
    a.check_square_symmetric()?;
    let n = a.rows();
    let norm = a.frobenius_norm();

    let mut work = a.clone();
    // Symmetrize exactly so the sweep sees a[i][j] == a[j][i].
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (work.get(i, j) + work.get(j, i));
            work.set(i, j, avg);
            work.set(j, i, avg);
        }
    }
    let mut vectors = Matrix::identity(n);

    let threshold = tol * norm;
    let mut converged = norm == 0.0 || off_diagonal_norm(&work) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_SWEEP_CAP {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = work.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = work.get(p, p);
                let aqq = work.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Rotate rows/columns p and q of the working matrix.
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = work.get(i, p);
                    let aiq = work.get(i, q);
                    let new_ip = c * aip - s * aiq;
                    let new_iq = s * aip + c * aiq;
                    work.set(i, p, new_ip);
                    work.set(p, i, new_ip);
                    work.set(i, q, new_iq);
                    work.set(q, i, new_iq);
                }
                work.set(p, p, app - t * apq);
                work.set(q, q, aqq + t * apq);
                work.set(p, q, 0.0);
                work.set(q, p, 0.0);

                // Accumulate the rotation into the eigenvector matrix.
                for i in 0..n {
                    let vip = vectors.get(i, p);
                    let viq = vectors.get(i, q);
                    vectors.set(i, p, c * vip - s * viq);
                    vectors.set(i, q, s * vip + c * viq);
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&work) <= threshold;
    }
    if !converged {
        return Err(Error::EigenNonConvergence {
            sweeps,
            off_diagonal_norm: off_diagonal_norm(&work),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        work.get(j, j)
            .partial_cmp(&work.get(i, i))
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| work.get(i, i)).collect();
    let mut sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.column_mut(dst).copy_from_slice(vectors.column(src));
    }
    apply_sign_convention(&mut sorted);
    Ok(EigenPairs {
        values,
        vectors: sorted,
    })
}

/// Solves the generalized symmetric problem S_B·w = λ·S_W·w by whitening.
///
/// Factors S_W = U·D·Uᵀ, forms W = U·D^(-1/2), reduces to an ordinary
/// symmetric problem on Wᵀ·S_B·W, and maps the eigenvectors back through W.
/// Eigenvector columns are normalized to unit Euclidean length. Fails when
/// S_W is not positive definite relative to `tol`.
pub fn generalized_symmetric_eigen(s_b: &Matrix, s_w: &Matrix, tol: f64) -> Result<EigenPairs> {
    s_b.check_square_symmetric()?;
    s_w.check_square_symmetric()?;
    if s_b.rows() != s_w.rows() {
        return Err(Error::DimensionMismatch {
            context: "generalized_symmetric_eigen",
            left_rows: s_b.rows(),
            left_cols: s_b.cols(),
            right_rows: s_w.rows(),
            right_cols: s_w.cols(),
        });
    }
    let n = s_w.rows();

    let sw_eigen = symmetric_eigen(s_w, tol)?;
    let smallest = *sw_eigen
        .values
        .last()
        .expect("n >= 1 so at least one eigenvalue");
    if smallest <= tol * s_w.frobenius_norm() {
        return Err(Error::NotPositiveDefinite {
            smallest_eigenvalue: smallest,
        });
    }

    // W = U · D^(-1/2)
    let mut whitener = sw_eigen.vectors.clone();
    for j in 0..n {
        let inv_sqrt = 1.0 / sw_eigen.values[j].sqrt();
        for v in whitener.column_mut(j) {
            *v *= inv_sqrt;
        }
    }

    let reduced = matmul(&matmul(&whitener.transpose(), s_b)?, &whitener)?;
    // Round-off can leave the reduced matrix slightly asymmetric.
    let symmetrized = reduced.add(&reduced.transpose())?.scale(0.5);
    let inner = symmetric_eigen(&symmetrized, tol)?;

    let mut vectors = matmul(&whitener, &inner.vectors)?;
    for j in 0..n {
        let col = vectors.column_mut(j);
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in col.iter_mut() {
                *v /= norm;
            }
        }
    }
    apply_sign_convention(&mut vectors);
    Ok(EigenPairs {
        values: inner.values,
        vectors,
    })
}
