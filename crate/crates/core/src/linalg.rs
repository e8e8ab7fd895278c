//! Dense vector helpers and the [`LinearMap`] wrapper.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; matrix work goes through nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Stacks row vectors into a matrix. All rows must have length `cols`.
pub fn rows_to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Numerical rank of the row set via singular values.
pub fn rank(rows: &[Vec<f64>], cols: usize, tol: f64) -> usize {
    if rows.is_empty() || cols == 0 {
        return 0;
    }
    rows_to_matrix(rows, cols).rank(tol)
}

/// Orthonormal basis of `{w : r·w = 0 for every row r}`.
pub fn null_space(rows: &[Vec<f64>], cols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    // Gram-Schmidt the canonical vectors against the row space, then against each other.
    let row_basis = orthonormalize(rows, tol);
    for i in 0..cols {
        let mut w = unit(cols, i);
        for q in row_basis.iter().chain(basis.iter()) {
            let c = dot(&w, q);
            w = axpy(&w, -c, q);
        }
        let nw = norm(&w);
        if nw > tol.max(1e-10) {
            basis.push(scale(&w, 1.0 / nw));
        }
        if basis.len() + row_basis.len() == cols {
            break;
        }
    }
    basis
}

/// Modified Gram-Schmidt; vectors that collapse below `tol` are dropped.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let c = dot(&w, q);
            w = axpy(&w, -c, q);
        }
        let nw = norm(&w);
        if nw > tol {
            out.push(scale(&w, 1.0 / nw));
        }
    }
    out
}

/// A real `rows × cols` matrix acting on column vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        if rows.iter().any(|r| !all_finite(r)) {
            return Err(Error::NonFinite("linear map"));
        }
        Ok(Self {
            matrix: rows_to_matrix(rows, cols),
        })
    }

    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("linear map"));
        }
        Ok(Self { matrix })
    }

    /// Matrix whose `i`-th column is `columns[i]`.
    pub fn from_columns(columns: &[Vec<f64>], rows: usize) -> Result<Self> {
        let m = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
        Self::from_matrix(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(x);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn compose(&self, inner: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix * &inner.matrix,
        }
    }

    /// Moore-Penrose pseudo-inverse, a right inverse on the range.
    pub fn pseudo_inverse(&self) -> Result<LinearMap> {
        let pinv = self
            .matrix
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(LinearMap { matrix: pinv })
    }

    pub fn inverse(&self) -> Option<LinearMap> {
        self.matrix.clone().try_inverse().map(|matrix| LinearMap { matrix })
    }

    /// Spectral (operator 2-) norm.
    pub fn norm(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix.singular_values().iter().fold(0.0_f64, |m, s| m.max(*s))
    }

    /// Largest entrywise deviation from the identity.
    pub fn identity_defect(&self) -> f64 {
        let n = self.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..self.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.matrix[(i, j)] - target).abs());
            }
        }
        worst
    }
}
