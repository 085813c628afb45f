//! Dense row-major matrices and the handful of kernels the toolkit needs.
//!
//! Vectors are plain `[f64]` slices. Every kernel accumulates in index order,
//! so two calls with the same operands produce bit-identical results.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values below `PINV_RCOND * sigma_max` are treated as zero.
pub const PINV_RCOND: f64 = 1e-12;

/// Dense `rows x cols` matrix of `f64` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "Matrix::from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Matrix::from_vec"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    ///
    /// # Panics
    /// If the rows are ragged. Intended for literals in tests and examples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Gathers the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Copies columns `start..end` into a new matrix.
    pub fn slice_columns(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.cols);
        let mut data = Vec::with_capacity(self.rows * (end - start));
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[start..end]);
        }
        Matrix {
            rows: self.rows,
            cols: end - start,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sum of `|a_ij|` over rows, for every column.
    pub fn column_abs_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in out.iter_mut().zip(self.row(i)) {
                *acc += v.abs();
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "sub",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self * x` for a column vector `x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked `self * x` into a caller-provided buffer. Each output is
    /// accumulated over `j` in ascending order.
    #[inline]
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `self^T * y` for a column vector `y` of length `rows`.
    pub fn matvec_transposed(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "matvec_transposed",
                left: (self.cols, self.rows),
                right: (y.len(), 1),
            });
        }
        let mut out = vec![0.0; self.cols];
        self.matvec_transposed_into(y, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn matvec_transposed_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            axpy(yi, self.row(i), out);
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Standard matrix product `a * b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            axpy(aik, b.row(k), out_row);
        }
    }
    Ok(out)
}

/// Moore-Penrose pseudoinverse through a full SVD.
///
/// Singular values at or below `PINV_RCOND * sigma_max` are dropped, which
/// fixes the numerical rank.
pub fn pseudoinverse(a: &Matrix) -> Result<Matrix> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::Empty("pseudoinverse"));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("pseudoinverse"));
    }
    let m = DMatrix::from_row_slice(a.rows, a.cols, &a.data);
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NonFinite("pseudoinverse: SVD did not converge")),
    };
    let sigma = svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = PINV_RCOND * sigma_max;

    // pinv = V * diag(1/s) * U^T, restricted to the retained singular values.
    let mut v_scaled = v_t.transpose();
    for (k, &s) in sigma.iter().enumerate() {
        let inv = if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 };
        v_scaled.column_mut(k).scale_mut(inv);
    }
    let pinv = v_scaled * u.transpose();

    let (r, c) = pinv.shape();
    let mut out = Matrix::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            out.data[i * c + j] = pinv[(i, j)];
        }
    }
    Ok(out)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_tiebreak_low(x: &[f64]) -> Result<usize> {
    let (first, rest) = x.split_first().ok_or(Error::Empty("argmax"))?;
    let mut best = 0;
    let mut best_val = *first;
    for (i, &v) in rest.iter().enumerate() {
        if v > best_val {
            best = i + 1;
            best_val = v;
        }
    }
    Ok(best)
}

/// Indices of the `n` largest entries in descending value order, ties broken
/// by lowest index.
pub fn top_n_indices(x: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}
