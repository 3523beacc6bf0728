//! Column-major dense matrices and the handful of vector kernels the solvers need.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A dense `rows × cols` matrix of `f64` stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
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

    /// Builds a matrix from a column-major buffer, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "column-major buffer",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k % rows.max(1),
                col: k / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major convenience constructor, mostly for tests and small literals.
    pub fn from_rows(rows: usize, cols: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "row-major buffer",
                expected: rows * cols,
                actual: row_major.len(),
            });
        }
        let mut data = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j * rows + i] = row_major[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
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
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two distinct mutable columns.
    pub fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        assert!(p != q);
        let r = self.rows;
        if p < q {
            let (a, b) = self.data.split_at_mut(q * r);
            (&mut a[p * r..(p + 1) * r], &mut b[..r])
        } else {
            let (a, b) = self.data.split_at_mut(p * r);
            (&mut b[..r], &mut a[q * r..(q + 1) * r])
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            let c = self.col(j);
            for (i, &v) in c.iter().enumerate() {
                t.data[i * self.cols + j] = v;
            }
        }
        t
    }

    /// Leading `k` columns as a new matrix.
    pub fn leading_columns(&self, k: usize) -> Self {
        assert!(k <= self.cols);
        Self {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.rows);
        Self::from_fn(end - start, self.cols, |i, j| self.get(start + i, j))
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        y.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), y);
            }
        }
    }

    /// `y = Aᵀ u`.
    pub fn tr_matvec_into(&self, u: &[f64], y: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = dot(self.col(j), u);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn tr_matvec(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        self.tr_matvec_into(u, &mut y);
        y
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bj = other.col(j);
            let oj = out.col_mut(j);
            for (k, &bkj) in bj.iter().enumerate() {
                if bkj != 0.0 {
                    axpy(bkj, &self.data[k * self.rows..(k + 1) * self.rows], oj);
                }
            }
        }
        out
    }

    /// `selfᵀ · other`.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul inner dimension");
        let mut out = Self::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let bj = other.col(j);
            for i in 0..self.cols {
                out.data[j * self.cols + i] = dot(self.col(i), bj);
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale_in_place(&mut self, alpha: f64) {
        scale(alpha, &mut self.data);
    }

    pub fn add_to_diagonal(&mut self, alpha: f64) {
        let k = self.rows.min(self.cols);
        for i in 0..k {
            self.data[i * self.rows + i] += alpha;
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for j in 0..self.cols {
            for i in 0..j {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    // Four independent accumulators let the compiler vectorize the loop.
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += x[k] * y[k];
        acc[1] += x[k + 1] * y[k + 1];
        acc[2] += x[k + 2] * y[k + 2];
        acc[3] += x[k + 3] * y[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..x.len() {
        s += x[k] * y[k];
    }
    s
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(dot(x, x))
}

/// `y += alpha x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}

/// `‖x − y‖₂ / ‖y‖₂`, or the absolute difference when `y = 0`.
pub fn relative_error(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let denom = norm2(y);
    if denom == 0.0 {
        norm2(&diff)
    } else {
        norm2(&diff) / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_is_column_major() {
        let a = DenseMatrix::from_rows(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(a.as_slice(), &[1., 4., 2., 5., 3., 6.]);
        assert_eq!(a.get(1, 2), 6.0);
        assert_eq!(a.transpose().get(2, 1), 6.0);
    }

    #[test]
    fn rejects_non_finite_and_bad_length() {
        assert!(matches!(
            DenseMatrix::from_col_major(2, 2, vec![1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
        assert!(matches!(
            DenseMatrix::from_col_major(2, 2, vec![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn products_agree_with_hand_computation() {
        let a = DenseMatrix::from_rows(2, 2, &[1., 2., 3., 4.]).unwrap();
        let b = DenseMatrix::from_rows(2, 1, &[1., 1.]).unwrap();
        assert_eq!(a.matmul(&b).as_slice(), &[3., 7.]);
        assert_eq!(a.tr_matmul(&b).as_slice(), &[4., 6.]);
        assert_eq!(a.matvec(&[1., 1.]), vec![3., 7.]);
        assert_eq!(a.tr_matvec(&[1., 1.]), vec![4., 6.]);
    }

    #[test]
    fn dot_handles_remainders() {
        let x: Vec<f64> = (0..7).map(|v| v as f64).collect();
        assert_eq!(dot(&x, &x), 91.0);
    }
}
