//! Column-major dense matrix and the basic kernels built on it.

use std::fmt;
use std::ops::Range;

use crate::error::{LinalgError, Result};

/// A real `rows x cols` matrix stored column by column.
///
/// Entries are always finite. Matrices with a zero dimension exist only as
/// empty factor blocks (for instance the `U` of a rank-0 decomposition).
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows.checked_mul(cols).ok_or(LinalgError::InvalidShape {
            rows,
            cols,
            reason: "element count overflows",
        })?;
        if data.len() != expected {
            return Err(LinalgError::InvalidShape {
                rows,
                cols,
                reason: "data length does not equal rows*cols",
            });
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: idx % rows,
                col: idx / rows,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major data, the order a human writes a matrix in.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidShape {
                rows,
                cols,
                reason: "data length does not equal rows*cols",
            });
        }
        let mut out = Vec::with_capacity(data.len());
        for j in 0..cols {
            for i in 0..rows {
                out.push(data[i * cols + j]);
            }
        }
        Self::from_col_major(rows, cols, out)
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(LinalgError::InvalidShape {
                    rows: nrows,
                    cols: ncols,
                    reason: "rows have differing lengths",
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_row_major(nrows, ncols, &flat)
    }

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

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix entry by entry. Panics if `f` returns a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                data.push(v);
            }
        }
        Self { rows, cols, data }
    }

    /// Assembles a matrix from owned columns that the caller guarantees are finite.
    pub(crate) fn from_columns_unchecked(rows: usize, columns: Vec<Vec<f64>>) -> Self {
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            debug_assert_eq!(c.len(), rows);
            data.extend_from_slice(&c);
        }
        Self { rows, cols, data }
    }

    pub(crate) fn from_raw_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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

    /// Column-major backing storage.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
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
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub(crate) fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Returns row `i` as an owned vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Copies the columns in `range` into a new matrix.
    pub fn columns(&self, range: Range<usize>) -> DenseMatrix {
        assert!(range.end <= self.cols, "column range out of bounds");
        let data = self.data[range.start * self.rows..range.end * self.rows].to_vec();
        DenseMatrix {
            rows: self.rows,
            cols: range.len(),
            data,
        }
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hcat(blocks: &[DenseMatrix]) -> Result<DenseMatrix> {
        let rows = match blocks.first() {
            Some(b) => b.rows,
            None => return Ok(DenseMatrix::zeros(0, 0)),
        };
        let mut cols = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(LinalgError::DimensionMismatch {
                    op: "hcat",
                    left_rows: rows,
                    left_cols: cols,
                    right_rows: b.rows,
                    right_cols: b.cols,
                });
            }
            cols += b.cols;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn transpose(&self) -> DenseMatrix {
        let (m, n) = self.shape();
        let mut data = vec![0.0; m * n];
        for j in 0..n {
            let col = self.col(j);
            for (i, &v) in col.iter().enumerate() {
                data[i * n + j] = v;
            }
        }
        DenseMatrix {
            rows: n,
            cols: m,
            data,
        }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(self.mismatch("matmul", other));
        }
        let m = self.rows;
        let mut out = vec![0.0; m * other.cols];
        for j in 0..other.cols {
            let out_col = &mut out[j * m..(j + 1) * m];
            for (k, &b) in other.col(j).iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.col(k), out_col);
                }
            }
        }
        Ok(DenseMatrix::from_raw_unchecked(m, other.cols, out))
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(self.mismatch("tr_matmul", other));
        }
        let n = self.cols;
        let mut out = vec![0.0; n * other.cols];
        for j in 0..other.cols {
            let b = other.col(j);
            for i in 0..n {
                out[j * n + i] = dot(self.col(i), b);
            }
        }
        Ok(DenseMatrix::from_raw_unchecked(n, other.cols, out))
    }

    /// The Gram matrix `selfᵀ * self`, filled symmetrically.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            let cj = self.col(j);
            for i in 0..=j {
                let v = dot(self.col(i), cj);
                out[j * n + i] = v;
                out[i * n + j] = v;
            }
        }
        DenseMatrix::from_raw_unchecked(n, n, out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("sub", other));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix::from_raw_unchecked(self.rows, self.cols, data))
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Result<DenseMatrix> {
        if factors.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "scale_columns",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: factors.len(),
                right_cols: 1,
            });
        }
        let mut out = self.clone();
        for (j, &f) in factors.iter().enumerate() {
            out.col_mut(j).iter_mut().for_each(|x| *x *= f);
        }
        Ok(out)
    }

    /// Sum of squared entries.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Largest absolute entry, 0 for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    fn mismatch(&self, op: &'static str, other: &DenseMatrix) -> LinalgError {
        LinalgError::DimensionMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = (0..self.cols.min(8))
                .map(|j| format!("{:>12.6}", self.get(i, j)))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// `‖aᵀa − I‖_max`, the orthonormality defect of the columns of `a`.
pub fn orthonormality_defect(a: &DenseMatrix) -> f64 {
    let g = a.gram();
    let mut worst: f64 = 0.0;
    for j in 0..g.cols() {
        for i in 0..g.rows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    worst
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in chunks * 4..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
