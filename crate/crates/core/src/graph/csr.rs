//! Compressed sparse row storage and the handful of kernels the models need.
//!
//! Every matrix is kept in canonical form: column indices strictly increasing
//! within a row, no duplicates, no explicit zeros produced by the builders.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{GlrError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every canonical-form invariant.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(GlrError::InvalidMatrix(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(GlrError::InvalidMatrix("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != col_idx.len() {
            return Err(GlrError::InvalidMatrix(format!(
                "row_ptr ends at {} but there are {} column indices and {} values",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for r in 0..n_rows {
            let (start, end) = (row_ptr[r], row_ptr[r + 1]);
            if start > end {
                return Err(GlrError::InvalidMatrix(format!(
                    "row_ptr decreases at row {r}"
                )));
            }
            let cols = &col_idx[start..end];
            for (i, &c) in cols.iter().enumerate() {
                if c >= n_cols {
                    return Err(GlrError::IndexOutOfRange {
                        what: "column",
                        index: c,
                        bound: n_cols,
                    });
                }
                if i > 0 && cols[i - 1] >= c {
                    return Err(GlrError::InvalidMatrix(format!(
                        "row {r} column indices are not strictly increasing"
                    )));
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Assembles a matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed and entries that end up exactly zero are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n_rows {
                return Err(GlrError::IndexOutOfRange {
                    what: "row",
                    index: r,
                    bound: n_rows,
                });
            }
            if c >= n_cols {
                return Err(GlrError::IndexOutOfRange {
                    what: "column",
                    index: c,
                    bound: n_cols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let (r, c, mut v) = sorted[i];
            i += 1;
            while i < sorted.len() && sorted[i].0 == r && sorted[i].1 == c {
                v += sorted[i].2;
                i += 1;
            }
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Converts a dense matrix, keeping only the nonzero entries.
    pub fn from_dense(dense: ArrayView2<f64>) -> Self {
        let (n_rows, n_cols) = dense.dim();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in dense.rows() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    #[inline]
    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    /// Value at `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(i) => vals[i],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[[r, c]] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // Rows are visited in increasing order, so each transposed row comes out sorted.
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                col_idx[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse matrix times dense vector.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(GlrError::DimensionMismatch(format!(
                "spmv: matrix has {} columns, vector has length {}",
                self.n_cols,
                x.len()
            )));
        }
        Ok((0..self.n_rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    /// Sparse matrix times dense matrix.
    pub fn spmm_dense(&self, b: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (b_rows, k) = b.dim();
        if b_rows != self.n_cols {
            return Err(GlrError::DimensionMismatch(format!(
                "spmm: matrix has {} columns, dense operand has {} rows",
                self.n_cols, b_rows
            )));
        }
        let mut out = Array2::zeros((self.n_rows, k));
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut out_row = out.row_mut(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out_row.scaled_add(v, &b.row(c));
            }
        }
        Ok(out)
    }

    /// Gathers the listed rows, in list order. Repeated indices are allowed.
    pub fn row_submatrix(&self, rows: &[usize]) -> Result<CsrMatrix> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let total: usize = rows
            .iter()
            .map(|&r| {
                if r < self.n_rows {
                    Ok(self.row_nnz(r))
                } else {
                    Err(GlrError::IndexOutOfRange {
                        what: "row",
                        index: r,
                        bound: self.n_rows,
                    })
                }
            })
            .sum::<Result<usize>>()?;
        let mut col_idx = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for &r in rows {
            let (cols, vals) = self.row(r);
            col_idx.extend_from_slice(cols);
            values.extend_from_slice(vals);
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Horizontal concatenation `[a | b]`; `b`'s columns are shifted by `a.n_cols()`.
    pub fn hconcat(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
        if a.n_rows != b.n_rows {
            return Err(GlrError::DimensionMismatch(format!(
                "hconcat: {} rows vs {} rows",
                a.n_rows, b.n_rows
            )));
        }
        let mut row_ptr = Vec::with_capacity(a.n_rows + 1);
        let mut col_idx = Vec::with_capacity(a.nnz() + b.nnz());
        let mut values = Vec::with_capacity(a.nnz() + b.nnz());
        row_ptr.push(0);
        for r in 0..a.n_rows {
            let (ac, av) = a.row(r);
            col_idx.extend_from_slice(ac);
            values.extend_from_slice(av);
            let (bc, bv) = b.row(r);
            col_idx.extend(bc.iter().map(|&c| c + a.n_cols));
            values.extend_from_slice(bv);
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: a.n_rows,
            n_cols: a.n_cols + b.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Splits the column range `[start, end)` out as its own matrix.
    pub fn column_slice(&self, start: usize, end: usize) -> Result<CsrMatrix> {
        if start > end || end > self.n_cols {
            return Err(GlrError::DimensionMismatch(format!(
                "column slice {start}..{end} outside 0..{}",
                self.n_cols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c >= start && c < end {
                    col_idx.push(c - start);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: end - start,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|r| self.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// Copy with each row scaled to unit Euclidean norm; zero rows stay zero.
    pub fn l2_row_normalized(&self) -> CsrMatrix {
        let norms = self.row_norms();
        self.scale_rows(|r| if norms[r] > 0.0 { 1.0 / norms[r] } else { 0.0 })
    }

    /// Copy with each row scaled to sum to one. Rows summing to zero are zeroed.
    pub fn l1_row_normalized(&self) -> CsrMatrix {
        let sums: Vec<f64> = (0..self.n_rows)
            .map(|r| self.row(r).1.iter().sum())
            .collect();
        self.scale_rows(|r| if sums[r] != 0.0 { 1.0 / sums[r] } else { 0.0 })
    }

    fn scale_rows(&self, factor: impl Fn(usize) -> f64) -> CsrMatrix {
        let mut values = self.values.clone();
        for r in 0..self.n_rows {
            let f = factor(r);
            for v in &mut values[self.row_ptr[r]..self.row_ptr[r + 1]] {
                *v *= f;
            }
        }
        CsrMatrix {
            values,
            ..self.clone()
        }
    }
}
