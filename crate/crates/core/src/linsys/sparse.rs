//! Compressed-column storage for the constraint matrix.

use faer::Mat;

/// Compressed-column copy of a dense matrix, used for fast products with the
/// (very sparse) constraint matrix.
#[derive(Clone, Debug)]
pub struct SparseCols {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseCols {
    pub fn from_dense(a: &Mat<f64>) -> Self {
        let (nrows, ncols) = (a.nrows(), a.ncols());
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for j in 0..ncols {
            for i in 0..nrows {
                let v = a[(i, j)];
                if v != 0.0 {
                    row_idx.push(i);
                    vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SparseCols { nrows, ncols, col_ptr, row_idx, vals }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    /// `(row, col, value)` for every stored entry, column by column.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| self.column(j).map(move |(i, v)| (i, j, v)))
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (i, v) in self.column(j) {
                    out[i] += v * xj;
                }
            }
        }
        out
    }

    /// `Aᵀ y`
    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ncols).map(|j| self.column(j).map(|(i, v)| v * y[i]).sum()).collect()
    }

    /// `A diag(d) Aᵀ`, dense.
    pub fn scaled_gram(&self, d: &[f64]) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(self.nrows, self.nrows);
        for (j, &dj) in d.iter().enumerate() {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            let rows = &self.row_idx[range.clone()];
            let vals = &self.vals[range];
            for (a, (&ia, &va)) in rows.iter().zip(vals).enumerate() {
                for (&ib, &vb) in rows[a..].iter().zip(&vals[a..]) {
                    let w = va * vb * dj;
                    out[(ia, ib)] += w;
                    if ia != ib {
                        out[(ib, ia)] += w;
                    }
                }
            }
        }
        out
    }

    /// Dense `Aᵀ`.
    pub fn transpose_dense(&self) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Nonzeros per row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.nrows];
        for &i in &self.row_idx {
            counts[i] += 1;
        }
        counts
    }
}
