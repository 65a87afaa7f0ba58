use serde::{Deserialize, Serialize};

/// Row-compressed sparse matrix built one row at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(ncols: usize, rows: &[Vec<f64>]) -> Self {
        let mut m = Self::new(ncols);
        for row in rows {
            let entries: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
            m.push_row(&entries);
        }
        m
    }

    /// Append a row. Duplicate columns are summed and exact zeros dropped.
    ///
    /// Panics if a column index is out of range.
    pub fn push_row(&mut self, entries: &[(usize, f64)]) {
        let mut sorted: Vec<(usize, f64)> = entries.to_vec();
        sorted.sort_by_key(|e| e.0);
        let start = self.col_idx.len();
        for (col, val) in sorted {
            assert!(col < self.ncols, "column {col} out of range {}", self.ncols);
            if self.col_idx.len() > start && *self.col_idx.last().unwrap() == col {
                *self.values.last_mut().unwrap() += val;
            } else {
                self.col_idx.push(col);
                self.values.push(val);
            }
        }
        let mut w = start;
        for r in start..self.col_idx.len() {
            if self.values[r] != 0.0 {
                self.col_idx[w] = self.col_idx[r];
                self.values[w] = self.values[r];
                w += 1;
            }
        }
        self.col_idx.truncate(w);
        self.values.truncate(w);
        self.row_ptr.push(w);
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.row(i).map(|(j, v)| v * x[j]).sum()
    }

    pub fn row_norm_inf(&self, i: usize) -> f64 {
        self.row(i).fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.row_dot(i, x)).collect()
    }

    /// `out += self^T y`.
    pub fn mul_t_add(&self, y: &[f64], out: &mut [f64]) {
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for (j, v) in self.row(i) {
                    out[j] += v * yi;
                }
            }
        }
    }
}
