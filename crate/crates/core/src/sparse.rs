//! Compressed sparse row matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major sparse matrix. Absent entries are zero (or "missing" from the
/// point of view of the tree learner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn empty(cols: usize) -> Self {
        SparseMatrix {
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from per-row `(index, value)` lists. Each row is sorted
    /// and must not repeat an index.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut m = SparseMatrix::empty(cols);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::invalid(format!("row {r}: duplicate column {}", w[0].0)));
                }
            }
            m.push_row(&row)?;
        }
        Ok(m)
    }

    /// Builds a matrix from dense rows, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = SparseMatrix::empty(cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Shape {
                    expected: cols,
                    actual: row.len(),
                });
            }
            let entries: Vec<(usize, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .collect();
            m.push_row(&entries)?;
        }
        Ok(m)
    }

    /// Appends a row whose entries are already sorted by strictly increasing index.
    pub fn push_row(&mut self, entries: &[(usize, f64)]) -> Result<()> {
        let mut last = None;
        for &(j, v) in entries {
            if j >= self.cols {
                return Err(Error::invalid(format!(
                    "column {j} out of range for {} columns",
                    self.cols
                )));
            }
            if last.is_some_and(|l| l >= j) {
                return Err(Error::invalid("row indices must be strictly increasing"));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value at column {j}")));
            }
            last = Some(j);
            self.indices.push(j as u32);
            self.values.push(v);
        }
        self.indptr.push(self.indices.len());
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(&j, &v)| (j as usize, v))
    }

    /// Value at `(r, j)`, `None` when the entry is not stored.
    pub fn get(&self, r: usize, j: usize) -> Option<f64> {
        let (idx, val) = self.row(r);
        idx.binary_search(&(j as u32)).ok().map(|p| val[p])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// New matrix containing only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let mut m = SparseMatrix::empty(self.cols);
        for &r in rows {
            let (idx, val) = self.row(r);
            m.indices.extend_from_slice(idx);
            m.values.extend_from_slice(val);
            m.indptr.push(m.indices.len());
        }
        m
    }

    /// New matrix whose column `i` is column `columns[i]` of `self`.
    pub fn select_columns(&self, columns: &[usize]) -> Result<SparseMatrix> {
        let mut remap = vec![u32::MAX; self.cols];
        for (new, &old) in columns.iter().enumerate() {
            if old >= self.cols {
                return Err(Error::invalid(format!(
                    "feature index {old} out of range for {} columns",
                    self.cols
                )));
            }
            if remap[old] != u32::MAX {
                return Err(Error::invalid(format!("feature index {old} selected twice")));
            }
            remap[old] = new as u32;
        }
        let mut m = SparseMatrix::empty(columns.len());
        let mut buf: Vec<(u32, f64)> = Vec::new();
        for r in 0..self.rows() {
            buf.clear();
            for (j, v) in self.row_entries(r) {
                let new = remap[j];
                if new != u32::MAX {
                    buf.push((new, v));
                }
            }
            buf.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &buf {
                m.indices.push(j);
                m.values.push(v);
            }
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    /// Dense copy of row `r`.
    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (j, v) in self.row_entries(r) {
            out[j] = v;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|r| self.dense_row(r)).collect()
    }
}
