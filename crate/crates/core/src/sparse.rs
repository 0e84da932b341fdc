//! Row-compressed real matrix used for the superspace transformation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Rows of a sparse matrix that touch one block of columns, as a dense
/// `dofs.len() x width` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBlock {
    pub rows: Vec<usize>,
    pub values: DMatrix<f64>,
}

impl SparseRows {
    /// Rows must have strictly increasing column indices below `ncols`.
    pub fn new(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.windows(2).any(|w| w[0].0 >= w[1].0) || r.last().is_some_and(|&(c, _)| c >= ncols) {
                return Err(Error::Dimension(format!("row {i} has unsorted or out-of-range columns")));
            }
        }
        Ok(Self { ncols, rows })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            ncols: n,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `T x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.ncols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.ncols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(c, v)| x[c] * v).sum())
            .collect())
    }

    /// `T^T y`.
    pub fn transpose_mul_vec(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.nrows() {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} rows",
                y.len(),
                self.nrows()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.ncols];
        for (r, yi) in self.rows.iter().zip(y) {
            for &(c, v) in r {
                out[c] += yi * v;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for &(c, v) in r {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Splits the columns into consecutive blocks of `width` and collects, for
    /// every block, the rows with entries there.
    pub fn column_blocks(&self, width: usize) -> Vec<ColumnBlock> {
        let nblocks = self.ncols.div_ceil(width);
        let mut touched: Vec<Vec<usize>> = vec![Vec::new(); nblocks];
        for (i, r) in self.rows.iter().enumerate() {
            for &(c, _) in r {
                let b = c / width;
                if touched[b].last() != Some(&i) {
                    touched[b].push(i);
                }
            }
        }
        touched
            .into_iter()
            .enumerate()
            .map(|(b, rows)| {
                let mut values = DMatrix::zeros(rows.len(), width);
                for (k, &i) in rows.iter().enumerate() {
                    for &(c, v) in &self.rows[i] {
                        if c / width == b {
                            values[(k, c % width)] = v;
                        }
                    }
                }
                ColumnBlock { rows, values }
            })
            .collect()
    }
}
