//! Compressed sparse column matrices.
//!
//! The structural arrays (`col_ptr`, `row_idx`) are reference counted so that
//! a stuffing template can emit many programs that share one sparsity pattern
//! while each owns its numeric values.

use std::sync::Arc;

use crate::Error;

#[derive(Clone, Debug)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Arc<Vec<usize>>,
    row_idx: Arc<Vec<usize>>,
    values: Vec<f64>,
}

/// Sort triplets into CSC order and return `(col_ptr, row_idx, payloads)`.
///
/// The payload is generic so that a template build (payload = slot source) and
/// a plain numeric assembly (payload = f64) order their entries identically.
/// Duplicate `(row, col)` entries are rejected.
pub fn assemble_csc<T>(
    nrows: usize,
    ncols: usize,
    mut triplets: Vec<(usize, usize, T)>,
) -> Result<(Vec<usize>, Vec<usize>, Vec<T>), Error> {
    for &(r, c, _) in &triplets {
        if r >= nrows || c >= ncols {
            return Err(Error::InvalidArgument(format!(
                "triplet ({r}, {c}) out of bounds for {nrows}x{ncols} matrix"
            )));
        }
    }
    // Unique keys make the unstable sort deterministic.
    triplets.sort_unstable_by_key(|&(r, c, _)| ((c as u64) << 32) | r as u64);
    for w in triplets.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            return Err(Error::InvalidArgument(format!(
                "duplicate entry at ({}, {})",
                w[0].0, w[0].1
            )));
        }
    }
    let mut col_ptr = vec![0usize; ncols + 1];
    for &(_, c, _) in &triplets {
        col_ptr[c + 1] += 1;
    }
    for c in 0..ncols {
        col_ptr[c + 1] += col_ptr[c];
    }
    let mut row_idx = Vec::with_capacity(triplets.len());
    let mut payloads = Vec::with_capacity(triplets.len());
    for (r, _, p) in triplets {
        row_idx.push(r);
        payloads.push(p);
    }
    Ok((col_ptr, row_idx, payloads))
}

impl CscMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self, Error> {
        let (col_ptr, row_idx, values) = assemble_csc(nrows, ncols, triplets)?;
        Ok(Self {
            nrows,
            ncols,
            col_ptr: Arc::new(col_ptr),
            row_idx: Arc::new(row_idx),
            values,
        })
    }

    /// Assemble from pre-sorted structural arrays; used by stuffing templates.
    pub(crate) fn from_parts(
        nrows: usize,
        ncols: usize,
        col_ptr: Arc<Vec<usize>>,
        row_idx: Arc<Vec<usize>>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(col_ptr.len(), ncols + 1);
        debug_assert_eq!(row_idx.len(), values.len());
        debug_assert_eq!(*col_ptr.last().unwrap(), values.len());
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: Arc::new(vec![0; ncols + 1]),
            row_idx: Arc::new(Vec::new()),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        range.map(move |p| (self.row_idx[p], self.values[p]))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| self.col(j).map(move |(i, v)| (i, j, v)))
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.fill(0.0);
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
    }

    /// y = A^T x
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for j in 0..self.ncols {
            let mut acc = 0.0;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.values[p] * x[self.row_idx[p]];
            }
            y[j] = acc;
        }
    }

    /// Bitwise equality of structure and values.
    pub fn identical(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && *self.col_ptr == *other.col_ptr
            && *self.row_idx == *other.row_idx
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
