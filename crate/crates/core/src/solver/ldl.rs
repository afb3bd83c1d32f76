//! Sparse LDL^T factorization of symmetric quasi-definite matrices.
//!
//! Up-looking factorization over the elimination tree, operating on the upper
//! triangle in CSC form (diagonal entries required). Quasi-definite input
//! admits the factorization under any symmetric permutation; the caller is
//! responsible for supplying the matrix in the ordering it wants factorized.

use crate::Error;

const UNKNOWN: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct LdlFactor {
    n: usize,
    l_colptr: Vec<usize>,
    l_rowidx: Vec<usize>,
    l_values: Vec<f64>,
    d_inv: Vec<f64>,
}

/// Factor the upper triangle `(col_ptr, row_idx, values)` of an `n x n`
/// symmetric matrix into `L D L^T` with unit lower-triangular `L`.
pub fn factor(
    n: usize,
    col_ptr: &[usize],
    row_idx: &[usize],
    values: &[f64],
) -> Result<LdlFactor, Error> {
    assert_eq!(col_ptr.len(), n + 1);

    // Elimination tree and per-column counts of L.
    let mut etree = vec![UNKNOWN; n];
    let mut lnz = vec![0usize; n];
    let mut work = vec![UNKNOWN; n];
    for j in 0..n {
        work[j] = j;
        for p in col_ptr[j]..col_ptr[j + 1] {
            let mut i = row_idx[p];
            if i > j {
                return Err(Error::FactorizationFailed(
                    "matrix is not upper triangular".into(),
                ));
            }
            while work[i] != j {
                if etree[i] == UNKNOWN {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }

    let mut l_colptr = vec![0usize; n + 1];
    for i in 0..n {
        l_colptr[i + 1] = l_colptr[i] + lnz[i];
    }
    let nnz_l = l_colptr[n];
    let mut l_rowidx = vec![0usize; nnz_l];
    let mut l_values = vec![0.0f64; nnz_l];
    let mut d = vec![0.0f64; n];
    let mut d_inv = vec![0.0f64; n];

    let mut y_vals = vec![0.0f64; n];
    let mut y_marked = vec![false; n];
    let mut y_idx = vec![0usize; n];
    let mut elim_buffer = vec![0usize; n];
    let mut l_next = l_colptr[..n].to_vec();

    let check_pivot = |k: usize, dk: f64| -> Result<f64, Error> {
        if dk == 0.0 || !dk.is_finite() {
            return Err(Error::FactorizationFailed(format!(
                "zero or non-finite pivot at column {k}"
            )));
        }
        Ok(1.0 / dk)
    };

    // Column 0 can only hold its diagonal.
    if col_ptr[1] > col_ptr[0] {
        d[0] = values[col_ptr[0]];
    }
    d_inv[0] = check_pivot(0, d[0])?;

    for k in 1..n {
        let mut nnz_y = 0usize;
        for p in col_ptr[k]..col_ptr[k + 1] {
            let bidx = row_idx[p];
            if bidx == k {
                d[k] = values[p];
                continue;
            }
            y_vals[bidx] = values[p];
            if !y_marked[bidx] {
                y_marked[bidx] = true;
                elim_buffer[0] = bidx;
                let mut nnz_e = 1usize;
                let mut next = etree[bidx];
                while next != UNKNOWN && next < k {
                    if y_marked[next] {
                        break;
                    }
                    y_marked[next] = true;
                    elim_buffer[nnz_e] = next;
                    nnz_e += 1;
                    next = etree[next];
                }
                // Reverse onto the stack so pops see descendants first.
                while nnz_e > 0 {
                    nnz_e -= 1;
                    y_idx[nnz_y] = elim_buffer[nnz_e];
                    nnz_y += 1;
                }
            }
        }
        while nnz_y > 0 {
            nnz_y -= 1;
            let cidx = y_idx[nnz_y];
            let insert = l_next[cidx];
            let y_c = y_vals[cidx];
            for q in l_colptr[cidx]..insert {
                y_vals[l_rowidx[q]] -= l_values[q] * y_c;
            }
            let l_kc = y_c * d_inv[cidx];
            l_rowidx[insert] = k;
            l_values[insert] = l_kc;
            d[k] -= y_c * l_kc;
            l_next[cidx] += 1;
            y_vals[cidx] = 0.0;
            y_marked[cidx] = false;
        }
        d_inv[k] = check_pivot(k, d[k])?;
    }

    Ok(LdlFactor {
        n,
        l_colptr,
        l_rowidx,
        l_values,
        d_inv,
    })
}

impl LdlFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.l_values.len()
    }

    /// Solve `L D L^T x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.l_colptr[j]..self.l_colptr[j + 1] {
                    x[self.l_rowidx[p]] -= self.l_values[p] * xj;
                }
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d_inv) {
            *xi *= di;
        }
        for j in (0..self.n).rev() {
            let mut xj = x[j];
            for p in self.l_colptr[j]..self.l_colptr[j + 1] {
                xj -= self.l_values[p] * x[self.l_rowidx[p]];
            }
            x[j] = xj;
        }
    }
}
