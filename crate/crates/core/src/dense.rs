//! Small dense linear solves used outside the sparse hot path: zero-forcing
//! direction computation, minimum-norm least squares, and test oracles.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::Error;

/// Solve `A X = B` for complex square `A` by Gaussian elimination with
/// partial pivoting. Intended for small systems (K x K direction solves).
pub fn solve_complex(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>, Error> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_complex: A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let k = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = lu[(col, col)].norm();
        for r in col + 1..n {
            let mag = lu[(r, col)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return Err(Error::FactorizationFailed(format!(
                "singular matrix in dense solve at column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap((col, j), (pivot_row, j));
            }
            for j in 0..k {
                x.swap((col, j), (pivot_row, j));
            }
        }
        let piv = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / piv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = lu[(col, j)];
                lu[(r, j)] -= f * v;
            }
            for j in 0..k {
                let v = x[(col, j)];
                x[(r, j)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        for j in 0..k {
            let mut acc = x[(col, j)];
            for r in col + 1..n {
                acc -= lu[(col, r)] * x[(r, j)];
            }
            x[(col, j)] = acc / lu[(col, col)];
        }
    }
    Ok(x)
}

/// Solve `A x = b` for real square `A` with partial pivoting.
pub fn solve_real(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>, Error> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch("solve_real: shape mismatch".into()));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = lu[(col, col)].abs();
        for r in col + 1..n {
            if lu[(r, col)].abs() > pivot_mag {
                pivot_mag = lu[(r, col)].abs();
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return Err(Error::FactorizationFailed(format!(
                "singular matrix in dense solve at column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap((col, j), (pivot_row, j));
            }
            x.swap(col, pivot_row);
        }
        let piv = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = lu[(col, j)];
                lu[(r, j)] -= f * v;
            }
            let v = x[col];
            x[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for r in col + 1..n {
            acc -= lu[(col, r)] * x[r];
        }
        x[col] = acc / lu[(col, col)];
    }
    Ok(x)
}
