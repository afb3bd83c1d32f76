//! Cached application of `(I + Q)^{-1}` for the self-dual embedding.
//!
//! `Q` is the skew matrix `[[0, A^T, c], [-A, 0, b], [-c^T, -b^T, 0]]`. The
//! leading 2x2 block of `I + Q` reduces to one sparse LDL^T factorization of
//! the symmetric quasi-definite matrix `K = [[I, A^T], [A, -I]]`, assembled
//! here with the slack rows ordered first so that elimination reproduces the
//! (block-diagonal for our problem family) normal equations without generic
//! fill-reducing machinery. The rank-one `(c, b)` border is folded back in
//! with the matrix-inversion identity: one cached solve against `(c, b)` at
//! factorization time, then a scalar correction for the tau coordinate on
//! every application.

use super::ldl::{self, LdlFactor};
use super::ConeProgram;
use crate::sparse::CscMatrix;
use crate::vecops::dot;
use crate::Error;

/// Static regularization added to the quasi-definite diagonal blocks; one
/// step of iterative refinement per solve works it back out.
const STATIC_REG: f64 = 1e-8;

pub struct LinearSystemCache {
    m: usize,
    n: usize,
    a: CscMatrix,
    ldl: LdlFactor,
    /// P^{-1} (c, b), stored in permuted (slack-first) coordinates.
    w: Vec<f64>,
    /// 1 + (c, b)^T w
    border_denom: f64,
    c: Vec<f64>,
    b: Vec<f64>,
}

/// Scratch buffers so repeated applications stay allocation-free.
pub struct Scratch {
    rhs: Vec<f64>,
    sol: Vec<f64>,
    resid: Vec<f64>,
}

impl Scratch {
    pub fn new(m: usize, n: usize) -> Self {
        let dim = m + n;
        Self {
            rhs: vec![0.0; dim],
            sol: vec![0.0; dim],
            resid: vec![0.0; dim],
        }
    }
}

/// Upper triangle of the regularized K in slack-first ordering:
/// columns 0..m hold the slack diagonal -(1+delta); column m+j holds A's
/// column j (rows 0..m) followed by the primal diagonal (1+delta).
fn kkt_upper(a: &CscMatrix, reg: f64) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let m = a.nrows();
    let n = a.ncols();
    let dim = m + n;
    let nnz = m + n + a.nnz();
    let mut col_ptr = Vec::with_capacity(dim + 1);
    let mut row_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    col_ptr.push(0);
    for _i in 0..m {
        row_idx.push(col_ptr.len() - 1);
        values.push(-(1.0 + reg));
        col_ptr.push(row_idx.len());
    }
    for j in 0..n {
        for (i, v) in a.col(j) {
            row_idx.push(i);
            values.push(v);
        }
        row_idx.push(m + j);
        values.push(1.0 + reg);
        col_ptr.push(row_idx.len());
    }
    (col_ptr, row_idx, values)
}

impl LinearSystemCache {
    /// Solve `P zeta = (h_x, h_s)` with `P = [[I, A^T], [-A, I]]` via the
    /// quasi-definite system, one refinement step against the unregularized
    /// matrix included. Input and output use (primal, slack) ordering.
    fn solve_p(&self, h_x: &[f64], h_s: &[f64], out: &mut [f64], scratch: &mut Scratch) {
        let (m, n) = (self.m, self.n);
        // K (x, z) = (h_x, -h_s) in slack-first coordinates: rhs = (-h_s, h_x).
        for i in 0..m {
            scratch.rhs[i] = -h_s[i];
        }
        scratch.rhs[m..m + n].copy_from_slice(h_x);

        scratch.sol.copy_from_slice(&scratch.rhs);
        self.ldl.solve_in_place(&mut scratch.sol);

        // One refinement step: r = rhs - K0 sol, sol += K_reg^{-1} r.
        self.kkt_residual(&scratch.rhs, &scratch.sol, &mut scratch.resid);
        self.ldl.solve_in_place(&mut scratch.resid);
        for i in 0..m + n {
            scratch.sol[i] += scratch.resid[i];
        }

        // zeta = (x, z): x are the primal entries, z equals the slack part.
        out[..n].copy_from_slice(&scratch.sol[m..m + n]);
        out[n..n + m].copy_from_slice(&scratch.sol[..m]);
    }

    /// resid = rhs - K0 * sol with K0 the unregularized quasi-definite matrix
    /// in slack-first coordinates: K0 (s, x) = (-s + A x, A^T s + x).
    fn kkt_residual(&self, rhs: &[f64], sol: &[f64], resid: &mut [f64]) {
        let (m, n) = (self.m, self.n);
        let (sol_s, sol_x) = sol.split_at(m);
        let (res_s, res_x) = resid.split_at_mut(m);
        self.a.matvec(sol_x, res_s);
        for i in 0..m {
            res_s[i] = rhs[i] - (res_s[i] - sol_s[i]);
        }
        self.a.matvec_transpose(sol_s, res_x);
        for j in 0..n {
            res_x[j] = rhs[m + j] - (res_x[j] + sol_x[j]);
        }
    }

    /// out = (I + Q)^{-1} rhs, with rhs and out of length n + m + 1.
    pub fn apply(&self, rhs: &[f64], out: &mut [f64], scratch: &mut Scratch) {
        let (m, n) = (self.m, self.n);
        debug_assert_eq!(rhs.len(), n + m + 1);
        let (h1, h2) = rhs.split_at(n + m);
        let (h_x, h_s) = h1.split_at(n);

        self.solve_p(h_x, h_s, &mut out[..n + m], scratch);
        let d_dot_z = dot(&self.c, &out[..n]) + dot(&self.b, &out[n..n + m]);
        let sigma = (h2[0] + d_dot_z) / self.border_denom;
        for i in 0..n + m {
            out[i] -= sigma * self.w[i];
        }
        out[n + m] = sigma;
    }

    /// out = (I + Q) x, the multiply-back direction; mainly for validation.
    pub fn apply_forward(&self, x: &[f64], out: &mut [f64]) {
        let (m, n) = (self.m, self.n);
        let (x_nu, rest) = x.split_at(n);
        let (x_y, x_tau) = rest.split_at(m);
        let tau = x_tau[0];
        let mut at_y = vec![0.0; n];
        self.a.matvec_transpose(x_y, &mut at_y);
        for j in 0..n {
            out[j] = x_nu[j] + at_y[j] + self.c[j] * tau;
        }
        let mut a_nu = vec![0.0; m];
        self.a.matvec(x_nu, &mut a_nu);
        for i in 0..m {
            out[n + i] = -a_nu[i] + x_y[i] + self.b[i] * tau;
        }
        out[n + m] = -dot(&self.c, x_nu) - dot(&self.b, x_y) + tau;
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

/// Build the reusable cache for applying `(I + Q)^{-1}`.
pub fn factorize(prog: &ConeProgram) -> Result<LinearSystemCache, Error> {
    prog.validate()?;
    let m = prog.b.len();
    let n = prog.c.len();
    let (col_ptr, row_idx, values) = kkt_upper(&prog.a, STATIC_REG);
    let ldl = ldl::factor(m + n, &col_ptr, &row_idx, &values)?;

    let mut cache = LinearSystemCache {
        m,
        n,
        a: prog.a.clone(),
        ldl,
        w: vec![0.0; m + n],
        border_denom: 1.0,
        c: prog.c.clone(),
        b: prog.b.clone(),
    };
    let mut scratch = Scratch::new(m, n);
    let mut w = vec![0.0; m + n];
    cache.solve_p(&prog.c, &prog.b, &mut w, &mut scratch);
    let denom = 1.0 + dot(&prog.c, &w[..n]) + dot(&prog.b, &w[n..]);
    if !denom.is_finite() || denom.abs() < 1e-12 {
        return Err(Error::FactorizationFailed(format!(
            "border correction is numerically singular (denominator {denom:.3e})"
        )));
    }
    cache.w = w;
    cache.border_denom = denom;
    Ok(cache)
}
