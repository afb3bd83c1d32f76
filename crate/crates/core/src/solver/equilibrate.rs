//! Ruiz-style row/column equilibration of cone programs.
//!
//! Rows that belong to the same second-order cone block share one scale
//! factor, since cones are not closed under arbitrary per-row scaling. Scale
//! factors are rounded to powers of two so that unscaling a solution or the
//! problem data is exact in floating point.

use super::ConeProgram;

#[derive(Clone, Debug)]
pub struct Equilibration {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub cost_scale: f64,
}

pub(crate) fn pow2_round(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    let e = x.log2().round();
    // Clamp to a sane exponent window so degenerate data cannot overflow.
    (2.0f64).powi(e.clamp(-64.0, 64.0) as i32)
}

/// Map each row index to the first row of its scale-sharing group.
fn row_groups(prog: &ConeProgram) -> Vec<usize> {
    let m = prog.b.len();
    let mut group = vec![0usize; m];
    let singles = prog.cone.zero_dim + prog.cone.nonneg_dim;
    for (i, g) in group.iter_mut().enumerate().take(singles) {
        *g = i;
    }
    let mut base = singles;
    for &d in &prog.cone.soc_dims {
        for i in base..base + d {
            group[i] = base;
        }
        base += d;
    }
    group
}

/// Equilibrate `prog` with `sweeps` Ruiz iterations. Returns the scaled
/// program together with the scalings needed to undo it.
pub fn equilibrate(prog: &ConeProgram, sweeps: usize) -> (ConeProgram, Equilibration) {
    let m = prog.b.len();
    let n = prog.c.len();
    let group = row_groups(prog);

    let mut row_scale = vec![1.0f64; m];
    let mut col_scale = vec![1.0f64; n];
    let mut a = prog.a.clone();

    let mut row_max = vec![0.0f64; m];
    let mut col_max = vec![0.0f64; n];
    for _ in 0..sweeps {
        row_max.fill(0.0);
        col_max.fill(0.0);
        for (i, j, v) in a.triplets() {
            let av = v.abs();
            if av > row_max[i] {
                row_max[i] = av;
            }
            if av > col_max[j] {
                col_max[j] = av;
            }
        }
        // SOC rows share the block-wide max.
        let mut block_max = row_max.clone();
        for i in 0..m {
            let g = group[i];
            if row_max[i] > block_max[g] {
                block_max[g] = row_max[i];
            }
        }
        let row_factor: Vec<f64> = (0..m)
            .map(|i| pow2_round(1.0 / block_max[group[i]].sqrt()))
            .collect();
        let col_factor: Vec<f64> = (0..n)
            .map(|j| pow2_round(1.0 / col_max[j].sqrt()))
            .collect();
        {
            let cp: Vec<usize> = a.col_ptr().to_vec();
            let ri: Vec<usize> = a.row_idx().to_vec();
            let vals = a.values_mut();
            for j in 0..n {
                for p in cp[j]..cp[j + 1] {
                    vals[p] *= row_factor[ri[p]] * col_factor[j];
                }
            }
        }
        for i in 0..m {
            row_scale[i] *= row_factor[i];
        }
        for j in 0..n {
            col_scale[j] *= col_factor[j];
        }
    }

    let b: Vec<f64> = prog.b.iter().zip(&row_scale).map(|(bi, r)| bi * r).collect();
    let mut c: Vec<f64> = prog.c.iter().zip(&col_scale).map(|(ci, s)| ci * s).collect();
    let c_norm = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cost_scale = if c_norm > 0.0 { pow2_round(1.0 / c_norm) } else { 1.0 };
    for ci in &mut c {
        *ci *= cost_scale;
    }

    let scaled = ConeProgram {
        a,
        b,
        c,
        cone: prog.cone.clone(),
    };
    (
        scaled,
        Equilibration {
            row_scale,
            col_scale,
            cost_scale,
        },
    )
}

impl Equilibration {
    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            row_scale: vec![1.0; m],
            col_scale: vec![1.0; n],
            cost_scale: 1.0,
        }
    }

    /// nu = C nu_hat
    pub fn unscale_primal(&self, primal_scaled: &mut [f64]) {
        for (v, s) in primal_scaled.iter_mut().zip(&self.col_scale) {
            *v *= s;
        }
    }

    /// y = R y_hat / cost_scale
    pub fn unscale_dual(&self, dual_scaled: &mut [f64]) {
        for (v, r) in dual_scaled.iter_mut().zip(&self.row_scale) {
            *v *= r / self.cost_scale;
        }
    }

    /// mu = mu_hat / R
    pub fn unscale_slack(&self, slack_scaled: &mut [f64]) {
        for (v, r) in slack_scaled.iter_mut().zip(&self.row_scale) {
            *v /= r;
        }
    }

    pub fn scale_primal(&self, primal: &mut [f64]) {
        for (v, s) in primal.iter_mut().zip(&self.col_scale) {
            *v /= s;
        }
    }

    pub fn scale_dual(&self, dual: &mut [f64]) {
        for (v, r) in dual.iter_mut().zip(&self.row_scale) {
            *v *= self.cost_scale / r;
        }
    }

    pub fn scale_slack(&self, slack: &mut [f64]) {
        for (v, r) in slack.iter_mut().zip(&self.row_scale) {
            *v *= r;
        }
    }

    /// Reconstruct the original program from a scaled one; exact because all
    /// scale factors are powers of two.
    pub fn unscale_program(&self, scaled: &ConeProgram) -> ConeProgram {
        let n = scaled.c.len();
        let mut a = scaled.a.clone();
        {
            let cp: Vec<usize> = a.col_ptr().to_vec();
            let ri: Vec<usize> = a.row_idx().to_vec();
            let vals = a.values_mut();
            for j in 0..n {
                for p in cp[j]..cp[j + 1] {
                    vals[p] /= self.row_scale[ri[p]] * self.col_scale[j];
                }
            }
        }
        let b = scaled
            .b
            .iter()
            .zip(&self.row_scale)
            .map(|(bi, r)| bi / r)
            .collect();
        let c = scaled
            .c
            .iter()
            .zip(&self.col_scale)
            .map(|(ci, s)| ci / (s * self.cost_scale))
            .collect();
        ConeProgram {
            a,
            b,
            c,
            cone: scaled.cone.clone(),
        }
    }
}
