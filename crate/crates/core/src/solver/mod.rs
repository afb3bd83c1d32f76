//! First-order solver for standard cone programs.
//!
//! Problems are given in the form
//!
//! ```text
//! minimize    c^T nu
//! subject to  A nu + mu = b,   nu in R^n,   mu in K
//! ```
//!
//! with `K` a Cartesian product of zero, nonnegative and second-order cones.
//! The solver runs ADMM operator splitting on the homogeneous self-dual
//! embedding, so every run ends in either an optimal primal/dual pair or a
//! certificate of primal/dual infeasibility. The embedding works on
//! `u = (nu, y, tau)`, `v = (0, mu, kappa)` and the skew matrix
//! `Q = [[0, A^T, c], [-A, 0, b], [-c^T, -b^T, 0]]`; each iteration applies
//! the cached `(I+Q)^{-1}`, projects onto `R^n x K* x R+`, and updates the
//! dual register `v`.

pub mod equilibrate;
pub mod ldl;
pub mod linsys;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cones::{
    dual_membership_violation, project_cone, project_dual_cone_in_place, ConeSpec,
};
use crate::sparse::CscMatrix;
use crate::vecops::{dot, norm2, norm_inf};
use crate::Error;

pub use equilibrate::{equilibrate, Equilibration};
pub use linsys::{factorize, LinearSystemCache, Scratch};

/// Infeasibility is only declared once tau has collapsed relative to kappa.
const TAU_FLOOR: f64 = 1e-9;

/// Sparse standard-form cone program; the solver's sole input.
#[derive(Clone, Debug)]
pub struct ConeProgram {
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cone: ConeSpec,
}

impl ConeProgram {
    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.cone.validate()?;
        if self.a.nrows() != self.b.len() || self.cone.total_dim() != self.b.len() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} rows, b has {}, cone covers {}",
                self.a.nrows(),
                self.b.len(),
                self.cone.total_dim()
            )));
        }
        if self.a.ncols() != self.c.len() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} columns, c has {}",
                self.a.ncols(),
                self.c.len()
            )));
        }
        let finite = self.a.values().iter().all(|v| v.is_finite())
            && self.b.iter().all(|v| v.is_finite())
            && self.c.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument(
                "program data contains non-finite entries".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut rows = Vec::with_capacity(self.a.nnz());
        let mut cols = Vec::with_capacity(self.a.nnz());
        let mut vals = Vec::with_capacity(self.a.nnz());
        for (i, j, v) in self.a.triplets() {
            rows.push(i);
            cols.push(j);
            vals.push(v);
        }
        serde_json::json!({
            "m": self.num_rows(),
            "n": self.num_vars(),
            "A": { "rows": rows, "cols": cols, "vals": vals },
            "b": self.b,
            "c": self.c,
            "cone": {
                "zero": self.cone.zero_dim,
                "nonneg": self.cone.nonneg_dim,
                "soc": self.cone.soc_dims,
            },
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, Error> {
        #[derive(Deserialize)]
        struct TripletsJson {
            rows: Vec<usize>,
            cols: Vec<usize>,
            vals: Vec<f64>,
        }
        #[derive(Deserialize)]
        struct ConeJson {
            #[serde(default)]
            zero: usize,
            #[serde(default)]
            nonneg: usize,
            #[serde(default)]
            soc: Vec<usize>,
        }
        #[derive(Deserialize)]
        struct ProgramJson {
            m: usize,
            n: usize,
            #[serde(rename = "A")]
            a: TripletsJson,
            b: Vec<f64>,
            c: Vec<f64>,
            cone: ConeJson,
        }
        let p: ProgramJson = serde_json::from_value(value.clone())?;
        if p.a.rows.len() != p.a.cols.len() || p.a.rows.len() != p.a.vals.len() {
            return Err(Error::InvalidArgument(
                "A triplet arrays have mismatched lengths".into(),
            ));
        }
        let triplets: Vec<(usize, usize, f64)> = p
            .a
            .rows
            .iter()
            .zip(&p.a.cols)
            .zip(&p.a.vals)
            .map(|((&r, &c), &v)| (r, c, v))
            .collect();
        let prog = ConeProgram {
            a: CscMatrix::from_triplets(p.m, p.n, triplets)?,
            b: p.b,
            c: p.c,
            cone: ConeSpec::new(p.cone.zero, p.cone.nonneg, p.cone.soc),
        };
        prog.validate()?;
        Ok(prog)
    }

    pub fn write_json_file(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        Self::from_json(&value)
    }
}

/// Solver configuration.
#[derive(Clone, Debug)]
pub struct SolverSettings {
    pub max_iters: usize,
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub eps_gap: f64,
    /// Over-relaxation parameter in (0, 2).
    pub alpha: f64,
    pub equilibrate: bool,
    pub equilibrate_sweeps: usize,
    pub warm_start: Option<WarmStart>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            eps_primal: 1e-4,
            eps_dual: 1e-4,
            eps_gap: 1e-4,
            alpha: 1.5,
            equilibrate: true,
            equilibrate_sweeps: 10,
            warm_start: None,
        }
    }
}

impl SolverSettings {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps_primal: eps,
            eps_dual: eps,
            eps_gap: eps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "over-relaxation alpha must lie in (0, 2), got {}",
                self.alpha
            )));
        }
        if self.eps_primal <= 0.0 || self.eps_dual <= 0.0 || self.eps_gap <= 0.0 {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Prior iterate used to warm-start the embedding.
#[derive(Clone, Debug)]
pub struct WarmStart {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub slack: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxItersReached,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub slack: Vec<f64>,
    pub objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// `y` for PrimalInfeasible (normalized to b^T y = -1), `nu` for
    /// DualInfeasible (normalized to c^T nu = -1).
    pub certificate: Option<Vec<f64>>,
}

/// Relative KKT residuals of a tau-normalized candidate.
pub fn residuals(prog: &ConeProgram, primal: &[f64], dual: &[f64], slack: &[f64]) -> Residuals {
    let m = prog.num_rows();
    let n = prog.num_vars();
    let mut work_m = vec![0.0; m];
    prog.a.matvec(primal, &mut work_m);
    for i in 0..m {
        work_m[i] += slack[i] - prog.b[i];
    }
    let primal_res = norm2(&work_m) / (1.0 + norm2(&prog.b));

    let mut work_n = vec![0.0; n];
    prog.a.matvec_transpose(dual, &mut work_n);
    for j in 0..n {
        work_n[j] += prog.c[j];
    }
    let dual_res = norm2(&work_n) / (1.0 + norm2(&prog.c));

    let obj_p = dot(&prog.c, primal);
    let obj_d = dot(&prog.b, dual);
    let gap = (obj_p + obj_d).abs() / (1.0 + obj_p.abs() + obj_d.abs());

    Residuals {
        primal: primal_res,
        dual: dual_res,
        gap,
    }
}

/// One iterate of the self-dual embedding in the program's own units:
/// `u = (nu, y, tau)`, `v = (0, mu, kappa)`.
#[derive(Clone, Debug)]
pub struct HsdeIterate {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// A tau-normalized solution candidate with its residuals.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub slack: Vec<f64>,
    pub residuals: Residuals,
}

pub enum Termination {
    Continue { candidate: Option<Candidate> },
    Optimal { candidate: Candidate },
    PrimalInfeasible { certificate: Vec<f64> },
    DualInfeasible { certificate: Vec<f64> },
}

fn primal_infeasibility_certificate(
    prog: &ConeProgram,
    y_dir: &[f64],
    eps: f64,
) -> Option<Vec<f64>> {
    let bty = dot(&prog.b, y_dir);
    if !(bty < 0.0) {
        return None;
    }
    let y: Vec<f64> = y_dir.iter().map(|v| v / -bty).collect();
    let y_norm = norm_inf(&y);
    if !y_norm.is_finite() || y_norm == 0.0 {
        return None;
    }
    let mut aty = vec![0.0; prog.num_vars()];
    prog.a.matvec_transpose(&y, &mut aty);
    if norm_inf(&aty) > eps * y_norm {
        return None;
    }
    if dual_membership_violation(&y, &prog.cone) > eps * y_norm.max(1.0) {
        return None;
    }
    Some(y)
}

fn dual_infeasibility_certificate(
    prog: &ConeProgram,
    nu_dir: &[f64],
    eps: f64,
) -> Option<Vec<f64>> {
    let ctnu = dot(&prog.c, nu_dir);
    if !(ctnu < 0.0) {
        return None;
    }
    let nu: Vec<f64> = nu_dir.iter().map(|v| v / -ctnu).collect();
    let mut anu = vec![0.0; prog.num_rows()];
    prog.a.matvec(&nu, &mut anu);
    let neg_anu: Vec<f64> = anu.iter().map(|v| -v).collect();
    let mu = project_cone(&neg_anu, &prog.cone).ok()?;
    let resid = anu
        .iter()
        .zip(&mu)
        .fold(0.0f64, |acc, (a, s)| acc.max((a + s).abs()));
    if resid > eps * norm_inf(&nu).max(1.0) {
        return None;
    }
    Some(nu)
}

/// Classify an iterate: optimal when all three residuals clear their
/// tolerances, an infeasibility status when tau has collapsed and the
/// corresponding certificate inequality clears its tolerance, and continue
/// otherwise. Ambiguous `tau ~ kappa ~ 0` keeps iterating (and eventually
/// reports MaxItersReached).
pub fn check_termination(
    prog: &ConeProgram,
    iterate: &HsdeIterate,
    settings: &SolverSettings,
) -> Termination {
    let n = prog.num_vars();
    let m = prog.num_rows();
    let tau = iterate.u[n + m];
    let kappa = iterate.v[n + m];

    if tau > TAU_FLOOR * kappa.max(1.0) {
        let primal: Vec<f64> = iterate.u[..n].iter().map(|x| x / tau).collect();
        let dual: Vec<f64> = iterate.u[n..n + m].iter().map(|x| x / tau).collect();
        let slack: Vec<f64> = iterate.v[n..n + m].iter().map(|x| x / tau).collect();
        let res = residuals(prog, &primal, &dual, &slack);
        let candidate = Candidate {
            primal,
            dual,
            slack,
            residuals: res,
        };
        if res.primal <= settings.eps_primal
            && res.dual <= settings.eps_dual
            && res.gap <= settings.eps_gap
        {
            Termination::Optimal { candidate }
        } else {
            Termination::Continue {
                candidate: Some(candidate),
            }
        }
    } else {
        if let Some(cert) =
            primal_infeasibility_certificate(prog, &iterate.u[n..n + m], settings.eps_primal)
        {
            return Termination::PrimalInfeasible { certificate: cert };
        }
        if let Some(cert) =
            dual_infeasibility_certificate(prog, &iterate.u[..n], settings.eps_dual)
        {
            return Termination::DualInfeasible { certificate: cert };
        }
        Termination::Continue { candidate: None }
    }
}

/// A prepared solve: equilibration plus one cached factorization, reusable
/// across warm-started repeat solves of the same program.
pub struct Solver {
    original: ConeProgram,
    /// Equilibrated and b-normalized problem the iteration actually runs on.
    scaled: ConeProgram,
    equi: Equilibration,
    /// Extra power-of-two scalar normalizing ||b||_inf of the scaled problem;
    /// primal and slack divide by it on the way out, duals are unaffected.
    b_scale: f64,
    cache: LinearSystemCache,
    cone: ConeSpec,
}

impl Solver {
    pub fn new(prog: &ConeProgram, settings: &SolverSettings) -> Result<Self, Error> {
        prog.validate()?;
        settings.validate()?;
        let (mut scaled, equi) = if settings.equilibrate {
            equilibrate(prog, settings.equilibrate_sweeps)
        } else {
            (
                prog.clone(),
                Equilibration::identity(prog.num_rows(), prog.num_vars()),
            )
        };
        let b_norm = norm_inf(&scaled.b);
        let b_scale = if settings.equilibrate && b_norm > 0.0 {
            equilibrate::pow2_round(1.0 / b_norm)
        } else {
            1.0
        };
        if b_scale != 1.0 {
            for v in scaled.b.iter_mut() {
                *v *= b_scale;
            }
        }
        let cache = linsys::factorize(&scaled)?;
        Ok(Self {
            original: prog.clone(),
            scaled,
            equi,
            b_scale,
            cache,
            cone: prog.cone.clone(),
        })
    }

    fn unscale_iterate(&self, u: &[f64], v: &[f64]) -> HsdeIterate {
        let n = self.original.num_vars();
        let m = self.original.num_rows();
        let mut uu = u.to_vec();
        let mut vv = v.to_vec();
        self.equi.unscale_primal(&mut uu[..n]);
        self.equi.unscale_dual(&mut uu[n..n + m]);
        self.equi.unscale_slack(&mut vv[n..n + m]);
        if self.b_scale != 1.0 {
            for x in uu[..n].iter_mut().chain(vv[n..n + m].iter_mut()) {
                *x /= self.b_scale;
            }
        }
        HsdeIterate { u: uu, v: vv }
    }

    fn unscale_primal_certificate(&self, mut cert: Vec<f64>) -> Vec<f64> {
        self.equi.unscale_dual(&mut cert);
        let bty = dot(&self.original.b, &cert);
        debug_assert!(bty < 0.0);
        for v in cert.iter_mut() {
            *v /= -bty;
        }
        cert
    }

    fn unscale_dual_certificate(&self, mut cert: Vec<f64>) -> Vec<f64> {
        self.equi.unscale_primal(&mut cert);
        let ctnu = dot(&self.original.c, &cert);
        debug_assert!(ctnu < 0.0);
        for v in cert.iter_mut() {
            *v /= -ctnu;
        }
        cert
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<SolveOutcome, Error> {
        settings.validate()?;
        let n = self.original.num_vars();
        let m = self.original.num_rows();
        let dim = n + m + 1;

        let mut u = vec![0.0; dim];
        let mut v = vec![0.0; dim];
        match &settings.warm_start {
            Some(ws) => {
                if ws.primal.len() != n || ws.dual.len() != m || ws.slack.len() != m {
                    return Err(Error::DimensionMismatch(
                        "warm start dimensions do not match the program".into(),
                    ));
                }
                u[..n].copy_from_slice(&ws.primal);
                self.equi.scale_primal(&mut u[..n]);
                u[n..n + m].copy_from_slice(&ws.dual);
                self.equi.scale_dual(&mut u[n..n + m]);
                v[n..n + m].copy_from_slice(&ws.slack);
                self.equi.scale_slack(&mut v[n..n + m]);
                if self.b_scale != 1.0 {
                    for x in u[..n].iter_mut().chain(v[n..n + m].iter_mut()) {
                        *x *= self.b_scale;
                    }
                }
                u[dim - 1] = 1.0;
            }
            None => {
                u[dim - 1] = 1.0;
                v[dim - 1] = 1.0;
            }
        }

        let mut scratch = Scratch::new(m, n);
        let mut u_tilde = vec![0.0; dim];
        let mut rhs = vec![0.0; dim];
        let mut best: Option<Candidate> = None;

        for iter in 0..=settings.max_iters {
            let tau = u[dim - 1];
            let kappa = v[dim - 1];
            if tau > TAU_FLOOR * kappa.max(1.0) {
                let iterate = self.unscale_iterate(&u, &v);
                match check_termination(&self.original, &iterate, settings) {
                    Termination::Optimal { candidate } => {
                        return Ok(self.finish(SolveStatus::Optimal, candidate, iter, None));
                    }
                    Termination::Continue { candidate } => {
                        if let Some(c) = candidate {
                            let better = best
                                .as_ref()
                                .map(|b| c.residuals.max() < b.residuals.max())
                                .unwrap_or(true);
                            if better {
                                best = Some(c);
                            }
                        }
                    }
                    // tau > floor: the certificate branch cannot fire
                    _ => unreachable!(),
                }
            } else {
                // Certificates are judged on the equilibrated problem, whose
                // entries are O(1); raw data can be so small that any dual
                // direction would spuriously pass a relative tolerance.
                let raw = HsdeIterate {
                    u: u.clone(),
                    v: v.clone(),
                };
                match check_termination(&self.scaled, &raw, settings) {
                    Termination::PrimalInfeasible { certificate } => {
                        let cert = self.unscale_primal_certificate(certificate);
                        return Ok(self.finish_infeasible(
                            SolveStatus::PrimalInfeasible,
                            cert,
                            iter,
                        ));
                    }
                    Termination::DualInfeasible { certificate } => {
                        let cert = self.unscale_dual_certificate(certificate);
                        return Ok(self.finish_infeasible(
                            SolveStatus::DualInfeasible,
                            cert,
                            iter,
                        ));
                    }
                    _ => {}
                }
            }
            if iter == settings.max_iters {
                break;
            }

            for i in 0..dim {
                rhs[i] = u[i] + v[i];
            }
            self.cache.apply(&rhs, &mut u_tilde, &mut scratch);
            let alpha = settings.alpha;
            for i in 0..dim {
                u_tilde[i] = alpha * u_tilde[i] + (1.0 - alpha) * u[i];
            }
            for i in 0..dim {
                u[i] = u_tilde[i] - v[i];
            }
            project_dual_cone_in_place(&mut u[n..n + m], &self.cone)?;
            if u[dim - 1] < 0.0 {
                u[dim - 1] = 0.0;
            }
            for i in 0..dim {
                v[i] = v[i] - u_tilde[i] + u[i];
            }
        }

        let candidate = best.unwrap_or(Candidate {
            primal: vec![0.0; n],
            dual: vec![0.0; m],
            slack: vec![0.0; m],
            residuals: Residuals {
                primal: f64::INFINITY,
                dual: f64::INFINITY,
                gap: f64::INFINITY,
            },
        });
        Ok(self.finish(SolveStatus::MaxItersReached, candidate, settings.max_iters, None))
    }

    fn finish(
        &self,
        status: SolveStatus,
        candidate: Candidate,
        iterations: usize,
        certificate: Option<Vec<f64>>,
    ) -> SolveOutcome {
        let objective = dot(&self.original.c, &candidate.primal);
        SolveOutcome {
            status,
            primal: candidate.primal,
            dual: candidate.dual,
            slack: candidate.slack,
            objective,
            residuals: candidate.residuals,
            iterations,
            certificate,
        }
    }

    fn finish_infeasible(
        &self,
        status: SolveStatus,
        certificate: Vec<f64>,
        iterations: usize,
    ) -> SolveOutcome {
        let n = self.original.num_vars();
        let m = self.original.num_rows();
        let (primal, dual) = match status {
            SolveStatus::PrimalInfeasible => (vec![0.0; n], certificate.clone()),
            _ => (certificate.clone(), vec![0.0; m]),
        };
        SolveOutcome {
            status,
            primal,
            dual,
            slack: vec![0.0; m],
            objective: f64::NAN,
            residuals: Residuals {
                primal: f64::NAN,
                dual: f64::NAN,
                gap: f64::NAN,
            },
            iterations,
            certificate: Some(certificate),
        }
    }
}

/// One-shot solve.
pub fn solve(prog: &ConeProgram, settings: &SolverSettings) -> Result<SolveOutcome, Error> {
    Solver::new(prog, settings)?.solve(settings)
}
