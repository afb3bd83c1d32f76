//! Channel state information pipeline: compressive selection of relevant
//! links, regularized high-dimensional channel estimation over a Gauss-Markov
//! process, and scenario-based stochastic coordinated beamforming under
//! mixed CSI.
//!
//! Estimation minimizes a least-squares loss plus a weighted l1 norm
//! (spatial prior: sparse large-scale fading, weights are inverse large-scale
//! coefficients) and a squared l2 norm centered at the one-step temporal
//! prediction. The solver is a monotone accelerated proximal gradient method
//! whose proximal map is the per-entry complex soft threshold; a cone-program
//! formulation of the same objective is kept as a cross-check oracle.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::cones::ConeSpec;
use crate::dense::solve_complex;
use crate::network::{evaluate_sinr, NetworkInstance};
use crate::rng::{standard_complex, stream};
use crate::solver::{solve, ConeProgram, SolveStatus, SolverSettings};
use crate::sparse::CscMatrix;
use crate::stuffing::{
    build_template, extract_beamformer, Family, ProblemDims, StuffInput,
};
use crate::Error;

/// First-order stationary Gauss-Markov fading process:
/// `h_i = eta h_{i-1} + sqrt(1 - eta^2) z_i`, `z_i ~ CN(0, diag(gains))`,
/// with `h_0` drawn from the stationary distribution.
#[derive(Clone, Debug)]
pub struct FadingProcess {
    pub temporal_coefficient: f64,
    pub gains: Vec<f64>,
    pub blocks: usize,
}

impl FadingProcess {
    pub fn validate(&self) -> Result<(), Error> {
        if !(0.0..1.0).contains(&self.temporal_coefficient) {
            return Err(Error::InvalidArgument(
                "temporal coefficient must lie in [0, 1)".into(),
            ));
        }
        if self.blocks == 0 || self.gains.is_empty() {
            return Err(Error::InvalidArgument(
                "process needs at least one block and one coefficient".into(),
            ));
        }
        Ok(())
    }

    /// blocks x dim matrix of true channels.
    pub fn simulate(&self, seed: u64) -> Array2<Complex64> {
        let d = self.gains.len();
        let eta = self.temporal_coefficient;
        let innov = (1.0 - eta * eta).sqrt();
        let mut rng = stream(seed, "csi/process");
        let mut h = Array2::<Complex64>::zeros((self.blocks, d));
        for j in 0..d {
            h[(0, j)] = standard_complex(&mut rng) * self.gains[j].sqrt();
        }
        for i in 1..self.blocks {
            for j in 0..d {
                let z = standard_complex(&mut rng) * self.gains[j].sqrt();
                h[(i, j)] = h[(i - 1, j)] * eta + z * innov;
            }
        }
        h
    }
}

/// Pilot matrix with i.i.d. CN(0, 1/m) entries.
pub fn draw_pilots(pilots: usize, dim: usize, seed: u64) -> Array2<Complex64> {
    let scale = (1.0 / pilots as f64).sqrt();
    let mut rng = stream(seed, "csi/pilots");
    Array2::from_shape_fn((pilots, dim), |_| standard_complex(&mut rng) * scale)
}

/// y = X h + n with CN(0, noise_var) noise per sample.
pub fn observe(
    x: &Array2<Complex64>,
    h: &Array1<Complex64>,
    noise_var: f64,
    seed: u64,
) -> Array1<Complex64> {
    let mut rng = stream(seed, "csi/noise");
    let std = noise_var.sqrt();
    let mut y = x.dot(h);
    for v in y.iter_mut() {
        *v += standard_complex(&mut rng) * std;
    }
    y
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Per-coefficient l1 weights.
    pub weights: Vec<f64>,
    /// Gauss-Markov coefficient used for the temporal anchor.
    pub temporal_coefficient: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Record the (monotone) objective trajectory; test diagnostics.
    pub record_trace: bool,
}

impl EstimateOptions {
    pub fn new(lambda1: f64, lambda2: f64, weights: Vec<f64>, temporal_coefficient: f64) -> Self {
        Self {
            lambda1,
            lambda2,
            weights,
            temporal_coefficient,
            max_iters: 5000,
            tol: 1e-8,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EstimateResult {
    pub estimate: Array1<Complex64>,
    pub objective: f64,
    pub iterations: usize,
    /// False when the iterate-change criterion was not met within the
    /// iteration budget; the best iterate found is returned regardless.
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Inverse-gain l1 weights with a floor to avoid blowup on negligible links.
pub fn inverse_gain_weights(gains: &[f64], floor_fraction: f64) -> Vec<f64> {
    let max_g = gains.iter().cloned().fold(0.0f64, f64::max);
    let floor = floor_fraction * max_g;
    gains.iter().map(|&g| 1.0 / g.max(floor)).collect()
}

fn soft_threshold(h: Complex64, threshold: f64) -> Complex64 {
    let mag = h.norm();
    if mag <= threshold {
        Complex64::new(0.0, 0.0)
    } else {
        h * ((mag - threshold) / mag)
    }
}

/// Largest singular value squared of X by power iteration on X^H X.
fn spectral_norm_sq(x: &Array2<Complex64>) -> f64 {
    let d = x.ncols();
    if d == 0 || x.nrows() == 0 {
        return 0.0;
    }
    let mut rng = stream(0x5eed, "csi/power-iteration");
    let mut v = Array1::from_shape_fn(d, |_| standard_complex(&mut rng));
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        let xv = x.dot(&v);
        let mut w = Array1::<Complex64>::zeros(d);
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..x.nrows() {
                acc += x[(i, j)].conj() * xv[i];
            }
            w[j] = acc;
        }
        let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let new_lambda = norm;
        v = w.mapv(|c| c / norm);
        if (new_lambda - lambda).abs() <= 1e-12 * new_lambda {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    // tiny inflation keeps 1/Lip a valid step under rounding
    lambda * (1.0 + 1e-9)
}

fn objective_value(
    y: &Array1<Complex64>,
    x: &Array2<Complex64>,
    h: &Array1<Complex64>,
    anchor: &Array1<Complex64>,
    opts: &EstimateOptions,
) -> f64 {
    let r = x.dot(h) - y;
    let ls: f64 = 0.5 * r.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let l1: f64 = h
        .iter()
        .zip(&opts.weights)
        .map(|(c, w)| w * c.norm())
        .sum::<f64>()
        * opts.lambda1;
    let l2: f64 = h
        .iter()
        .zip(anchor)
        .map(|(c, a)| (c - a).norm_sqr())
        .sum::<f64>()
        * opts.lambda2;
    ls + l1 + l2
}

/// Minimize `0.5 ||y - X h||^2 + lambda1 sum_j w_j |h_j|
/// + lambda2 ||h - eta h_prev||^2` by a monotone accelerated proximal
/// gradient method (prox step plus Nesterov momentum; the reported iterate
/// never increases the objective).
pub fn estimate_block(
    y: &Array1<Complex64>,
    x: &Array2<Complex64>,
    h_prev: Option<&Array1<Complex64>>,
    opts: &EstimateOptions,
) -> Result<EstimateResult, Error> {
    let (m, d) = (x.nrows(), x.ncols());
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "observation has {} samples, pilots have {m}",
            y.len()
        )));
    }
    if opts.weights.len() != d {
        return Err(Error::DimensionMismatch("weights length != dim".into()));
    }
    if opts.lambda1 < 0.0 || opts.lambda2 < 0.0 {
        return Err(Error::InvalidArgument("lambdas must be nonnegative".into()));
    }
    if opts.weights.iter().any(|&w| !(w > 0.0)) && opts.lambda1 > 0.0 {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let anchor = match h_prev {
        Some(prev) => {
            if prev.len() != d {
                return Err(Error::DimensionMismatch("prior estimate length != dim".into()));
            }
            prev.mapv(|c| c * opts.temporal_coefficient)
        }
        None => Array1::zeros(d),
    };

    let lip = spectral_norm_sq(x) + 2.0 * opts.lambda2;
    if lip == 0.0 {
        // no data and no temporal pull: the l1 term alone is minimized at 0
        let h0 = Array1::zeros(d);
        let obj = objective_value(y, x, &h0, &anchor, opts);
        return Ok(EstimateResult {
            estimate: h0,
            objective: obj,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let step = 1.0 / lip;

    let grad = |point: &Array1<Complex64>| -> Array1<Complex64> {
        let r = x.dot(point) - y;
        let mut g = Array1::<Complex64>::zeros(d);
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += x[(i, j)].conj() * r[i];
            }
            g[j] = acc + (point[j] - anchor[j]) * (2.0 * opts.lambda2);
        }
        g
    };

    let mut x_cur: Array1<Complex64> = Array1::zeros(d);
    let mut f_cur = objective_value(y, x, &x_cur, &anchor, opts);
    let mut z_prev = x_cur.clone();
    let mut y_acc = x_cur.clone();
    let mut t = 1.0f64;
    let mut trace = if opts.record_trace {
        vec![f_cur]
    } else {
        Vec::new()
    };
    let mut converged = false;
    let mut iterations = 0usize;

    for iter in 1..=opts.max_iters {
        iterations = iter;
        let g = grad(&y_acc);
        let mut z = Array1::<Complex64>::zeros(d);
        for j in 0..d {
            z[j] = soft_threshold(
                y_acc[j] - g[j] * step,
                step * opts.lambda1 * opts.weights[j],
            );
        }
        let f_z = objective_value(y, x, &z, &anchor, opts);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let x_prev = x_cur.clone();
        if f_z <= f_cur {
            x_cur = z.clone();
            f_cur = f_z;
        }
        // monotone variant: momentum runs on the prox point even when the
        // monitored iterate stays put
        for j in 0..d {
            y_acc[j] = x_cur[j]
                + (z[j] - x_cur[j]) * (t / t_next)
                + (x_cur[j] - x_prev[j]) * ((t - 1.0) / t_next);
        }
        t = t_next;
        if opts.record_trace {
            trace.push(f_cur);
        }

        let dz: f64 = z
            .iter()
            .zip(&z_prev)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let z_norm: f64 = z_prev.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        z_prev = z;
        if dz <= opts.tol * z_norm.max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(EstimateResult {
        estimate: x_cur,
        objective: f_cur,
        iterations,
        converged,
        trace,
    })
}

/// Unregularized least squares: the classical estimate for m >= d, the
/// minimum-norm interpolator for m < d.
pub fn least_squares_min_norm(
    y: &Array1<Complex64>,
    x: &Array2<Complex64>,
) -> Result<Array1<Complex64>, Error> {
    let (m, d) = (x.nrows(), x.ncols());
    if y.len() != m {
        return Err(Error::DimensionMismatch("observation/pilot mismatch".into()));
    }
    if m >= d {
        // solve (X^H X) h = X^H y
        let mut gram = Array2::<Complex64>::zeros((d, d));
        for a in 0..d {
            for b in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    acc += x[(i, a)].conj() * x[(i, b)];
                }
                gram[(a, b)] = acc;
            }
        }
        let mut rhs = Array2::<Complex64>::zeros((d, 1));
        for a in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += x[(i, a)].conj() * y[i];
            }
            rhs[(a, 0)] = acc;
        }
        let sol = solve_complex(&gram, &rhs)?;
        Ok(Array1::from_shape_fn(d, |a| sol[(a, 0)]))
    } else {
        // h = X^H (X X^H)^{-1} y
        let mut gram = Array2::<Complex64>::zeros((m, m));
        for a in 0..m {
            for b in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    acc += x[(a, j)] * x[(b, j)].conj();
                }
                gram[(a, b)] = acc;
            }
        }
        let mut rhs = Array2::<Complex64>::zeros((m, 1));
        for a in 0..m {
            rhs[(a, 0)] = y[a];
        }
        let w = solve_complex(&gram, &rhs)?;
        let mut h = Array1::<Complex64>::zeros(d);
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += x[(i, j)].conj() * w[(i, 0)];
            }
            h[j] = acc;
        }
        Ok(h)
    }
}

/// Cone-program route to the same estimation objective; the cross-check
/// oracle for the proximal-gradient path. Returns (objective, estimate).
pub fn estimate_block_socp(
    y: &Array1<Complex64>,
    x: &Array2<Complex64>,
    h_prev: Option<&Array1<Complex64>>,
    opts: &EstimateOptions,
    settings: &SolverSettings,
) -> Result<(f64, Array1<Complex64>), Error> {
    let (m, d) = (x.nrows(), x.ncols());
    let anchor = match h_prev {
        Some(prev) => prev.mapv(|c| c * opts.temporal_coefficient),
        None => Array1::zeros(d),
    };
    // variables: Re h (d), Im h (d), s (d), r, q
    let re_h = |j: usize| j;
    let im_h = |j: usize| d + j;
    let s_var = |j: usize| 2 * d + j;
    let r_var = 3 * d;
    let q_var = 3 * d + 1;
    let n_vars = 3 * d + 2;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = Vec::new();
    let mut soc = Vec::new();
    let mut row = 0usize;

    // squared-norm epigraph: || [2(y - Xh); r - 1] || <= r + 1
    soc.push(2 * m + 2);
    triplets.push((row, r_var, -1.0));
    b.push(1.0);
    row += 1;
    for i in 0..m {
        for j in 0..d {
            let xi = x[(i, j)];
            if xi.re != 0.0 {
                triplets.push((row, re_h(j), 2.0 * xi.re));
                triplets.push((row + 1, im_h(j), 2.0 * xi.re));
            }
            if xi.im != 0.0 {
                triplets.push((row, im_h(j), -2.0 * xi.im));
                triplets.push((row + 1, re_h(j), 2.0 * xi.im));
            }
        }
        b.push(2.0 * y[i].re);
        b.push(2.0 * y[i].im);
        row += 2;
    }
    triplets.push((row, r_var, -1.0));
    b.push(-1.0);
    row += 1;

    // per-entry magnitude cones |h_j| <= s_j
    for j in 0..d {
        soc.push(3);
        triplets.push((row, s_var(j), -1.0));
        b.push(0.0);
        row += 1;
        triplets.push((row, re_h(j), -1.0));
        b.push(0.0);
        row += 1;
        triplets.push((row, im_h(j), -1.0));
        b.push(0.0);
        row += 1;
    }

    // temporal squared-norm epigraph: ||h - anchor||^2 <= q
    soc.push(2 * d + 2);
    triplets.push((row, q_var, -1.0));
    b.push(1.0);
    row += 1;
    for j in 0..d {
        triplets.push((row, re_h(j), -2.0));
        b.push(-2.0 * anchor[j].re);
        row += 1;
        triplets.push((row, im_h(j), -2.0));
        b.push(-2.0 * anchor[j].im);
        row += 1;
    }
    triplets.push((row, q_var, -1.0));
    b.push(-1.0);
    row += 1;

    let mut c = vec![0.0; n_vars];
    c[r_var] = 0.5;
    c[q_var] = opts.lambda2;
    for j in 0..d {
        c[s_var(j)] = opts.lambda1 * opts.weights[j];
    }

    let prog = ConeProgram {
        a: CscMatrix::from_triplets(row, n_vars, triplets)?,
        b,
        c,
        cone: ConeSpec::new(0, 0, soc),
    };
    let out = solve(&prog, settings)?;
    if out.status != SolveStatus::Optimal {
        return Err(Error::Indeterminate {
            iterations: out.iterations,
            max_residual: out.residuals.max(),
        });
    }
    let h = Array1::from_shape_fn(d, |j| {
        Complex64::new(out.primal[re_h(j)], out.primal[im_h(j)])
    });
    Ok((out.objective, h))
}

/// Indices of the `budget` largest large-scale coefficients; ties break to
/// the lower index. Returned sorted ascending.
pub fn select_relevant_links(gains: &[f64], budget: usize) -> Vec<usize> {
    let budget = budget.min(gains.len());
    let mut idx: Vec<usize> = (0..gains.len()).collect();
    idx.sort_by(|&a, &b| {
        gains[b]
            .partial_cmp(&gains[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = idx.into_iter().take(budget).collect();
    chosen.sort_unstable();
    chosen
}

/// Mixed CSI: imperfect instantaneous estimates on the relevant links,
/// distribution knowledge only elsewhere.
#[derive(Clone, Debug)]
pub struct MixedCsi {
    /// Flattened link ids `user * num_rrhs + rrh`, sorted.
    pub relevant: Vec<usize>,
    /// users x antennas instantaneous estimates (zero off the relevant set).
    pub estimates: Array2<Complex64>,
    /// users x rrhs per-link estimation error variance.
    pub error_var: Array2<f64>,
    /// users x rrhs statistical variances.
    pub gains: Array2<f64>,
}

/// Draw a mixed-CSI state for an instance: the `budget` strongest links get
/// instantaneous estimates with an `error_fraction` share of their variance
/// left as estimation error; the rest stay statistical.
pub fn acquire_mixed_csi(
    inst: &NetworkInstance,
    budget: usize,
    error_fraction: f64,
    seed: u64,
) -> Result<MixedCsi, Error> {
    if !(0.0..=1.0).contains(&error_fraction) {
        return Err(Error::InvalidArgument(
            "error fraction must lie in [0, 1]".into(),
        ));
    }
    let k = inst.num_users();
    let l = inst.num_rrhs();
    let flat: Vec<f64> = inst.gains.iter().copied().collect();
    let relevant = select_relevant_links(&flat, budget);
    let member = {
        let mut mask = vec![false; k * l];
        for &id in &relevant {
            mask[id] = true;
        }
        mask
    };
    let mut estimates = Array2::<Complex64>::zeros((k, inst.total_antennas()));
    let mut error_var = Array2::<f64>::zeros((k, l));
    let mut rng = stream(seed, "csi/acquisition");
    for ki in 0..k {
        for li in 0..l {
            let g = inst.gains[(ki, li)];
            if member[ki * l + li] {
                error_var[(ki, li)] = error_fraction * g;
                let est_std = ((1.0 - error_fraction) * g).sqrt();
                for a in inst.antenna_range(li) {
                    estimates[(ki, a)] = standard_complex(&mut rng) * est_std;
                }
            }
        }
    }
    Ok(MixedCsi {
        relevant,
        estimates,
        error_var,
        gains: inst.gains.clone(),
    })
}

/// Classical scenario-optimization sample bound for violation probability
/// `epsilon` at confidence `1 - confidence` with `num_vars` decision
/// variables: ceil((2/eps) (ln(1/conf) + num_vars)).
pub fn scenario_sample_bound(epsilon: f64, confidence: f64, num_vars: usize) -> usize {
    assert!(epsilon > 0.0 && epsilon < 1.0);
    assert!(confidence > 0.0 && confidence < 1.0);
    ((2.0 / epsilon) * ((1.0 / confidence).ln() + num_vars as f64)).ceil() as usize
}

/// Draw `count` channel matrices from the mixed-CSI distribution. Draws are
/// sequential in sample order, so a smaller count is a prefix of a larger
/// one on the same seed.
pub fn sample_mixed_channels(
    mixed: &MixedCsi,
    inst: &NetworkInstance,
    count: usize,
    seed: u64,
    label: &str,
) -> Vec<Array2<Complex64>> {
    let k = inst.num_users();
    let l = inst.num_rrhs();
    let member = {
        let mut mask = vec![false; k * l];
        for &id in &mixed.relevant {
            mask[id] = true;
        }
        mask
    };
    let mut rng = stream(seed, label);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut h = Array2::<Complex64>::zeros((k, inst.total_antennas()));
        for ki in 0..k {
            for li in 0..l {
                let g = mixed.gains[(ki, li)];
                if member[ki * l + li] {
                    let err_std = mixed.error_var[(ki, li)].sqrt();
                    for a in inst.antenna_range(li) {
                        h[(ki, a)] = mixed.estimates[(ki, a)] + standard_complex(&mut rng) * err_std;
                    }
                } else {
                    let std = g.sqrt();
                    for a in inst.antenna_range(li) {
                        h[(ki, a)] = standard_complex(&mut rng) * std;
                    }
                }
            }
        }
        out.push(h);
    }
    out
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub beams: Array2<Complex64>,
    pub transmit_power_w: f64,
    /// Worst per-user empirical outage over the fresh evaluation samples.
    pub empirical_outage: f64,
    pub per_user_outage: Vec<f64>,
    /// Worst QoS shortfall over the sampled (training) constraints; a
    /// feasibility round trip of the returned beamformer.
    pub max_sampled_violation: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub enum ScenarioResult {
    Feasible(ScenarioOutcome),
    Infeasible,
}

/// Multiplicative slack when counting outages: a target met to solver
/// precision is not an outage.
const OUTAGE_SLACK: f64 = 1.0 - 1e-6;

/// Scenario-based stochastic coordinated beamforming: sample `samples`
/// channels from the mixed-CSI distribution, require the QoS targets on all
/// of them simultaneously (plus per-RRH caps), minimize total transmit
/// power, then measure empirical outage on `eval_samples` fresh draws.
pub fn scenario_scb(
    mixed: &MixedCsi,
    samples: usize,
    inst: &NetworkInstance,
    eval_samples: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<ScenarioResult, Error> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    inst.validate()?;
    let channels = sample_mixed_channels(mixed, inst, samples, seed, "csi/scb-train");
    let dims = ProblemDims::with_samples(inst.antennas.clone(), inst.num_users(), samples);
    let template = build_template(Family::ScenarioScb, &dims)?;
    let input = StuffInput {
        channels: &channels,
        noise_power: &inst.qos.noise_w,
        sinr_target: &inst.qos.sinr_target,
        max_transmit: &inst.power.max_transmit_w,
        drain_efficiency: &inst.power.drain_efficiency,
        group_weights: &[],
    };
    let prog = template.stuff(&input)?;
    let out = solve(&prog, settings)?;
    match out.status {
        SolveStatus::Optimal => {}
        SolveStatus::PrimalInfeasible => return Ok(ScenarioResult::Infeasible),
        _ => {
            return Err(Error::Indeterminate {
                iterations: out.iterations,
                max_residual: out.residuals.max(),
            })
        }
    }
    let v = extract_beamformer(Family::ScenarioScb, &dims, &out.primal)?;
    let transmit: f64 = (0..inst.num_rrhs())
        .map(|l| {
            let g: f64 = inst
                .antenna_range(l)
                .map(|a| v.row(a).iter().map(|c| c.norm_sqr()).sum::<f64>())
                .sum();
            g / inst.power.drain_efficiency[l]
        })
        .sum();

    let mut max_violation = 0.0f64;
    for h in &channels {
        let sinr = evaluate_sinr(h, &v, &inst.qos.noise_w);
        for (k, s) in sinr.iter().enumerate() {
            max_violation = max_violation.max(inst.qos.sinr_target[k] - s);
        }
    }

    let (worst, per_user) = empirical_outage(mixed, inst, &v, eval_samples, seed);
    Ok(ScenarioResult::Feasible(ScenarioOutcome {
        beams: v,
        transmit_power_w: transmit,
        empirical_outage: worst,
        per_user_outage: per_user,
        max_sampled_violation: max_violation.max(0.0),
        samples,
    }))
}

/// Outage rates of a beamformer over fresh mixed-CSI draws: per-user share
/// of samples whose SINR falls short of the target.
pub fn empirical_outage(
    mixed: &MixedCsi,
    inst: &NetworkInstance,
    v: &Array2<Complex64>,
    eval_samples: usize,
    seed: u64,
) -> (f64, Vec<f64>) {
    let k = inst.num_users();
    let mut failures = vec![0usize; k];
    let fresh = sample_mixed_channels(mixed, inst, eval_samples, seed, "csi/scb-eval");
    for h in &fresh {
        let sinr = evaluate_sinr(h, v, &inst.qos.noise_w);
        for (ki, s) in sinr.iter().enumerate() {
            if *s < inst.qos.sinr_target[ki] * OUTAGE_SLACK {
                failures[ki] += 1;
            }
        }
    }
    let per_user: Vec<f64> = failures
        .iter()
        .map(|&f| f as f64 / eval_samples as f64)
        .collect();
    let worst = per_user.iter().cloned().fold(0.0f64, f64::max);
    (worst, per_user)
}

/// The three estimation regimes reported by the experiment runner.
#[derive(Clone, Debug)]
pub struct EstimationExperiment {
    pub dim: usize,
    pub pilots: usize,
    pub blocks: usize,
    pub temporal_coefficient: f64,
    /// Per-coefficient large-scale variances.
    pub gains: Vec<f64>,
    pub noise_var: f64,
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    pub weight_floor_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct MseReport {
    /// Mean squared error per regime (summed over coefficients, averaged
    /// over seeds and blocks 2..length).
    pub ls: f64,
    pub spatial: f64,
    pub spatio_temporal: f64,
    pub lambda1_spatial: f64,
    pub lambda1_temporal: f64,
    pub lambda2_temporal: f64,
    /// Per-seed (ls, spatial, spatio_temporal) at the selected lambdas.
    pub per_seed: Vec<(u64, f64, f64, f64)>,
}

/// Simulate the process per seed, estimate each block sequentially under the
/// three regimes, and pick each regularized regime's lambdas by the grid
/// value with the best seed-averaged error.
pub fn run_estimation_experiment(
    exp: &EstimationExperiment,
    seeds: &[u64],
) -> Result<MseReport, Error> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    if exp.blocks < 2 {
        return Err(Error::InvalidArgument(
            "need at least two blocks to score blocks 2..length".into(),
        ));
    }
    let process = FadingProcess {
        temporal_coefficient: exp.temporal_coefficient,
        gains: exp.gains.clone(),
        blocks: exp.blocks,
    };
    process.validate()?;
    let weights = inverse_gain_weights(&exp.gains, exp.weight_floor_fraction);
    let scored_blocks = (exp.blocks - 1) as f64;

    let n_l1 = exp.lambda1_grid.len();
    let n_l2 = exp.lambda2_grid.len();
    if n_l1 == 0 || n_l2 == 0 {
        return Err(Error::InvalidArgument("lambda grids must be nonempty".into()));
    }
    let mut ls_per_seed = vec![0.0f64; seeds.len()];
    let mut spatial_per_seed = vec![vec![0.0f64; seeds.len()]; n_l1];
    let mut temporal_per_seed = vec![vec![0.0f64; seeds.len()]; n_l1 * n_l2];

    for (si, &seed) in seeds.iter().enumerate() {
        let truth = process.simulate(seed);
        let mut pilots = Vec::with_capacity(exp.blocks);
        let mut obs = Vec::with_capacity(exp.blocks);
        for block in 0..exp.blocks {
            let x = draw_pilots(exp.pilots, exp.dim, seed ^ (0x9e37 + block as u64));
            let h_i = truth.row(block).to_owned();
            let y = observe(&x, &h_i, exp.noise_var, seed ^ (0x51ed + block as u64));
            pilots.push(x);
            obs.push(y);
        }
        let err = |est: &Array1<Complex64>, block: usize| -> f64 {
            est.iter()
                .zip(truth.row(block))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum()
        };

        // unregularized least squares, block by block
        for block in 1..exp.blocks {
            let h = least_squares_min_norm(&obs[block], &pilots[block])?;
            ls_per_seed[si] += err(&h, block);
        }
        ls_per_seed[si] /= scored_blocks;

        // spatial prior only
        for (ai, &l1) in exp.lambda1_grid.iter().enumerate() {
            let opts = EstimateOptions::new(l1, 0.0, weights.clone(), exp.temporal_coefficient);
            for block in 1..exp.blocks {
                let r = estimate_block(&obs[block], &pilots[block], None, &opts)?;
                spatial_per_seed[ai][si] += err(&r.estimate, block);
            }
            spatial_per_seed[ai][si] /= scored_blocks;
        }

        // spatial + temporal, chained on its own estimates
        for (ai, &l1) in exp.lambda1_grid.iter().enumerate() {
            for (bi, &l2) in exp.lambda2_grid.iter().enumerate() {
                let opts = EstimateOptions::new(l1, l2, weights.clone(), exp.temporal_coefficient);
                let mut prev: Option<Array1<Complex64>> = None;
                let mut acc = 0.0;
                for block in 0..exp.blocks {
                    let r = estimate_block(&obs[block], &pilots[block], prev.as_ref(), &opts)?;
                    if block >= 1 {
                        acc += err(&r.estimate, block);
                    }
                    prev = Some(r.estimate);
                }
                temporal_per_seed[ai * n_l2 + bi][si] += acc / scored_blocks;
            }
        }
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ls = mean(&ls_per_seed);
    let (best_spatial_idx, spatial) = spatial_per_seed
        .iter()
        .map(|col| mean(col))
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let (best_temporal_idx, spatio_temporal) = temporal_per_seed
        .iter()
        .map(|col| mean(col))
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    let per_seed = seeds
        .iter()
        .enumerate()
        .map(|(si, &seed)| {
            (
                seed,
                ls_per_seed[si],
                spatial_per_seed[best_spatial_idx][si],
                temporal_per_seed[best_temporal_idx][si],
            )
        })
        .collect();

    Ok(MseReport {
        ls,
        spatial,
        spatio_temporal,
        lambda1_spatial: exp.lambda1_grid[best_spatial_idx],
        lambda1_temporal: exp.lambda1_grid[best_temporal_idx / n_l2],
        lambda2_temporal: exp.lambda2_grid[best_temporal_idx % n_l2],
        per_seed,
    })
}
