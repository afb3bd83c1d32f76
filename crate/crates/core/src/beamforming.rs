//! Coordinated beamforming algorithms: power minimization, three-stage group
//! sparse beamforming for network power minimization, max-min rate
//! optimization with fixed-direction baselines, and an exhaustive
//! enumeration oracle for small networks.
//!
//! Every convex subproblem goes through the stuffing templates and the cone
//! solver. Templates are cached per (family, dimensions), so feasibility
//! sweeps re-stuff instead of re-canonicalizing.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::cones::ConeSpec;
use crate::dense::solve_complex;
use crate::network::{network_power, NetworkInstance};
use crate::solver::{solve, ConeProgram, SolveStatus, SolverSettings, WarmStart};
use crate::sparse::CscMatrix;
use crate::stuffing::{
    build_template, extract_beamformer, DataBuffer, Family, ProblemDims, StuffInput,
    StuffingTemplate,
};
use crate::Error;

/// Aggregate beamformer with its per-RRH row grouping.
#[derive(Clone, Debug)]
pub struct BeamformingMatrix {
    /// antennas x users.
    pub coefficients: Array2<Complex64>,
    /// antennas per RRH group.
    pub groups: Vec<usize>,
}

impl BeamformingMatrix {
    pub fn zeros(antennas: &[usize], users: usize) -> Self {
        let n: usize = antennas.iter().sum();
        Self {
            coefficients: Array2::zeros((n, users)),
            groups: antennas.to_vec(),
        }
    }

    fn group_base(&self, l: usize) -> usize {
        self.groups[..l].iter().sum()
    }

    /// l2 norm of RRH `l`'s coefficient block.
    pub fn group_norm(&self, l: usize) -> f64 {
        let base = self.group_base(l);
        (base..base + self.groups[l])
            .map(|a| {
                self.coefficients
                    .row(a)
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn group_norms(&self) -> Vec<f64> {
        (0..self.groups.len()).map(|l| self.group_norm(l)).collect()
    }

    /// Total efficiency-weighted transmit power.
    pub fn transmit_power(&self, drain_efficiency: &[f64]) -> f64 {
        (0..self.groups.len())
            .map(|l| {
                let g = self.group_norm(l);
                g * g / drain_efficiency[l]
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct PowerminSolution {
    pub beams: BeamformingMatrix,
    /// Sum of per-RRH (1/eta) * ||group||^2.
    pub transmit_power_w: f64,
    /// The solver's epigraph value (square root of the weighted power).
    pub objective_norm: f64,
}

#[derive(Clone, Debug)]
pub enum PowerminOutcome {
    Feasible(PowerminSolution),
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct Stage1Solution {
    pub beams: BeamformingMatrix,
    pub group_norms: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub enum Stage1Outcome {
    Feasible(Stage1Solution),
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SelectOutcome {
    pub active: Vec<usize>,
    pub probes: usize,
    pub indeterminate_probes: usize,
}

#[derive(Clone, Debug)]
pub enum SelectResult {
    Active(SelectOutcome),
    Infeasible,
}

/// Assembled result of the three-stage group sparse beamforming run.
#[derive(Clone, Debug)]
pub struct GsbfResult {
    pub active: Vec<usize>,
    pub beams: BeamformingMatrix,
    pub network_power_w: f64,
    pub stage1_group_norms: Vec<f64>,
    /// Switch-off priority per RRH (ascending = first to switch off).
    pub priorities: Vec<f64>,
    pub probes: usize,
    pub indeterminate_probes: usize,
}

#[derive(Clone, Debug)]
pub enum GsbfOutcome {
    Complete(GsbfResult),
    Infeasible,
}

#[derive(Clone, Debug)]
pub enum OracleOutcome {
    Feasible {
        active: Vec<usize>,
        beams: BeamformingMatrix,
        network_power_w: f64,
    },
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct MaxminOutcome {
    /// Largest certified-feasible uniform SINR.
    pub sinr: f64,
    pub beams: BeamformingMatrix,
    pub probes: usize,
    pub bracket_expansions: usize,
    pub indeterminate_probes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionRule {
    MatchedFilter,
    ZeroForcing,
}

/// Stage-1 group weights from the power model: fronthaul power to the given
/// exponent (square root by default), so groups whose removal saves more
/// fronthaul power get pushed harder toward zero.
pub fn fronthaul_weights(fronthaul_w: &[f64], exponent: f64) -> Vec<f64> {
    fronthaul_w.iter().map(|p| p.powf(exponent)).collect()
}

type TemplateKey = (Family, Vec<usize>, usize, usize);

enum ProbeOutcome<T> {
    Feasible(T),
    Infeasible,
    Indeterminate,
}

/// Channel and power data restricted to an active RRH subset.
struct ActiveView {
    active: Vec<usize>,
    antennas: Vec<usize>,
    channel: Array2<Complex64>,
    caps: Vec<f64>,
    eff: Vec<f64>,
}

impl ActiveView {
    fn restrict(inst: &NetworkInstance, active: &[usize]) -> Result<Self, Error> {
        if active.is_empty() {
            return Err(Error::InvalidArgument("active set must be nonempty".into()));
        }
        let mut sorted = active.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if *sorted.last().unwrap() >= inst.num_rrhs() {
            return Err(Error::InvalidArgument(
                "active RRH index out of range".into(),
            ));
        }
        let k = inst.num_users();
        let antennas: Vec<usize> = sorted.iter().map(|&l| inst.antennas[l]).collect();
        let n_act: usize = antennas.iter().sum();
        let mut channel = Array2::<Complex64>::zeros((k, n_act));
        let mut col = 0usize;
        for &l in &sorted {
            for a in inst.antenna_range(l) {
                for ki in 0..k {
                    channel[(ki, col)] = inst.channel[(ki, a)];
                }
                col += 1;
            }
        }
        Ok(Self {
            antennas,
            channel,
            caps: sorted
                .iter()
                .map(|&l| inst.power.max_transmit_w[l])
                .collect(),
            eff: sorted
                .iter()
                .map(|&l| inst.power.drain_efficiency[l])
                .collect(),
            active: sorted,
        })
    }

    /// Embed an active-set beamformer back into the full antenna layout,
    /// zeros at inactive RRHs.
    fn embed(&self, inst: &NetworkInstance, v_act: &Array2<Complex64>) -> Array2<Complex64> {
        let k = inst.num_users();
        let mut full = Array2::<Complex64>::zeros((inst.total_antennas(), k));
        let mut col = 0usize;
        for &l in &self.active {
            for a in inst.antenna_range(l) {
                for ki in 0..k {
                    full[(a, ki)] = v_act[(col, ki)];
                }
                col += 1;
            }
        }
        full
    }
}

/// Beamforming driver owning solver settings and a template cache. One
/// driver per worker; independent instances run concurrently.
pub struct Beamformer {
    pub settings: SolverSettings,
    pub weight_exponent: f64,
    templates: HashMap<TemplateKey, StuffingTemplate>,
    buffer: DataBuffer,
}

impl Beamformer {
    pub fn new(settings: SolverSettings) -> Self {
        Self {
            settings,
            weight_exponent: 0.5,
            templates: HashMap::new(),
            buffer: DataBuffer::default(),
        }
    }

    /// Tighter-than-default tolerances; beamforming feasibility margins are
    /// asserted at 1e-3, so probe solves run at 1e-5.
    pub fn default_settings() -> SolverSettings {
        let mut s = SolverSettings::with_eps(1e-5);
        s.max_iters = 50_000;
        s
    }

    fn stuff_and_solve(
        &mut self,
        family: Family,
        dims: &ProblemDims,
        input: &StuffInput,
        warm: Option<WarmStart>,
    ) -> Result<crate::solver::SolveOutcome, Error> {
        let key = (family, dims.antennas.clone(), dims.users, dims.samples);
        if !self.templates.contains_key(&key) {
            let t = build_template(family, dims)?;
            self.templates.insert(key.clone(), t);
        }
        let template = self.templates.get(&key).unwrap();
        let prog = template.stuff_with(input, &mut self.buffer)?;
        let mut settings = self.settings.clone();
        settings.warm_start = warm;
        solve(&prog, &settings)
    }

    /// Minimize efficiency-weighted transmit power over the active set under
    /// per-user QoS targets and per-RRH caps.
    pub fn powermin(
        &mut self,
        inst: &NetworkInstance,
        active: &[usize],
    ) -> Result<PowerminOutcome, Error> {
        inst.validate()?;
        let view = ActiveView::restrict(inst, active)?;
        if inst.num_users() == 0 {
            return Ok(PowerminOutcome::Feasible(PowerminSolution {
                beams: BeamformingMatrix::zeros(&inst.antennas, 0),
                transmit_power_w: 0.0,
                objective_norm: 0.0,
            }));
        }
        let dims = ProblemDims::new(view.antennas.clone(), inst.num_users());
        let input = StuffInput {
            channels: std::slice::from_ref(&view.channel),
            noise_power: &inst.qos.noise_w,
            sinr_target: &inst.qos.sinr_target,
            max_transmit: &view.caps,
            drain_efficiency: &view.eff,
            group_weights: &[],
        };
        let out = self.stuff_and_solve(Family::PowerMin, &dims, &input, None)?;
        match out.status {
            SolveStatus::Optimal => {
                let mut v_act = extract_beamformer(Family::PowerMin, &dims, &out.primal)?;
                clamp_to_caps(&mut v_act, &view.antennas, &view.caps);
                let full = view.embed(inst, &v_act);
                let beams = BeamformingMatrix {
                    coefficients: full,
                    groups: inst.antennas.clone(),
                };
                let transmit = beams.transmit_power(&inst.power.drain_efficiency);
                Ok(PowerminOutcome::Feasible(PowerminSolution {
                    beams,
                    transmit_power_w: transmit,
                    objective_norm: out.objective,
                }))
            }
            SolveStatus::PrimalInfeasible => Ok(PowerminOutcome::Infeasible),
            _ => Err(Error::Indeterminate {
                iterations: out.iterations,
                max_residual: out.residuals.max(),
            }),
        }
    }

    /// Stage one of group sparse beamforming: minimize the weighted sum of
    /// per-RRH group norms subject to QoS and caps (all RRHs active).
    pub fn gsbf_stage1(&mut self, inst: &NetworkInstance) -> Result<Stage1Outcome, Error> {
        inst.validate()?;
        if inst.num_users() == 0 {
            return Ok(Stage1Outcome::Feasible(Stage1Solution {
                beams: BeamformingMatrix::zeros(&inst.antennas, 0),
                group_norms: vec![0.0; inst.num_rrhs()],
                objective: 0.0,
            }));
        }
        let dims = ProblemDims::new(inst.antennas.clone(), inst.num_users());
        let weights = fronthaul_weights(&inst.power.fronthaul_w, self.weight_exponent);
        let input = StuffInput {
            channels: std::slice::from_ref(&inst.channel),
            noise_power: &inst.qos.noise_w,
            sinr_target: &inst.qos.sinr_target,
            max_transmit: &inst.power.max_transmit_w,
            drain_efficiency: &inst.power.drain_efficiency,
            group_weights: &weights,
        };
        let out = self.stuff_and_solve(Family::GroupSparseStage1, &dims, &input, None)?;
        match out.status {
            SolveStatus::Optimal => {
                let v = extract_beamformer(Family::GroupSparseStage1, &dims, &out.primal)?;
                let beams = BeamformingMatrix {
                    coefficients: v,
                    groups: inst.antennas.clone(),
                };
                let group_norms = beams.group_norms();
                Ok(Stage1Outcome::Feasible(Stage1Solution {
                    beams,
                    group_norms,
                    objective: out.objective,
                }))
            }
            SolveStatus::PrimalInfeasible => Ok(Stage1Outcome::Infeasible),
            _ => Err(Error::Indeterminate {
                iterations: out.iterations,
                max_residual: out.residuals.max(),
            }),
        }
    }

    fn feasibility_probe(
        &mut self,
        inst: &NetworkInstance,
        active: &[usize],
    ) -> Result<ProbeOutcome<()>, Error> {
        let view = ActiveView::restrict(inst, active)?;
        let dims = ProblemDims::new(view.antennas.clone(), inst.num_users());
        let input = StuffInput {
            channels: std::slice::from_ref(&view.channel),
            noise_power: &inst.qos.noise_w,
            sinr_target: &inst.qos.sinr_target,
            max_transmit: &view.caps,
            drain_efficiency: &view.eff,
            group_weights: &[],
        };
        let out = self.stuff_and_solve(Family::FeasibilityCheck, &dims, &input, None)?;
        Ok(match out.status {
            SolveStatus::Optimal => ProbeOutcome::Feasible(()),
            SolveStatus::PrimalInfeasible => ProbeOutcome::Infeasible,
            _ => ProbeOutcome::Indeterminate,
        })
    }

    /// Find the largest number of RRHs (lowest priority first) that can be
    /// switched off while the rest still support the QoS targets.
    /// Feasibility is monotone over the nested active sets, so bisection on
    /// the switch-off count suffices. Indeterminate probes count as
    /// infeasible, which can only keep more RRHs on.
    pub fn gsbf_select(
        &mut self,
        inst: &NetworkInstance,
        priorities: &[f64],
    ) -> Result<SelectResult, Error> {
        inst.validate()?;
        let l = inst.num_rrhs();
        if priorities.len() != l {
            return Err(Error::DimensionMismatch(
                "priorities length must equal the RRH count".into(),
            ));
        }
        let order = priority_order(priorities);
        let active_after = |off: usize| -> Vec<usize> {
            let mut keep: Vec<usize> = order[off..].to_vec();
            keep.sort_unstable();
            keep
        };

        let mut probes = 0usize;
        let mut indeterminate = 0usize;
        let probe = |this: &mut Self, off: usize, ind: &mut usize| -> Result<bool, Error> {
            Ok(match this.feasibility_probe(inst, &active_after(off))? {
                ProbeOutcome::Feasible(()) => true,
                ProbeOutcome::Infeasible => false,
                ProbeOutcome::Indeterminate => {
                    *ind += 1;
                    false
                }
            })
        };

        probes += 1;
        if !probe(self, 0, &mut indeterminate)? {
            return Ok(SelectResult::Infeasible);
        }
        // invariant: `lo` feasible, `hi` infeasible (the empty set is never
        // probed; serving users with no RRH is impossible)
        let mut lo = 0usize;
        let mut hi = l;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            probes += 1;
            if probe(self, mid, &mut indeterminate)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(SelectResult::Active(SelectOutcome {
            active: active_after(lo),
            probes,
            indeterminate_probes: indeterminate,
        }))
    }

    /// The full three-stage pipeline: group-sparse relaxation, priority
    /// ordering with bisection selection, then transmit beamforming on the
    /// surviving active set.
    pub fn gsbf(&mut self, inst: &NetworkInstance) -> Result<GsbfOutcome, Error> {
        let stage1 = match self.gsbf_stage1(inst)? {
            Stage1Outcome::Feasible(s) => s,
            Stage1Outcome::Infeasible => return Ok(GsbfOutcome::Infeasible),
        };
        let weights = fronthaul_weights(&inst.power.fronthaul_w, self.weight_exponent);
        let priorities: Vec<f64> = stage1
            .group_norms
            .iter()
            .zip(&weights)
            .map(|(norm, w)| w * norm)
            .collect();

        let select = match self.gsbf_select(inst, &priorities)? {
            SelectResult::Active(s) => s,
            SelectResult::Infeasible => return Ok(GsbfOutcome::Infeasible),
        };
        let mut probes = select.probes;
        let mut indeterminate = select.indeterminate_probes;

        // Stage 3, with a conservative fallback: if the transmit design on
        // the selected set does not close (probe-tolerance edge), re-add
        // switched-off RRHs in reverse switch-off order.
        let order = priority_order(&priorities);
        let mut off_count = inst.num_rrhs() - select.active.len();
        loop {
            let mut active: Vec<usize> = order[off_count..].to_vec();
            active.sort_unstable();
            match self.powermin(inst, &active) {
                Ok(PowerminOutcome::Feasible(sol)) => {
                    let power = network_power(
                        &sol.beams.coefficients,
                        &inst.antennas,
                        &active,
                        &inst.power,
                    )?;
                    return Ok(GsbfOutcome::Complete(GsbfResult {
                        active,
                        beams: sol.beams,
                        network_power_w: power,
                        stage1_group_norms: stage1.group_norms,
                        priorities,
                        probes,
                        indeterminate_probes: indeterminate,
                    }));
                }
                Ok(PowerminOutcome::Infeasible) => {
                    if off_count == 0 {
                        return Ok(GsbfOutcome::Infeasible);
                    }
                    off_count -= 1;
                    probes += 1;
                }
                Err(Error::Indeterminate { .. }) => {
                    indeterminate += 1;
                    if off_count == 0 {
                        return Ok(GsbfOutcome::Infeasible);
                    }
                    off_count -= 1;
                    probes += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Enumerate all nonempty active sets (L <= 12) and return the cheapest
    /// feasible one by network power. Ground truth for GSBF quality checks.
    pub fn exhaustive_oracle(&mut self, inst: &NetworkInstance) -> Result<OracleOutcome, Error> {
        inst.validate()?;
        let l = inst.num_rrhs();
        if l > 12 {
            return Err(Error::InvalidArgument(format!(
                "exhaustive enumeration refused for {l} RRHs (limit 12)"
            )));
        }
        let mut best: Option<(f64, Vec<usize>, BeamformingMatrix)> = None;
        for mask in 1u32..(1u32 << l) {
            let active: Vec<usize> = (0..l).filter(|&i| mask & (1 << i) != 0).collect();
            match self.powermin(inst, &active) {
                Ok(PowerminOutcome::Feasible(sol)) => {
                    let power = network_power(
                        &sol.beams.coefficients,
                        &inst.antennas,
                        &active,
                        &inst.power,
                    )?;
                    let better = best.as_ref().map(|(p, _, _)| power < *p).unwrap_or(true);
                    if better {
                        best = Some((power, active, sol.beams));
                    }
                }
                Ok(PowerminOutcome::Infeasible) => {}
                Err(Error::Indeterminate { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(match best {
            Some((power, active, beams)) => OracleOutcome::Feasible {
                active,
                beams,
                network_power_w: power,
            },
            None => OracleOutcome::Infeasible,
        })
    }

    /// Max-min SINR via bisection over uniform-target feasibility probes
    /// with full coordinated beamforming. Probes warm-start from the last
    /// feasible solution. Returns the largest certified-feasible target
    /// within `tol` and its beamformer; rate follows as log2(1 + sinr).
    pub fn maxmin_rate(
        &mut self,
        inst: &NetworkInstance,
        tol: f64,
    ) -> Result<MaxminOutcome, Error> {
        inst.validate()?;
        if tol <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let k = inst.num_users();
        let dims = ProblemDims::new(inst.antennas.clone(), k);
        let mut warm: Option<WarmStart> = None;
        let mut targets = vec![1.0; k];
        let hi0 = sinr_upper_bound(inst);
        let (sinr, best, stats) = bisect_max_feasible(
            |gamma, stats| {
                targets.fill(gamma);
                let input = StuffInput {
                    channels: std::slice::from_ref(&inst.channel),
                    noise_power: &inst.qos.noise_w,
                    sinr_target: &targets,
                    max_transmit: &inst.power.max_transmit_w,
                    drain_efficiency: &inst.power.drain_efficiency,
                    group_weights: &[],
                };
                let out =
                    self.stuff_and_solve(Family::MaxMinProbe, &dims, &input, warm.clone())?;
                Ok(match out.status {
                    SolveStatus::Optimal => {
                        warm = Some(WarmStart {
                            primal: out.primal.clone(),
                            dual: out.dual.clone(),
                            slack: out.slack.clone(),
                        });
                        let mut v = extract_beamformer(Family::MaxMinProbe, &dims, &out.primal)?;
                        clamp_to_caps(&mut v, &inst.antennas, &inst.power.max_transmit_w);
                        Some(v)
                    }
                    SolveStatus::PrimalInfeasible => None,
                    _ => {
                        stats.indeterminate += 1;
                        None
                    }
                })
            },
            hi0,
            tol,
        )?;
        let beams = BeamformingMatrix {
            coefficients: best.unwrap_or_else(|| Array2::zeros((inst.total_antennas(), k))),
            groups: inst.antennas.clone(),
        };
        Ok(MaxminOutcome {
            sinr,
            beams,
            probes: stats.probes,
            bracket_expansions: stats.expansions,
            indeterminate_probes: stats.indeterminate,
        })
    }

    /// Max-min SINR with pre-fixed per-user beamforming directions; only the
    /// per-user power scalars are optimized (a K-variable cone program per
    /// probe).
    pub fn fixed_direction_maxmin(
        &mut self,
        inst: &NetworkInstance,
        rule: DirectionRule,
        tol: f64,
    ) -> Result<MaxminOutcome, Error> {
        inst.validate()?;
        if tol <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let k = inst.num_users();
        let n = inst.total_antennas();
        if rule == DirectionRule::ZeroForcing && n < k {
            return Err(Error::InvalidArgument(format!(
                "zero forcing needs at least as many antennas as users ({n} < {k})"
            )));
        }
        let directions = direction_matrix(inst, rule)?;
        // cross gains |h_k^H d_j|^2
        let mut gains = Array2::<f64>::zeros((k, k));
        for ki in 0..k {
            for j in 0..k {
                let dot: Complex64 = inst
                    .channel
                    .row(ki)
                    .iter()
                    .zip(directions.column(j))
                    .map(|(h, d)| h.conj() * d)
                    .sum();
                gains[(ki, j)] = dot.norm_sqr();
            }
        }
        // per-RRH energy of each direction
        let mut group_energy = Array2::<f64>::zeros((inst.num_rrhs(), k));
        for l in 0..inst.num_rrhs() {
            for j in 0..k {
                group_energy[(l, j)] = inst
                    .antenna_range(l)
                    .map(|a| directions[(a, j)].norm_sqr())
                    .sum();
            }
        }

        let settings = self.settings.clone();
        let hi0 = sinr_upper_bound(inst);
        let (sinr, best_q, stats) = bisect_max_feasible(
            |gamma, _| {
                let prog = fixed_direction_probe_program(inst, &gains, &group_energy, gamma)?;
                let out = solve(&prog, &settings)?;
                Ok(match out.status {
                    SolveStatus::Optimal => Some(
                        out.primal
                            .iter()
                            .map(|&q| q.max(0.0))
                            .collect::<Vec<f64>>(),
                    ),
                    _ => None,
                })
            },
            hi0,
            tol,
        )?;
        let mut v = Array2::<Complex64>::zeros((n, k));
        if let Some(q) = best_q {
            for j in 0..k {
                let s = q[j].sqrt();
                for a in 0..n {
                    v[(a, j)] = directions[(a, j)] * s;
                }
            }
        }
        clamp_to_caps(&mut v, &inst.antennas, &inst.power.max_transmit_w);
        Ok(MaxminOutcome {
            sinr,
            beams: BeamformingMatrix {
                coefficients: v,
                groups: inst.antennas.clone(),
            },
            probes: stats.probes,
            bracket_expansions: stats.expansions,
            indeterminate_probes: stats.indeterminate,
        })
    }
}

/// Upper bound on any achievable SINR: best channel energy times the
/// network-wide power budget over that user's noise. Both max-min variants
/// open their bisection bracket here, so they probe the same target ladder.
pub fn sinr_upper_bound(inst: &NetworkInstance) -> f64 {
    let budget: f64 = inst.power.max_transmit_w.iter().sum();
    (0..inst.num_users())
        .map(|k| {
            let h_energy: f64 = inst.channel.row(k).iter().map(|c| c.norm_sqr()).sum();
            h_energy * budget / inst.qos.noise_w[k]
        })
        .fold(0.0f64, f64::max)
}

/// A sensible default bisection tolerance: a small fraction of the
/// instance's SINR upper bound.
pub fn default_maxmin_tol(inst: &NetworkInstance) -> f64 {
    (sinr_upper_bound(inst) * 1e-3).max(1e-9)
}

fn priority_order(priorities: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..priorities.len()).collect();
    order.sort_by(|&a, &b| {
        priorities[a]
            .partial_cmp(&priorities[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Unit-norm per-user directions for the fixed-direction baselines.
fn direction_matrix(
    inst: &NetworkInstance,
    rule: DirectionRule,
) -> Result<Array2<Complex64>, Error> {
    let k = inst.num_users();
    let n = inst.total_antennas();
    let h = &inst.channel;
    let mut d = Array2::<Complex64>::zeros((n, k));
    match rule {
        DirectionRule::MatchedFilter => {
            for j in 0..k {
                let norm: f64 = h.row(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "user {j} has a zero channel"
                    )));
                }
                for a in 0..n {
                    d[(a, j)] = h[(j, a)] / norm;
                }
            }
        }
        DirectionRule::ZeroForcing => {
            // pseudo-inverse based nulling in the h_k^H v convention:
            // gram[i][j] = h_i^H h_j, d_j = sum_i h_i inv[i][j], so that
            // h_k^H d_j = sum_i gram[k][i] inv[i][j] = delta_kj before
            // normalization.
            let mut gram = Array2::<Complex64>::zeros((k, k));
            for i in 0..k {
                for j in 0..k {
                    gram[(i, j)] = h
                        .row(i)
                        .iter()
                        .zip(h.row(j))
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                }
            }
            let eye = Array2::from_shape_fn((k, k), |(i, j)| {
                Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
            });
            let inv = solve_complex(&gram, &eye)?;
            for j in 0..k {
                for a in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..k {
                        acc += h[(i, a)] * inv[(i, j)];
                    }
                    d[(a, j)] = acc;
                }
                let norm: f64 = (0..n).map(|a| d[(a, j)].norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "zero-forcing direction collapsed for user {j}"
                    )));
                }
                for a in 0..n {
                    d[(a, j)] /= norm;
                }
            }
        }
    }
    Ok(d)
}

/// Nonnegative-cone feasibility program of fixed-direction power control:
/// find q >= 0 with per-user SINR >= gamma under per-RRH caps.
fn fixed_direction_probe_program(
    inst: &NetworkInstance,
    gains: &Array2<f64>,
    group_energy: &Array2<f64>,
    gamma: f64,
) -> Result<ConeProgram, Error> {
    let k = inst.num_users();
    let l = inst.num_rrhs();
    let mut triplets = Vec::new();
    let mut b = vec![0.0; k + l + k];
    // SINR rows: gains[k][k] q_k - gamma * sum_{j!=k} gains[k][j] q_j >= gamma * noise_k
    for ki in 0..k {
        for j in 0..k {
            let coeff = if j == ki {
                -gains[(ki, ki)]
            } else {
                gamma * gains[(ki, j)]
            };
            if coeff != 0.0 {
                triplets.push((ki, j, coeff));
            }
        }
        b[ki] = -gamma * inst.qos.noise_w[ki];
    }
    // cap rows
    for li in 0..l {
        for j in 0..k {
            let coeff = group_energy[(li, j)];
            if coeff != 0.0 {
                triplets.push((k + li, j, coeff));
            }
        }
        b[k + li] = inst.power.max_transmit_w[li];
    }
    // q >= 0
    for j in 0..k {
        triplets.push((k + l + j, j, -1.0));
    }
    Ok(ConeProgram {
        a: CscMatrix::from_triplets(k + l + k, k, triplets)?,
        b,
        c: vec![0.0; k],
        cone: ConeSpec::new(0, k + l + k, vec![]),
    })
}

struct BisectStats {
    probes: usize,
    expansions: usize,
    indeterminate: usize,
}

/// Bisection for the largest feasible parameter in [0, hi]. `hi` is grown
/// geometrically if it turns out feasible (bracketing failure), up to a
/// fixed ceiling. Zero is assumed feasible (the zero beamformer).
fn bisect_max_feasible<T, F>(
    mut probe: F,
    hi_init: f64,
    tol: f64,
) -> Result<(f64, Option<T>, BisectStats), Error>
where
    F: FnMut(f64, &mut BisectStats) -> Result<Option<T>, Error>,
{
    let mut stats = BisectStats {
        probes: 0,
        expansions: 0,
        indeterminate: 0,
    };
    if !(hi_init.is_finite() && hi_init > 0.0) {
        return Ok((0.0, None, stats));
    }
    let ceiling = hi_init * 4096.0;
    let mut lo = 0.0f64;
    let mut hi = hi_init;
    let mut best: Option<T> = None;
    loop {
        stats.probes += 1;
        match probe(hi, &mut stats)? {
            Some(payload) => {
                lo = hi;
                best = Some(payload);
                hi *= 4.0;
                stats.expansions += 1;
                if hi > ceiling {
                    return Err(Error::InvalidArgument(
                        "max-min bracket expansion exceeded its ceiling".into(),
                    ));
                }
            }
            None => break,
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        stats.probes += 1;
        match probe(mid, &mut stats)? {
            Some(payload) => {
                lo = mid;
                best = Some(payload);
            }
            None => hi = mid,
        }
    }
    Ok((lo, best, stats))
}

/// Scale the beamformer down if any group norm exceeds its cap; keeps
/// returned solutions inside the cap tolerance after loose solves.
fn clamp_to_caps(v: &mut Array2<Complex64>, antennas: &[usize], caps: &[f64]) {
    let mut scale: f64 = 1.0;
    let mut base = 0usize;
    for (l, &nl) in antennas.iter().enumerate() {
        let norm: f64 = (base..base + nl)
            .map(|a| v.row(a).iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        let cap = caps[l].sqrt();
        if norm > cap && norm > 0.0 {
            scale = scale.min(cap / norm);
        }
        base += nl;
    }
    if scale < 1.0 {
        v.mapv_inplace(|c| c * scale);
    }
}
