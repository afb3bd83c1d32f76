//! Canonicalization of the beamforming problem family into standard cone
//! form, with matrix stuffing.
//!
//! Canonicalizing a problem has two distinct costs: discovering the sparsity
//! structure of `(A, b, c)` and filling in the numbers. For a fixed problem
//! family at fixed dimensions the structure never changes, so a
//! [`StuffingTemplate`] computes it once and records, for every instance
//! datum, the value slots it lands in (with a constant multiplier). Producing
//! a program for a new instance then only copies numbers into the pre-stored
//! structure. [`canonicalize_reference`] builds the identical program from
//! scratch on every call; it serves as the equality oracle and the
//! modeling-time baseline. Both paths evaluate every numeric entry through
//! the same [`DataBuffer`], so a stuffed program equals the reference
//! bitwise.
//!
//! # Canonical form
//!
//! The real variable vector is `(t…; Re v; Im v)` where `v` is the aggregate
//! complex beamformer stacked user by user and `t` are epigraph variables
//! (one for power minimization, one per RRH group for the sparse stage, none
//! for plain feasibility probes). A complex functional `h^H v_j` embeds as
//! two real rows with coefficient patterns `(Re h; Im h)` and
//! `(-Im h; Re h)`. Per-user QoS becomes one second-order cone per user (and
//! per sample for the scenario family): the scaled signal row bounds the
//! norm of the interference rows plus the noise entry. No row forces the
//! signal term's imaginary part to zero; a per-user phase rotation of any
//! solution makes it real and nonnegative without moving any constraint
//! norm, so the smaller cone loses nothing.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cones::ConeSpec;
use crate::solver::ConeProgram;
use crate::sparse::{assemble_csc, CscMatrix};
use crate::Error;

/// The canonicalized problem families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// min total (efficiency-weighted) transmit power under per-user QoS and
    /// per-RRH caps; one epigraph variable.
    PowerMin,
    /// min weighted sum of per-RRH group norms (one epigraph per RRH) under
    /// QoS and caps; the group-sparsity inducing stage.
    GroupSparseStage1,
    /// pure feasibility of QoS + caps; zero objective.
    FeasibilityCheck,
    /// PowerMin with the QoS cone block replicated once per sampled channel.
    ScenarioScb,
    /// FeasibilityCheck with a caller-supplied uniform QoS target.
    MaxMinProbe,
}

/// Dimensions a template is frozen for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProblemDims {
    /// Antennas per (active) RRH.
    pub antennas: Vec<usize>,
    pub users: usize,
    /// Channel samples; 1 for the deterministic families.
    pub samples: usize,
}

impl ProblemDims {
    pub fn new(antennas: Vec<usize>, users: usize) -> Self {
        Self {
            antennas,
            users,
            samples: 1,
        }
    }

    pub fn with_samples(antennas: Vec<usize>, users: usize, samples: usize) -> Self {
        Self {
            antennas,
            users,
            samples,
        }
    }

    pub fn num_rrhs(&self) -> usize {
        self.antennas.len()
    }

    pub fn total_antennas(&self) -> usize {
        self.antennas.iter().sum()
    }

    fn validate(&self, family: Family) -> Result<(), Error> {
        if self.antennas.is_empty() {
            return Err(Error::InvalidArgument("at least one RRH required".into()));
        }
        if self.antennas.iter().any(|&a| a == 0) {
            return Err(Error::InvalidArgument(
                "every RRH needs at least one antenna".into(),
            ));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("sample count must be >= 1".into()));
        }
        if family != Family::ScenarioScb && self.samples != 1 {
            return Err(Error::InvalidArgument(
                "only the scenario family uses multiple samples".into(),
            ));
        }
        Ok(())
    }
}

/// Instance numbers to be stuffed. Channel matrices are user-by-antenna
/// (`users x total_antennas`), one per sample.
pub struct StuffInput<'a> {
    pub channels: &'a [Array2<Complex64>],
    /// Per-user noise power (variance, watts).
    pub noise_power: &'a [f64],
    /// Per-user QoS target (linear SINR).
    pub sinr_target: &'a [f64],
    /// Per-RRH transmit cap (watts).
    pub max_transmit: &'a [f64],
    /// Per-RRH drain efficiency.
    pub drain_efficiency: &'a [f64],
    /// Per-RRH group weights; only read by `GroupSparseStage1`.
    pub group_weights: &'a [f64],
}

impl<'a> StuffInput<'a> {
    fn validate(&self, family: Family, dims: &ProblemDims) -> Result<(), Error> {
        let l = dims.num_rrhs();
        let k = dims.users;
        let n = dims.total_antennas();
        if self.channels.len() != dims.samples {
            return Err(Error::DimensionMismatch(format!(
                "expected {} channel sample(s), got {}",
                dims.samples,
                self.channels.len()
            )));
        }
        for (idx, ch) in self.channels.iter().enumerate() {
            if ch.nrows() != k || ch.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "channel sample {idx} is {}x{}, expected {k}x{n}",
                    ch.nrows(),
                    ch.ncols()
                )));
            }
        }
        if self.noise_power.len() != k || self.sinr_target.len() != k {
            return Err(Error::DimensionMismatch(
                "per-user noise/target lengths do not match".into(),
            ));
        }
        if self.max_transmit.len() != l || self.drain_efficiency.len() != l {
            return Err(Error::DimensionMismatch(
                "per-RRH power model lengths do not match".into(),
            ));
        }
        if family == Family::GroupSparseStage1 && self.group_weights.len() != l {
            return Err(Error::DimensionMismatch(
                "group weights length does not match the RRH count".into(),
            ));
        }
        if self.sinr_target.iter().any(|&g| !(g > 0.0))
            || self.noise_power.iter().any(|&s| !(s > 0.0))
            || self.max_transmit.iter().any(|&p| !(p > 0.0))
            || self.drain_efficiency.iter().any(|&e| !(e > 0.0))
        {
            return Err(Error::InvalidArgument(
                "targets, noise, caps and efficiencies must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Flat buffer of the derived scalars both canonicalization paths read.
/// Filling it is the single place where instance data gets transformed,
/// which is what makes stuffed and from-scratch programs bitwise identical.
#[derive(Clone, Debug, Default)]
pub struct DataBuffer {
    data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct DataLayout {
    samples: usize,
    users: usize,
    antennas: usize,
    rrhs: usize,
}

impl DataLayout {
    fn of(dims: &ProblemDims) -> Self {
        Self {
            samples: dims.samples,
            users: dims.users,
            antennas: dims.total_antennas(),
            rrhs: dims.num_rrhs(),
        }
    }

    fn block(&self) -> usize {
        self.samples * self.users * self.antennas
    }

    fn len(&self) -> usize {
        4 * self.block() + 2 * self.users + 3 * self.rrhs
    }

    fn chan_re(&self, s: usize, k: usize, a: usize) -> usize {
        (s * self.users + k) * self.antennas + a
    }

    fn chan_im(&self, s: usize, k: usize, a: usize) -> usize {
        self.block() + self.chan_re(s, k, a)
    }

    /// Re h scaled by 1/sqrt(target): the signal-row coefficient.
    fn chan_re_scaled(&self, s: usize, k: usize, a: usize) -> usize {
        2 * self.block() + self.chan_re(s, k, a)
    }

    fn chan_im_scaled(&self, s: usize, k: usize, a: usize) -> usize {
        3 * self.block() + self.chan_re(s, k, a)
    }

    fn noise_std(&self, k: usize) -> usize {
        4 * self.block() + k
    }

    fn inv_sqrt_target(&self, k: usize) -> usize {
        4 * self.block() + self.users + k
    }

    fn sqrt_cap(&self, l: usize) -> usize {
        4 * self.block() + 2 * self.users + l
    }

    fn inv_sqrt_eff(&self, l: usize) -> usize {
        4 * self.block() + 2 * self.users + self.rrhs + l
    }

    fn weight(&self, l: usize) -> usize {
        4 * self.block() + 2 * self.users + 2 * self.rrhs + l
    }
}

impl DataBuffer {
    fn fill(&mut self, layout: DataLayout, input: &StuffInput) {
        self.data.clear();
        self.data.resize(layout.len(), 0.0);
        for k in 0..layout.users {
            self.data[layout.noise_std(k)] = input.noise_power[k].sqrt();
            self.data[layout.inv_sqrt_target(k)] = 1.0 / input.sinr_target[k].sqrt();
        }
        for l in 0..layout.rrhs {
            self.data[layout.sqrt_cap(l)] = input.max_transmit[l].sqrt();
            self.data[layout.inv_sqrt_eff(l)] = 1.0 / input.drain_efficiency[l].sqrt();
            self.data[layout.weight(l)] = input.group_weights.get(l).copied().unwrap_or(0.0);
        }
        for (s, chan) in input.channels.iter().enumerate() {
            for k in 0..layout.users {
                let inv_sqrt_target = self.data[layout.inv_sqrt_target(k)];
                for a in 0..layout.antennas {
                    let h = chan[(k, a)];
                    self.data[layout.chan_re(s, k, a)] = h.re;
                    self.data[layout.chan_im(s, k, a)] = h.im;
                    self.data[layout.chan_re_scaled(s, k, a)] = h.re * inv_sqrt_target;
                    self.data[layout.chan_im_scaled(s, k, a)] = h.im * inv_sqrt_target;
                }
            }
        }
    }
}

/// Where a numeric entry comes from: a structural constant, or an instance
/// datum (by buffer index) times a fixed multiplier.
#[derive(Clone, Copy, Debug)]
enum Src {
    Cst(f64),
    Slot { src: usize, mult: f64 },
}

impl Src {
    #[inline]
    fn eval(self, data: &DataBuffer) -> f64 {
        match self {
            Src::Cst(v) => v,
            Src::Slot { src, mult } => data.data[src] * mult,
        }
    }
}

fn epigraph_count(family: Family, dims: &ProblemDims) -> usize {
    match family {
        Family::PowerMin | Family::ScenarioScb => 1,
        Family::GroupSparseStage1 => dims.num_rrhs(),
        Family::FeasibilityCheck | Family::MaxMinProbe => 0,
    }
}

/// Number of real variables of the canonical program.
pub fn num_vars(family: Family, dims: &ProblemDims) -> usize {
    epigraph_count(family, dims) + 2 * dims.total_antennas() * dims.users
}

/// Cone of the canonical program, in row order. For the group-sparse stage
/// the per-RRH caps ride on the epigraph variables (`t_l <= sqrt(cap_l)` as
/// nonnegative rows bounding `t_l >= ||group l||`), so that family carries
/// group cones instead of separate cap cones.
pub fn cone_spec(family: Family, dims: &ProblemDims) -> ConeSpec {
    let k = dims.users;
    let n = dims.total_antennas();
    let mut soc = Vec::new();
    for _ in 0..dims.samples * k {
        soc.push(2 * k);
    }
    for &nl in &dims.antennas {
        soc.push(1 + 2 * nl * k);
    }
    match family {
        Family::PowerMin | Family::ScenarioScb => {
            soc.push(1 + 2 * n * k);
            ConeSpec::new(0, 0, soc)
        }
        Family::FeasibilityCheck | Family::MaxMinProbe | Family::GroupSparseStage1 => {
            let nonneg = if family == Family::GroupSparseStage1 {
                dims.num_rrhs()
            } else {
                0
            };
            ConeSpec::new(0, nonneg, soc)
        }
    }
}

/// Walk the canonical structure of `(A, b, c)`, reporting every entry once.
fn emit_structure<FA, FB, FC>(
    family: Family,
    dims: &ProblemDims,
    layout: DataLayout,
    mut emit_a: FA,
    mut emit_b: FB,
    mut emit_c: FC,
) where
    FA: FnMut(usize, usize, Src),
    FB: FnMut(usize, Src),
    FC: FnMut(usize, Src),
{
    let k_users = dims.users;
    let n = dims.total_antennas();
    let t_count = epigraph_count(family, dims);
    let col_re = |j: usize, a: usize| t_count + j * n + a;
    let col_im = |j: usize, a: usize| t_count + n * k_users + j * n + a;

    let mut antenna_base = Vec::with_capacity(dims.num_rrhs());
    {
        let mut acc = 0;
        for &nl in &dims.antennas {
            antenna_base.push(acc);
            acc += nl;
        }
    }

    let mut row = 0usize;

    // Stage-1 caps enter as nonnegative rows t_l <= sqrt(cap_l); they come
    // first because the cone is laid out zero/nonneg/soc.
    if family == Family::GroupSparseStage1 {
        for l in 0..dims.num_rrhs() {
            emit_a(row, l, Src::Cst(1.0));
            emit_b(
                row,
                Src::Slot {
                    src: layout.sqrt_cap(l),
                    mult: 1.0,
                },
            );
            row += 1;
        }
    }

    // Per-user QoS cones, replicated per sample. Block layout:
    //   [scaled signal row; (Re, Im) rows for every other user; noise entry]
    for s in 0..dims.samples {
        for k in 0..k_users {
            for a in 0..n {
                emit_a(
                    row,
                    col_re(k, a),
                    Src::Slot {
                        src: layout.chan_re_scaled(s, k, a),
                        mult: -1.0,
                    },
                );
                emit_a(
                    row,
                    col_im(k, a),
                    Src::Slot {
                        src: layout.chan_im_scaled(s, k, a),
                        mult: -1.0,
                    },
                );
            }
            row += 1;
            for j in 0..k_users {
                if j == k {
                    continue;
                }
                for a in 0..n {
                    emit_a(
                        row,
                        col_re(j, a),
                        Src::Slot {
                            src: layout.chan_re(s, k, a),
                            mult: -1.0,
                        },
                    );
                    emit_a(
                        row,
                        col_im(j, a),
                        Src::Slot {
                            src: layout.chan_im(s, k, a),
                            mult: -1.0,
                        },
                    );
                }
                row += 1;
                for a in 0..n {
                    emit_a(
                        row,
                        col_re(j, a),
                        Src::Slot {
                            src: layout.chan_im(s, k, a),
                            mult: 1.0,
                        },
                    );
                    emit_a(
                        row,
                        col_im(j, a),
                        Src::Slot {
                            src: layout.chan_re(s, k, a),
                            mult: -1.0,
                        },
                    );
                }
                row += 1;
            }
            emit_b(
                row,
                Src::Slot {
                    src: layout.noise_std(k),
                    mult: 1.0,
                },
            );
            row += 1;
        }
    }

    // Per-RRH power cones: sqrt(cap_l) bounds the group coefficient norm.
    // The group-sparse stage caps through its epigraph variables instead.
    if family != Family::GroupSparseStage1 {
        for (l, &nl) in dims.antennas.iter().enumerate() {
            emit_b(
                row,
                Src::Slot {
                    src: layout.sqrt_cap(l),
                    mult: 1.0,
                },
            );
            row += 1;
            for j in 0..k_users {
                for a_local in 0..nl {
                    let a = antenna_base[l] + a_local;
                    emit_a(row, col_re(j, a), Src::Cst(-1.0));
                    row += 1;
                    emit_a(row, col_im(j, a), Src::Cst(-1.0));
                    row += 1;
                }
            }
        }
    }

    match family {
        Family::PowerMin | Family::ScenarioScb => {
            // Objective epigraph: t bounds the efficiency-weighted stack.
            emit_a(row, 0, Src::Cst(-1.0));
            row += 1;
            for (l, &nl) in dims.antennas.iter().enumerate() {
                for j in 0..k_users {
                    for a_local in 0..nl {
                        let a = antenna_base[l] + a_local;
                        emit_a(
                            row,
                            col_re(j, a),
                            Src::Slot {
                                src: layout.inv_sqrt_eff(l),
                                mult: -1.0,
                            },
                        );
                        row += 1;
                        emit_a(
                            row,
                            col_im(j, a),
                            Src::Slot {
                                src: layout.inv_sqrt_eff(l),
                                mult: -1.0,
                            },
                        );
                        row += 1;
                    }
                }
            }
            emit_c(0, Src::Cst(1.0));
        }
        Family::GroupSparseStage1 => {
            // Per-group epigraphs t_l >= ||group l coefficients||.
            for (l, &nl) in dims.antennas.iter().enumerate() {
                emit_a(row, l, Src::Cst(-1.0));
                row += 1;
                for j in 0..k_users {
                    for a_local in 0..nl {
                        let a = antenna_base[l] + a_local;
                        emit_a(row, col_re(j, a), Src::Cst(-1.0));
                        row += 1;
                        emit_a(row, col_im(j, a), Src::Cst(-1.0));
                        row += 1;
                    }
                }
                emit_c(
                    l,
                    Src::Slot {
                        src: layout.weight(l),
                        mult: 1.0,
                    },
                );
            }
        }
        Family::FeasibilityCheck | Family::MaxMinProbe => {}
    }

    debug_assert_eq!(row, cone_spec(family, dims).total_dim());
}

#[derive(Clone, Copy, Debug)]
struct SlotWrite {
    dst: u32,
    src: u32,
    mult: f64,
}

/// Pre-computed structure plus slot map for one problem family at fixed
/// dimensions. Immutable after build; stuffing only copies numbers into
/// value slots.
#[derive(Clone, Debug)]
pub struct StuffingTemplate {
    family: Family,
    dims: ProblemDims,
    layout: DataLayout,
    cone: ConeSpec,
    nrows: usize,
    ncols: usize,
    col_ptr: std::sync::Arc<Vec<usize>>,
    row_idx: std::sync::Arc<Vec<usize>>,
    a_const: Vec<f64>,
    a_slots: Vec<SlotWrite>,
    b_const: Vec<f64>,
    b_slots: Vec<SlotWrite>,
    c_const: Vec<f64>,
    c_slots: Vec<SlotWrite>,
}

/// Build the template for `(family, dims)`; a pure function of both.
pub fn build_template(family: Family, dims: &ProblemDims) -> Result<StuffingTemplate, Error> {
    dims.validate(family)?;
    let layout = DataLayout::of(dims);
    let cone = cone_spec(family, dims);
    let nrows = cone.total_dim();
    let ncols = num_vars(family, dims);

    let mut a_triplets: Vec<(usize, usize, Src)> = Vec::new();
    let mut b_entries: Vec<(usize, Src)> = Vec::new();
    let mut c_entries: Vec<(usize, Src)> = Vec::new();
    emit_structure(
        family,
        dims,
        layout,
        |r, c, s| a_triplets.push((r, c, s)),
        |r, s| b_entries.push((r, s)),
        |c, s| c_entries.push((c, s)),
    );

    let (col_ptr, row_idx, srcs) = assemble_csc(nrows, ncols, a_triplets)?;
    let mut a_const = vec![0.0; srcs.len()];
    let mut a_slots = Vec::new();
    for (i, src) in srcs.iter().enumerate() {
        match *src {
            Src::Cst(v) => a_const[i] = v,
            Src::Slot { src, mult } => a_slots.push(SlotWrite {
                dst: i as u32,
                src: src as u32,
                mult,
            }),
        }
    }
    let mut b_const = vec![0.0; nrows];
    let mut b_slots = Vec::new();
    for (row, src) in b_entries {
        match src {
            Src::Cst(v) => b_const[row] = v,
            Src::Slot { src, mult } => b_slots.push(SlotWrite {
                dst: row as u32,
                src: src as u32,
                mult,
            }),
        }
    }
    let mut c_const = vec![0.0; ncols];
    let mut c_slots = Vec::new();
    for (col, src) in c_entries {
        match src {
            Src::Cst(v) => c_const[col] = v,
            Src::Slot { src, mult } => c_slots.push(SlotWrite {
                dst: col as u32,
                src: src as u32,
                mult,
            }),
        }
    }

    Ok(StuffingTemplate {
        family,
        dims: dims.clone(),
        layout,
        cone,
        nrows,
        ncols,
        col_ptr: std::sync::Arc::new(col_ptr),
        row_idx: std::sync::Arc::new(row_idx),
        a_const,
        a_slots,
        b_const,
        b_slots,
        c_const,
        c_slots,
    })
}

impl StuffingTemplate {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dims(&self) -> &ProblemDims {
        &self.dims
    }

    pub fn num_rows(&self) -> usize {
        self.nrows
    }

    pub fn num_vars(&self) -> usize {
        self.ncols
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    /// Copy instance numbers through the slot map and emit a program. The
    /// emitted program owns its numeric arrays (structure is shared), so the
    /// template can be re-stuffed without disturbing prior programs.
    pub fn stuff_with(
        &self,
        input: &StuffInput,
        buffer: &mut DataBuffer,
    ) -> Result<ConeProgram, Error> {
        input.validate(self.family, &self.dims)?;
        buffer.fill(self.layout, input);

        let mut values = self.a_const.clone();
        for s in &self.a_slots {
            values[s.dst as usize] = buffer.data[s.src as usize] * s.mult;
        }
        let mut b = self.b_const.clone();
        for s in &self.b_slots {
            b[s.dst as usize] = buffer.data[s.src as usize] * s.mult;
        }
        let mut c = self.c_const.clone();
        for s in &self.c_slots {
            c[s.dst as usize] = buffer.data[s.src as usize] * s.mult;
        }

        Ok(ConeProgram {
            a: CscMatrix::from_parts(
                self.nrows,
                self.ncols,
                std::sync::Arc::clone(&self.col_ptr),
                std::sync::Arc::clone(&self.row_idx),
                values,
            ),
            b,
            c,
            cone: self.cone.clone(),
        })
    }

    /// Convenience wrapper allocating a fresh data buffer.
    pub fn stuff(&self, input: &StuffInput) -> Result<ConeProgram, Error> {
        let mut buffer = DataBuffer::default();
        self.stuff_with(input, &mut buffer)
    }
}

/// Build the identical program without a template, allocating fresh
/// structure. Equality oracle and timing baseline for the template path.
pub fn canonicalize_reference(
    family: Family,
    dims: &ProblemDims,
    input: &StuffInput,
) -> Result<ConeProgram, Error> {
    dims.validate(family)?;
    input.validate(family, dims)?;
    let layout = DataLayout::of(dims);
    let mut buffer = DataBuffer::default();
    buffer.fill(layout, input);

    let cone = cone_spec(family, dims);
    let nrows = cone.total_dim();
    let ncols = num_vars(family, dims);
    let mut a_triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = vec![0.0; nrows];
    let mut c = vec![0.0; ncols];
    emit_structure(
        family,
        dims,
        layout,
        |r, col, s| a_triplets.push((r, col, s.eval(&buffer))),
        |r, s| b[r] = s.eval(&buffer),
        |col, s| c[col] = s.eval(&buffer),
    );
    let (col_ptr, row_idx, values) = assemble_csc(nrows, ncols, a_triplets)?;
    Ok(ConeProgram {
        a: CscMatrix::from_parts(
            nrows,
            ncols,
            std::sync::Arc::new(col_ptr),
            std::sync::Arc::new(row_idx),
            values,
        ),
        b,
        c,
        cone,
    })
}

/// Reassemble the complex beamformer (antennas x users) from a primal vector
/// in the canonical layout.
pub fn extract_beamformer(
    family: Family,
    dims: &ProblemDims,
    primal: &[f64],
) -> Result<Array2<Complex64>, Error> {
    let n = dims.total_antennas();
    let k = dims.users;
    let t_count = epigraph_count(family, dims);
    if primal.len() != t_count + 2 * n * k {
        return Err(Error::DimensionMismatch(format!(
            "primal has length {}, expected {}",
            primal.len(),
            t_count + 2 * n * k
        )));
    }
    Ok(Array2::from_shape_fn((n, k), |(a, j)| {
        Complex64::new(
            primal[t_count + j * n + a],
            primal[t_count + n * k + j * n + a],
        )
    }))
}

/// Inverse of [`extract_beamformer`]: lay a beamformer (plus epigraph
/// values) out as a primal vector. Used to warm-start related programs.
pub fn pack_primal(
    family: Family,
    dims: &ProblemDims,
    epigraphs: &[f64],
    beams: &Array2<Complex64>,
) -> Result<Vec<f64>, Error> {
    let n = dims.total_antennas();
    let k = dims.users;
    let t_count = epigraph_count(family, dims);
    if epigraphs.len() != t_count || beams.nrows() != n || beams.ncols() != k {
        return Err(Error::DimensionMismatch("pack_primal shape mismatch".into()));
    }
    let mut out = vec![0.0; t_count + 2 * n * k];
    out[..t_count].copy_from_slice(epigraphs);
    for j in 0..k {
        for a in 0..n {
            out[t_count + j * n + a] = beams[(a, j)].re;
            out[t_count + n * k + j * n + a] = beams[(a, j)].im;
        }
    }
    Ok(out)
}
