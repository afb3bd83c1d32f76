//! Experiment execution: seed fan-out, raw and aggregate CSV emission, and
//! the JSON run manifest.
//!
//! Seeds run in parallel; every stochastic component inside a seed draws
//! from named streams keyed by that seed, so row contents are independent of
//! scheduling and the merged output (rows in seed order) is byte-stable
//! across reruns.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use cranopt::beamforming::{
    sinr_upper_bound, Beamformer, DirectionRule, GsbfOutcome, PowerminOutcome,
};
use cranopt::csi::{
    acquire_mixed_csi, run_estimation_experiment, scenario_sample_bound, scenario_scb,
    EstimationExperiment, ScenarioResult,
};
use cranopt::network::{db_to_linear, dbm_to_watts, network_power, InstanceConfig};
use cranopt::solver::{solve, ConeProgram, SolveStatus};
use cranopt::stuffing::{
    build_template, canonicalize_reference, DataBuffer, Family, ProblemDims, StuffInput,
};
use cranopt::Error;

use crate::config::{
    BenchConfig, ChanestConfig, ExperimentConfig, GsbfConfig, MaxminConfig, ScenarioConfig,
    SolveFileConfig,
};

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub raw_csv: PathBuf,
    pub aggregate_csv: PathBuf,
    pub manifest: PathBuf,
}

/// Execute a config, writing `<experiment>_raw.csv`, `<experiment>_agg.csv`
/// and `<experiment>_manifest.json` under `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let started = Instant::now();
    let (raw, agg) = match cfg {
        ExperimentConfig::GsbfPowerVsSinr(c) => run_gsbf(c)?,
        ExperimentConfig::MaxminVsSnr(c) => run_maxmin(c)?,
        ExperimentConfig::ChanestMse(c) => run_chanest(c)?,
        ExperimentConfig::ScenarioScb(c) => run_scenario(c)?,
        ExperimentConfig::BenchStuffing(c) => run_bench(c)?,
        ExperimentConfig::SolveFile(c) => run_solve_file(c)?,
    };
    let name = cfg.name();
    let raw_csv = out_dir.join(format!("{name}_raw.csv"));
    let aggregate_csv = out_dir.join(format!("{name}_agg.csv"));
    std::fs::write(&raw_csv, raw)?;
    std::fs::write(&aggregate_csv, agg)?;

    let manifest_path = out_dir.join(format!("{name}_manifest.json"));
    let manifest = serde_json::json!({
        "experiment": name,
        "package_version": env!("CARGO_PKG_VERSION"),
        "wall_seconds": started.elapsed().as_secs_f64(),
        "outputs": {
            "raw": raw_csv.file_name().unwrap().to_str(),
            "aggregate": aggregate_csv.file_name().unwrap().to_str(),
        },
        "config": cfg.to_json(),
    });
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunArtifacts {
        raw_csv,
        aggregate_csv,
        manifest: manifest_path,
    })
}

/// Re-run the config echoed in a manifest; reproduces its CSVs.
pub fn run_from_manifest(manifest_path: &Path, out_dir: &Path) -> Result<RunArtifacts> {
    let text = std::fs::read_to_string(manifest_path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config = value
        .get("config")
        .context("manifest has no config echo")?;
    let cfg = crate::config::parse_config(&serde_json::to_string(config)?)?;
    run(&cfg, out_dir)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Header-only CSV for empty row sets (serde can't infer headers then).
fn to_csv_or_header<T: Serialize>(rows: &[T], header: &str) -> Result<String> {
    if rows.is_empty() {
        return Ok(format!("{header}\n"));
    }
    to_csv(rows)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

// ---------------------------------------------------------------------------
// network power minimization: GSBF vs all-active over an SINR sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct GsbfRow {
    seed: u64,
    sinr_db: f64,
    gsbf_power_w: Option<f64>,
    all_active_power_w: Option<f64>,
    active_count: Option<usize>,
    probes: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
struct GsbfAggRow {
    sinr_db: f64,
    seeds: usize,
    feasible: usize,
    gsbf_power_w_mean: f64,
    gsbf_power_w_std: f64,
    all_active_power_w_mean: f64,
    all_active_power_w_std: f64,
    active_count_mean: f64,
    probes_mean: f64,
}

fn gsbf_instance_config(c: &GsbfConfig, sinr_db: f64) -> InstanceConfig {
    InstanceConfig {
        rrhs: c.rrhs,
        antennas_per_rrh: c.antennas_per_rrh,
        users: c.users,
        region_half_width_m: c.region_half_width_m,
        channel: c.channel.clone(),
        fronthaul_w: c.fronthaul_w.clone(),
        drain_efficiency: c.drain_efficiency,
        max_transmit_w: c.max_transmit_w,
        noise_w: dbm_to_watts(c.noise_dbm),
        sinr_target: db_to_linear(sinr_db),
    }
}

fn run_gsbf(c: &GsbfConfig) -> Result<(String, String)> {
    let per_seed: Vec<Vec<GsbfRow>> = c
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<GsbfRow>> {
            let mut bf = Beamformer::new(c.solver.to_settings());
            let mut rows = Vec::new();
            for &sinr_db in &c.sinr_targets_db {
                let inst = gsbf_instance_config(c, sinr_db).build(seed)?;
                let all: Vec<usize> = (0..c.rrhs).collect();
                let all_active_power = match bf.powermin(&inst, &all) {
                    Ok(PowerminOutcome::Feasible(sol)) => Some(network_power(
                        &sol.beams.coefficients,
                        &inst.antennas,
                        &all,
                        &inst.power,
                    )?),
                    Ok(PowerminOutcome::Infeasible) => None,
                    Err(Error::Indeterminate { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                let (gsbf_power, active_count, probes) = match bf.gsbf(&inst) {
                    Ok(GsbfOutcome::Complete(r)) => {
                        (Some(r.network_power_w), Some(r.active.len()), Some(r.probes))
                    }
                    Ok(GsbfOutcome::Infeasible) => (None, None, None),
                    Err(Error::Indeterminate { .. }) => (None, None, None),
                    Err(e) => return Err(e.into()),
                };
                rows.push(GsbfRow {
                    seed,
                    sinr_db,
                    gsbf_power_w: gsbf_power,
                    all_active_power_w: all_active_power,
                    active_count,
                    probes,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<GsbfRow> = per_seed.into_iter().flatten().collect();

    let mut agg = Vec::new();
    for &sinr_db in &c.sinr_targets_db {
        let at: Vec<&GsbfRow> = rows.iter().filter(|r| r.sinr_db == sinr_db).collect();
        let gsbf: Vec<f64> = at.iter().filter_map(|r| r.gsbf_power_w).collect();
        let all: Vec<f64> = at.iter().filter_map(|r| r.all_active_power_w).collect();
        let active: Vec<f64> = at
            .iter()
            .filter_map(|r| r.active_count.map(|v| v as f64))
            .collect();
        let probes: Vec<f64> = at
            .iter()
            .filter_map(|r| r.probes.map(|v| v as f64))
            .collect();
        let (gm, gs) = mean_std(&gsbf);
        let (am, as_) = mean_std(&all);
        agg.push(GsbfAggRow {
            sinr_db,
            seeds: at.len(),
            feasible: gsbf.len(),
            gsbf_power_w_mean: gm,
            gsbf_power_w_std: gs,
            all_active_power_w_mean: am,
            all_active_power_w_std: as_,
            active_count_mean: mean_std(&active).0,
            probes_mean: mean_std(&probes).0,
        });
    }
    Ok((to_csv(&rows)?, to_csv(&agg)?))
}

// ---------------------------------------------------------------------------
// max-min rate: optimal coordinated beamforming vs fixed-direction baselines
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct MaxminRow {
    seed: u64,
    snr_db: f64,
    rate_optimal: f64,
    rate_mf: f64,
    rate_zf: f64,
    probes_optimal: usize,
    probes_mf: usize,
    probes_zf: usize,
}

#[derive(Clone, Debug, Serialize)]
struct MaxminAggRow {
    snr_db: f64,
    seeds: usize,
    rate_optimal_mean: f64,
    rate_optimal_std: f64,
    rate_mf_mean: f64,
    rate_mf_std: f64,
    rate_zf_mean: f64,
    rate_zf_std: f64,
}

fn rate_bits(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

fn run_maxmin(c: &MaxminConfig) -> Result<(String, String)> {
    let per_seed: Vec<Vec<MaxminRow>> = c
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<MaxminRow>> {
            let mut bf = Beamformer::new(c.solver.to_settings());
            let mut rows = Vec::new();
            for &snr_db in &c.snr_db {
                let cfg = InstanceConfig {
                    rrhs: c.rrhs,
                    antennas_per_rrh: c.antennas_per_rrh,
                    users: c.users,
                    region_half_width_m: c.region_half_width_m,
                    channel: c.channel.clone(),
                    fronthaul_w: vec![1.0; c.rrhs],
                    drain_efficiency: 1.0,
                    max_transmit_w: db_to_linear(snr_db) * c.noise_w,
                    noise_w: c.noise_w,
                    // placeholder target; max-min probes sweep their own
                    sinr_target: 1.0,
                };
                let inst = cfg.build(seed)?;
                let tol = (sinr_upper_bound(&inst) * c.tol_fraction).max(1e-300);
                let opt = bf.maxmin_rate(&inst, tol)?;
                let mf = bf.fixed_direction_maxmin(&inst, DirectionRule::MatchedFilter, tol)?;
                let zf = bf.fixed_direction_maxmin(&inst, DirectionRule::ZeroForcing, tol)?;
                rows.push(MaxminRow {
                    seed,
                    snr_db,
                    rate_optimal: rate_bits(opt.sinr),
                    rate_mf: rate_bits(mf.sinr),
                    rate_zf: rate_bits(zf.sinr),
                    probes_optimal: opt.probes,
                    probes_mf: mf.probes,
                    probes_zf: zf.probes,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<MaxminRow> = per_seed.into_iter().flatten().collect();

    let mut agg = Vec::new();
    for &snr_db in &c.snr_db {
        let at: Vec<&MaxminRow> = rows.iter().filter(|r| r.snr_db == snr_db).collect();
        let opt: Vec<f64> = at.iter().map(|r| r.rate_optimal).collect();
        let mf: Vec<f64> = at.iter().map(|r| r.rate_mf).collect();
        let zf: Vec<f64> = at.iter().map(|r| r.rate_zf).collect();
        let (om, os) = mean_std(&opt);
        let (mm, ms) = mean_std(&mf);
        let (zm, zs) = mean_std(&zf);
        agg.push(MaxminAggRow {
            snr_db,
            seeds: at.len(),
            rate_optimal_mean: om,
            rate_optimal_std: os,
            rate_mf_mean: mm,
            rate_mf_std: ms,
            rate_zf_mean: zm,
            rate_zf_std: zs,
        });
    }
    Ok((to_csv(&rows)?, to_csv(&agg)?))
}

// ---------------------------------------------------------------------------
// channel estimation MSE across the three prior regimes
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct ChanestRow {
    seed: u64,
    mse_ls: f64,
    mse_spatial: f64,
    mse_spatio_temporal: f64,
}

#[derive(Clone, Debug, Serialize)]
struct ChanestAggRow {
    seeds: usize,
    mse_ls_mean: f64,
    mse_ls_std: f64,
    mse_spatial_mean: f64,
    mse_spatial_std: f64,
    mse_spatio_temporal_mean: f64,
    mse_spatio_temporal_std: f64,
    lambda1_spatial: f64,
    lambda1_temporal: f64,
    lambda2_temporal: f64,
}

pub fn chanest_experiment(c: &ChanestConfig) -> EstimationExperiment {
    let active = ((c.dim as f64) * c.active_fraction).round() as usize;
    let gains: Vec<f64> = (0..c.dim)
        .map(|j| if j < active { 1.0 } else { c.weak_scale })
        .collect();
    EstimationExperiment {
        dim: c.dim,
        pilots: c.pilots,
        blocks: c.blocks,
        temporal_coefficient: c.temporal_coefficient,
        gains,
        noise_var: c.noise_var,
        lambda1_grid: c.lambda1_grid.clone(),
        lambda2_grid: c.lambda2_grid.clone(),
        weight_floor_fraction: c.weight_floor_fraction,
    }
}

fn run_chanest(c: &ChanestConfig) -> Result<(String, String)> {
    let exp = chanest_experiment(c);
    let report = run_estimation_experiment(&exp, &c.seeds)?;
    let rows: Vec<ChanestRow> = report
        .per_seed
        .iter()
        .map(|&(seed, ls, sp, st)| ChanestRow {
            seed,
            mse_ls: ls,
            mse_spatial: sp,
            mse_spatio_temporal: st,
        })
        .collect();
    let ls: Vec<f64> = rows.iter().map(|r| r.mse_ls).collect();
    let sp: Vec<f64> = rows.iter().map(|r| r.mse_spatial).collect();
    let st: Vec<f64> = rows.iter().map(|r| r.mse_spatio_temporal).collect();
    let (lm, lstd) = mean_std(&ls);
    let (sm, sstd) = mean_std(&sp);
    let (tm, tstd) = mean_std(&st);
    let agg = vec![ChanestAggRow {
        seeds: rows.len(),
        mse_ls_mean: lm,
        mse_ls_std: lstd,
        mse_spatial_mean: sm,
        mse_spatial_std: sstd,
        mse_spatio_temporal_mean: tm,
        mse_spatio_temporal_std: tstd,
        lambda1_spatial: report.lambda1_spatial,
        lambda1_temporal: report.lambda1_temporal,
        lambda2_temporal: report.lambda2_temporal,
    }];
    Ok((to_csv(&rows)?, to_csv(&agg)?))
}

// ---------------------------------------------------------------------------
// scenario-based stochastic coordinated beamforming
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct ScenarioRow {
    seed: u64,
    samples: usize,
    feasible: bool,
    transmit_power_w: Option<f64>,
    empirical_outage: Option<f64>,
    max_sampled_violation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
struct ScenarioAggRow {
    samples: usize,
    seeds: usize,
    feasible: usize,
    transmit_power_w_mean: f64,
    transmit_power_w_std: f64,
    empirical_outage_mean: f64,
    empirical_outage_std: f64,
}

pub fn scenario_counts(c: &ScenarioConfig) -> Vec<usize> {
    let mut counts = c.sample_counts.clone();
    if c.append_scenario_bound {
        let vars = 1 + 2 * c.rrhs * c.antennas_per_rrh * c.users;
        counts.push(scenario_sample_bound(c.epsilon, c.confidence, vars));
    }
    counts
}

fn run_scenario(c: &ScenarioConfig) -> Result<(String, String)> {
    let counts = scenario_counts(c);
    let per_seed: Vec<Vec<ScenarioRow>> = c
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<ScenarioRow>> {
            let cfg = InstanceConfig {
                rrhs: c.rrhs,
                antennas_per_rrh: c.antennas_per_rrh,
                users: c.users,
                region_half_width_m: c.region_half_width_m,
                channel: c.channel.clone(),
                fronthaul_w: vec![1.0; c.rrhs],
                drain_efficiency: 1.0,
                max_transmit_w: c.max_transmit_w,
                noise_w: c.noise_w,
                sinr_target: db_to_linear(c.sinr_target_db),
            };
            let inst = cfg.build(seed)?;
            let mixed = acquire_mixed_csi(&inst, c.budget_links, c.error_fraction, seed)?;
            let settings = c.solver.to_settings();
            let mut rows = Vec::new();
            for &samples in &counts {
                let row = match scenario_scb(&mixed, samples, &inst, c.eval_samples, seed, &settings)
                {
                    Ok(ScenarioResult::Feasible(out)) => ScenarioRow {
                        seed,
                        samples,
                        feasible: true,
                        transmit_power_w: Some(out.transmit_power_w),
                        empirical_outage: Some(out.empirical_outage),
                        max_sampled_violation: Some(out.max_sampled_violation),
                    },
                    Ok(ScenarioResult::Infeasible) | Err(Error::Indeterminate { .. }) => {
                        ScenarioRow {
                            seed,
                            samples,
                            feasible: false,
                            transmit_power_w: None,
                            empirical_outage: None,
                            max_sampled_violation: None,
                        }
                    }
                    Err(e) => return Err(e.into()),
                };
                rows.push(row);
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ScenarioRow> = per_seed.into_iter().flatten().collect();

    let mut agg = Vec::new();
    for &samples in &counts {
        let at: Vec<&ScenarioRow> = rows.iter().filter(|r| r.samples == samples).collect();
        let power: Vec<f64> = at.iter().filter_map(|r| r.transmit_power_w).collect();
        let outage: Vec<f64> = at.iter().filter_map(|r| r.empirical_outage).collect();
        let (pm, ps) = mean_std(&power);
        let (om, os) = mean_std(&outage);
        agg.push(ScenarioAggRow {
            samples,
            seeds: at.len(),
            feasible: power.len(),
            transmit_power_w_mean: pm,
            transmit_power_w_std: ps,
            empirical_outage_mean: om,
            empirical_outage_std: os,
        });
    }
    Ok((to_csv(&rows)?, to_csv(&agg)?))
}

// ---------------------------------------------------------------------------
// modeling/solving time benchmark: template stuffing vs from-scratch
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct BenchRow {
    dims: usize,
    modeling_time_template_s: f64,
    modeling_time_scratch_s: f64,
    solving_time_s: f64,
    objective_w: f64,
}

/// One benchmark point; also used directly by the acceptance suite.
pub fn bench_stuffing_point(c: &BenchConfig, size: usize) -> Result<BenchRow2> {
    let cfg = InstanceConfig {
        rrhs: size,
        antennas_per_rrh: 1,
        users: size,
        region_half_width_m: c.region_half_width_m,
        channel: Default::default(),
        fronthaul_w: vec![1.0; size],
        drain_efficiency: 1.0,
        max_transmit_w: c.max_transmit_w,
        noise_w: dbm_to_watts(c.noise_dbm),
        sinr_target: db_to_linear(c.sinr_target_db),
    };
    // pre-generate instances so channel sampling stays out of the timings
    let total = c.warmups + c.stuffs_per_size;
    let instances: Vec<_> = (0..total)
        .map(|i| cfg.build(c.seed.wrapping_add(i as u64)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let dims = ProblemDims::new(vec![1; size], size);
    let input_of = |i: usize| StuffInput {
        channels: std::slice::from_ref(&instances[i].channel),
        noise_power: &instances[i].qos.noise_w,
        sinr_target: &instances[i].qos.sinr_target,
        max_transmit: &instances[i].power.max_transmit_w,
        drain_efficiency: &instances[i].power.drain_efficiency,
        group_weights: &[],
    };

    // warmups exercise both paths and the allocator
    let template = build_template(Family::PowerMin, &dims)?;
    let mut buffer = DataBuffer::default();
    for i in 0..c.warmups {
        let _ = template.stuff_with(&input_of(i), &mut buffer)?;
        let _ = canonicalize_reference(Family::PowerMin, &dims, &input_of(i))?;
    }

    // template path: one build amortized over the stuffs
    let start = Instant::now();
    let template = build_template(Family::PowerMin, &dims)?;
    let mut last_program = None;
    for i in c.warmups..total {
        last_program = Some(template.stuff_with(&input_of(i), &mut buffer)?);
    }
    let template_amortized = start.elapsed().as_secs_f64() / c.stuffs_per_size as f64;

    // from-scratch path
    let start = Instant::now();
    let mut scratch_program = None;
    for i in c.warmups..total {
        scratch_program = Some(canonicalize_reference(Family::PowerMin, &dims, &input_of(i))?);
    }
    let scratch_per_instance = start.elapsed().as_secs_f64() / c.stuffs_per_size as f64;

    let prog = last_program.expect("at least one stuff");
    let reference = scratch_program.expect("at least one canonicalization");
    if !prog.a.identical(&reference.a) {
        bail!("stuffed and reference programs diverged during the benchmark");
    }
    let start = Instant::now();
    let out = solve(&prog, &c.solver.to_settings())?;
    let solving = start.elapsed().as_secs_f64();
    let objective_w = match out.status {
        SolveStatus::Optimal => out.objective * out.objective,
        _ => f64::NAN,
    };
    Ok(BenchRow2 {
        dims: size,
        modeling_time_template_s: template_amortized,
        modeling_time_scratch_s: scratch_per_instance,
        solving_time_s: solving,
        objective_w,
    })
}

/// Public face of a benchmark row.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow2 {
    pub dims: usize,
    pub modeling_time_template_s: f64,
    pub modeling_time_scratch_s: f64,
    pub solving_time_s: f64,
    pub objective_w: f64,
}

fn run_bench(c: &BenchConfig) -> Result<(String, String)> {
    let mut rows = Vec::new();
    for &size in &c.sizes {
        let r = bench_stuffing_point(c, size)?;
        rows.push(BenchRow {
            dims: r.dims,
            modeling_time_template_s: r.modeling_time_template_s,
            modeling_time_scratch_s: r.modeling_time_scratch_s,
            solving_time_s: r.solving_time_s,
            objective_w: r.objective_w,
        });
    }
    // timings are single-shot; the aggregate mirrors the raw rows
    Ok((to_csv(&rows)?, to_csv(&rows)?))
}

// ---------------------------------------------------------------------------
// solve a cone-program file
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct SolveRow {
    path: String,
    status: String,
    objective: f64,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    gap: f64,
}

pub fn solve_program_file(path: &Path, solver: &crate::config::SolverConfig) -> Result<String> {
    let prog = ConeProgram::read_json_file(path)?;
    let out = solve(&prog, &solver.to_settings())?;
    let line = match out.status {
        SolveStatus::Optimal => format!(
            "status=Optimal objective={:.9} iterations={} residuals=(primal {:.3e}, dual {:.3e}, gap {:.3e})",
            out.objective, out.iterations, out.residuals.primal, out.residuals.dual, out.residuals.gap
        ),
        SolveStatus::PrimalInfeasible => format!(
            "status=PrimalInfeasible iterations={} (certificate attached; b^T y = -1)",
            out.iterations
        ),
        SolveStatus::DualInfeasible => format!(
            "status=DualInfeasible iterations={} (certificate attached; c^T nu = -1)",
            out.iterations
        ),
        SolveStatus::MaxItersReached => format!(
            "status=MaxItersReached iterations={} best residuals=(primal {:.3e}, dual {:.3e}, gap {:.3e})",
            out.iterations, out.residuals.primal, out.residuals.dual, out.residuals.gap
        ),
    };
    Ok(line)
}

fn run_solve_file(c: &SolveFileConfig) -> Result<(String, String)> {
    let path = PathBuf::from(&c.program_path);
    let prog = ConeProgram::read_json_file(&path)?;
    let out = solve(&prog, &c.solver.to_settings())?;
    let row = vec![SolveRow {
        path: c.program_path.clone(),
        status: format!("{:?}", out.status),
        objective: out.objective,
        iterations: out.iterations,
        primal_residual: out.residuals.primal,
        dual_residual: out.residuals.dual,
        gap: out.residuals.gap,
    }];
    let csv = to_csv_or_header(
        &row,
        "path,status,objective,iterations,primal_residual,dual_residual,gap",
    )?;
    Ok((csv.clone(), csv))
}
