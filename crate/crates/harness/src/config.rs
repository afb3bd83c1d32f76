//! Experiment configuration schema.
//!
//! Configs are JSON documents dispatched on their `experiment` field; every
//! experiment struct carries that field itself and rejects unknown keys, so
//! typos fail loudly with serde's line/column anchors. The JSON Schema in
//! `schemas/experiment_config.schema.json` documents the same shapes.

use anyhow::{bail, Context, Result};
use cranopt::network::ChannelModel;
use cranopt::solver::SolverSettings;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub eps: f64,
    pub max_iters: usize,
    pub alpha: f64,
    pub equilibrate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            max_iters: 50_000,
            alpha: 1.5,
            equilibrate: true,
        }
    }
}

impl SolverConfig {
    pub fn to_settings(&self) -> SolverSettings {
        let mut s = SolverSettings::with_eps(self.eps);
        s.max_iters = self.max_iters;
        s.alpha = self.alpha;
        s.equilibrate = self.equilibrate;
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsbfConfig {
    pub experiment: String,
    pub rrhs: usize,
    pub antennas_per_rrh: usize,
    pub users: usize,
    pub region_half_width_m: f64,
    #[serde(default)]
    pub channel: ChannelModel,
    pub fronthaul_w: Vec<f64>,
    #[serde(default = "one")]
    pub drain_efficiency: f64,
    pub max_transmit_w: f64,
    pub noise_dbm: f64,
    pub sinr_targets_db: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxminConfig {
    pub experiment: String,
    pub rrhs: usize,
    pub antennas_per_rrh: usize,
    pub users: usize,
    pub region_half_width_m: f64,
    #[serde(default = "normalized_channel")]
    pub channel: ChannelModel,
    /// Noise power in watts; per-RRH caps sweep as snr * noise.
    pub noise_w: f64,
    pub snr_db: Vec<f64>,
    /// Bisection tolerance as a fraction of the instance's SINR upper bound;
    /// small enough to resolve interference-limited baselines.
    #[serde(default = "maxmin_tol_fraction_default")]
    pub tol_fraction: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn maxmin_tol_fraction_default() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChanestConfig {
    pub experiment: String,
    pub dim: usize,
    pub pilots: usize,
    #[serde(default = "ten")]
    pub blocks: usize,
    #[serde(default = "eta_default")]
    pub temporal_coefficient: f64,
    /// Fraction of coefficients at unit variance; the rest sit at
    /// `weak_scale`.
    pub active_fraction: f64,
    pub weak_scale: f64,
    pub noise_var: f64,
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    #[serde(default = "weight_floor")]
    pub weight_floor_fraction: f64,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: String,
    pub rrhs: usize,
    pub antennas_per_rrh: usize,
    pub users: usize,
    pub region_half_width_m: f64,
    #[serde(default = "normalized_channel")]
    pub channel: ChannelModel,
    pub max_transmit_w: f64,
    pub noise_w: f64,
    pub sinr_target_db: f64,
    /// Trained links (strongest first); the rest stay statistical.
    pub budget_links: usize,
    /// Share of a trained link's variance left as estimation error.
    pub error_fraction: f64,
    pub epsilon: f64,
    #[serde(default = "confidence_default")]
    pub confidence: f64,
    /// Explicit sample counts to sweep (ascending recommended).
    #[serde(default)]
    pub sample_counts: Vec<usize>,
    /// Append the classical scenario bound for (epsilon, confidence).
    #[serde(default = "yes")]
    pub append_scenario_bound: bool,
    #[serde(default = "eval_samples_default")]
    pub eval_samples: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub experiment: String,
    /// Square network sizes (RRHs = users, single-antenna).
    pub sizes: Vec<usize>,
    #[serde(default = "stuffs_default")]
    pub stuffs_per_size: usize,
    #[serde(default = "warmups_default")]
    pub warmups: usize,
    pub region_half_width_m: f64,
    pub max_transmit_w: f64,
    pub noise_dbm: f64,
    pub sinr_target_db: f64,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveFileConfig {
    pub experiment: String,
    pub program_path: String,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn one() -> f64 {
    1.0
}
fn ten() -> usize {
    10
}
fn eta_default() -> f64 {
    0.99
}
fn weight_floor() -> f64 {
    1e-6
}
fn confidence_default() -> f64 {
    0.01
}
fn yes() -> bool {
    true
}
fn eval_samples_default() -> usize {
    10_000
}
fn stuffs_default() -> usize {
    50
}
fn warmups_default() -> usize {
    3
}

fn normalized_channel() -> ChannelModel {
    ChannelModel {
        normalize_median_gain: true,
        ..ChannelModel::default()
    }
}

#[derive(Clone, Debug)]
pub enum ExperimentConfig {
    GsbfPowerVsSinr(GsbfConfig),
    MaxminVsSnr(MaxminConfig),
    ChanestMse(ChanestConfig),
    ScenarioScb(ScenarioConfig),
    BenchStuffing(BenchConfig),
    SolveFile(SolveFileConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GsbfPowerVsSinr(_) => "gsbf_power_vs_sinr",
            Self::MaxminVsSnr(_) => "maxmin_vs_snr",
            Self::ChanestMse(_) => "chanest_mse",
            Self::ScenarioScb(_) => "scenario_scb",
            Self::BenchStuffing(_) => "bench_stuffing",
            Self::SolveFile(_) => "solve_file",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Self::GsbfPowerVsSinr(c) => serde_json::to_value(c).unwrap(),
            Self::MaxminVsSnr(c) => serde_json::to_value(c).unwrap(),
            Self::ChanestMse(c) => serde_json::to_value(c).unwrap(),
            Self::ScenarioScb(c) => serde_json::to_value(c).unwrap(),
            Self::BenchStuffing(c) => serde_json::to_value(c).unwrap(),
            Self::SolveFile(c) => serde_json::to_value(c).unwrap(),
        }
    }
}

#[derive(Deserialize)]
struct Tag {
    experiment: String,
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let tag: Tag = serde_json::from_str(text).context("config must carry an 'experiment' field")?;
    let cfg = match tag.experiment.as_str() {
        "gsbf_power_vs_sinr" => ExperimentConfig::GsbfPowerVsSinr(serde_json::from_str(text)?),
        "maxmin_vs_snr" => ExperimentConfig::MaxminVsSnr(serde_json::from_str(text)?),
        "chanest_mse" => ExperimentConfig::ChanestMse(serde_json::from_str(text)?),
        "scenario_scb" => ExperimentConfig::ScenarioScb(serde_json::from_str(text)?),
        "bench_stuffing" => ExperimentConfig::BenchStuffing(serde_json::from_str(text)?),
        "solve_file" => ExperimentConfig::SolveFile(serde_json::from_str(text)?),
        other => bail!(
            "unknown experiment '{other}' (expected one of gsbf_power_vs_sinr, maxmin_vs_snr, \
             chanest_mse, scenario_scb, bench_stuffing, solve_file)"
        ),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    match cfg {
        ExperimentConfig::GsbfPowerVsSinr(c) => {
            if c.fronthaul_w.len() != c.rrhs {
                bail!(
                    "fronthaul_w has {} entries for {} RRHs",
                    c.fronthaul_w.len(),
                    c.rrhs
                );
            }
            if c.seeds.is_empty() || c.sinr_targets_db.is_empty() {
                bail!("seeds and sinr_targets_db must be nonempty");
            }
        }
        ExperimentConfig::MaxminVsSnr(c) => {
            if c.seeds.is_empty() || c.snr_db.is_empty() {
                bail!("seeds and snr_db must be nonempty");
            }
            if c.antennas_per_rrh * c.rrhs < c.users {
                bail!("zero forcing baseline needs antennas >= users");
            }
        }
        ExperimentConfig::ChanestMse(c) => {
            if c.seeds.is_empty() || c.lambda1_grid.is_empty() || c.lambda2_grid.is_empty() {
                bail!("seeds and lambda grids must be nonempty");
            }
            if !(0.0..=1.0).contains(&c.active_fraction) {
                bail!("active_fraction must lie in [0, 1]");
            }
        }
        ExperimentConfig::ScenarioScb(c) => {
            if c.seeds.is_empty() {
                bail!("seeds must be nonempty");
            }
            if !(0.0 < c.epsilon && c.epsilon < 1.0) {
                bail!("epsilon must lie in (0, 1)");
            }
            if c.sample_counts.is_empty() && !c.append_scenario_bound {
                bail!("no sample counts to run");
            }
        }
        ExperimentConfig::BenchStuffing(c) => {
            if c.sizes.is_empty() || c.stuffs_per_size == 0 {
                bail!("sizes must be nonempty and stuffs_per_size positive");
            }
        }
        ExperimentConfig::SolveFile(c) => {
            if c.program_path.is_empty() {
                bail!("program_path must be set");
            }
        }
    }
    Ok(())
}

/// Shift every seed by `offset`; used by the CLI's --seed-offset.
pub fn apply_seed_offset(cfg: &mut ExperimentConfig, offset: u64) {
    let shift = |seeds: &mut Vec<u64>| {
        for s in seeds.iter_mut() {
            *s = s.wrapping_add(offset);
        }
    };
    match cfg {
        ExperimentConfig::GsbfPowerVsSinr(c) => shift(&mut c.seeds),
        ExperimentConfig::MaxminVsSnr(c) => shift(&mut c.seeds),
        ExperimentConfig::ChanestMse(c) => shift(&mut c.seeds),
        ExperimentConfig::ScenarioScb(c) => shift(&mut c.seeds),
        ExperimentConfig::BenchStuffing(c) => c.seed = c.seed.wrapping_add(offset),
        ExperimentConfig::SolveFile(_) => {}
    }
}
