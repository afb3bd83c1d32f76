use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cranopt_cli::config::{ExperimentConfig, SolverConfig};
use cranopt_cli::{apply_seed_offset, emit_plot_data, experiments, parse_config, run};

#[derive(Parser)]
#[command(
    bin_name = "cranopt",
    about = "Cloud-RAN optimization experiments: cone solver, matrix stuffing, beamforming, CSI",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs and the run manifest.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Added to every seed in the config.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Network power: GSBF vs all-active over an SINR sweep.
    GsbfPowerVsSinr(RunArgs),
    /// Max-min rate: optimal vs fixed-direction baselines over an SNR sweep.
    MaxminVsSnr(RunArgs),
    /// Channel estimation MSE across prior regimes.
    ChanestMse(RunArgs),
    /// Scenario-based stochastic coordinated beamforming.
    ScenarioScb(RunArgs),
    /// Modeling/solving time benchmark (matrix stuffing vs from-scratch).
    BenchStuffing(RunArgs),
    /// Run the solve_file experiment from a config.
    SolveFile(RunArgs),
    /// Solve a cone-program JSON file directly.
    Solve {
        /// Cone-program file ({"m", "n", "A", "b", "c", "cone"}).
        program: PathBuf,
        /// Solver tolerance.
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
    },
    /// Pivot an aggregate CSV into plot-ready x/series/y rows.
    PlotData {
        #[arg(long)]
        input: PathBuf,
        /// Experiment the aggregate came from.
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the config echoed in a run manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

fn load_config(args: &RunArgs, expected: &str) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut cfg = parse_config(&text)
        .with_context(|| format!("validating config {}", args.config.display()))?;
    if cfg.name() != expected {
        bail!(
            "config declares experiment '{}' but the subcommand expects '{expected}'",
            cfg.name()
        );
    }
    apply_seed_offset(&mut cfg, args.seed_offset);
    Ok(cfg)
}

fn run_experiment(args: &RunArgs, expected: &str) -> Result<()> {
    let cfg = load_config(args, expected)?;
    let artifacts = run(&cfg, &args.out)?;
    println!("raw:       {}", artifacts.raw_csv.display());
    println!("aggregate: {}", artifacts.aggregate_csv.display());
    println!("manifest:  {}", artifacts.manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GsbfPowerVsSinr(a) => run_experiment(a, "gsbf_power_vs_sinr"),
        Command::MaxminVsSnr(a) => run_experiment(a, "maxmin_vs_snr"),
        Command::ChanestMse(a) => run_experiment(a, "chanest_mse"),
        Command::ScenarioScb(a) => run_experiment(a, "scenario_scb"),
        Command::BenchStuffing(a) => run_experiment(a, "bench_stuffing"),
        Command::SolveFile(a) => run_experiment(a, "solve_file"),
        Command::Solve {
            program,
            eps,
            max_iters,
        } => {
            let solver = SolverConfig {
                eps: *eps,
                max_iters: *max_iters,
                ..SolverConfig::default()
            };
            experiments::solve_program_file(program, &solver).map(|line| println!("{line}"))
        }
        Command::PlotData {
            input,
            experiment,
            out,
        } => emit_plot_data(input, experiment, out),
        Command::Rerun { manifest, out } => {
            cranopt_cli::run_from_manifest(manifest, out).map(|artifacts| {
                println!("aggregate: {}", artifacts.aggregate_csv.display());
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
