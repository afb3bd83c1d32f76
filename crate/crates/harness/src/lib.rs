//! Experiment runner library behind the `cranopt` CLI: configuration
//! parsing, seeded experiment execution with CSV/manifest outputs, and
//! plot-data pivoting.

pub mod config;
pub mod experiments;
pub mod plot;

pub use config::{apply_seed_offset, parse_config, ExperimentConfig};
pub use experiments::{run, run_from_manifest, RunArtifacts};
pub use plot::emit_plot_data;
