//! Pivot aggregate CSVs into x/series/y form for plotting.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Pivot an aggregate CSV into `x,series,y,y_std` rows matching the
/// experiment's natural axes. An empty aggregate produces only the header.
pub fn emit_plot_data(input: &Path, experiment: &str, output: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading aggregate csv {}", input.display()))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .context("aggregate csv has no header")?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let index: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();

    // (x column or None for single-row pivots, [(series, y column, std column)])
    let (x_col, series): (Option<&str>, Vec<(&str, &str, Option<&str>)>) = match experiment {
        "gsbf_power_vs_sinr" => (
            Some("sinr_db"),
            vec![
                ("gsbf", "gsbf_power_w_mean", Some("gsbf_power_w_std")),
                (
                    "all_active",
                    "all_active_power_w_mean",
                    Some("all_active_power_w_std"),
                ),
            ],
        ),
        "maxmin_vs_snr" => (
            Some("snr_db"),
            vec![
                ("optimal", "rate_optimal_mean", Some("rate_optimal_std")),
                ("matched_filter", "rate_mf_mean", Some("rate_mf_std")),
                ("zero_forcing", "rate_zf_mean", Some("rate_zf_std")),
            ],
        ),
        "chanest_mse" => (
            None,
            vec![
                ("ls", "mse_ls_mean", Some("mse_ls_std")),
                ("spatial", "mse_spatial_mean", Some("mse_spatial_std")),
                (
                    "spatio_temporal",
                    "mse_spatio_temporal_mean",
                    Some("mse_spatio_temporal_std"),
                ),
            ],
        ),
        "scenario_scb" => (
            Some("samples"),
            vec![
                (
                    "transmit_power_w",
                    "transmit_power_w_mean",
                    Some("transmit_power_w_std"),
                ),
                (
                    "empirical_outage",
                    "empirical_outage_mean",
                    Some("empirical_outage_std"),
                ),
            ],
        ),
        "bench_stuffing" => (
            Some("dims"),
            vec![
                ("modeling_template", "modeling_time_template_s", None),
                ("modeling_scratch", "modeling_time_scratch_s", None),
                ("solving", "solving_time_s", None),
            ],
        ),
        other => bail!("no plot mapping for experiment '{other}'"),
    };

    for (_, y, s) in &series {
        if !index.contains_key(*y) {
            bail!("aggregate csv is missing column '{y}'");
        }
        if let Some(s) = s {
            if !index.contains_key(*s) {
                bail!("aggregate csv is missing column '{s}'");
            }
        }
    }
    if let Some(x) = x_col {
        if !index.contains_key(x) {
            bail!("aggregate csv is missing column '{x}'");
        }
    }

    let mut out = String::from("x,series,y,y_std\n");
    for record in reader.records() {
        let record = record?;
        let get = |col: &str| record.get(index[col]).unwrap_or("").to_string();
        for (name, y, s) in &series {
            let x = match x_col {
                Some(x) => get(x),
                None => (*name).to_string(),
            };
            let y_std = s.map(|s| get(s)).unwrap_or_default();
            out.push_str(&format!("{x},{name},{},{y_std}\n", get(y)));
        }
    }
    std::fs::write(output, out)
        .with_context(|| format!("writing plot data to {}", output.display()))?;
    Ok(())
}
