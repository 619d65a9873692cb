//! Command-line driver for the kreinlab experiments.

pub mod config;
pub mod experiments;
pub mod output;
pub mod schema;
pub mod validate;

use std::path::{Path, PathBuf};

use anyhow::Result;

use config::ExperimentConfig;
use experiments::Runner;
use output::{now_rfc3339, write_outputs, RunSummary};

/// Run every experiment selected by `cfg` and write the outputs to `out`
/// (or the config's `output_dir`, or `kreinlab-out`).
pub fn run(cfg: ExperimentConfig, out: Option<&Path>) -> Result<(RunSummary, PathBuf)> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("kreinlab-out"));
    let runner = Runner::new(cfg.clone());
    let mut outputs = Vec::new();
    for e in cfg.experiment.expand() {
        eprintln!("running {}", e.name());
        outputs.push(runner.run(e)?);
    }
    let timestamp = now_rfc3339();
    let outputs: Vec<_> = outputs
        .into_iter()
        .map(|mut o| {
            o.report.timestamp = Some(timestamp.clone());
            o
        })
        .collect();
    let summary = RunSummary::new(cfg, outputs.iter().map(|o| o.report.clone()).collect(), timestamp);
    write_outputs(&dir, &summary, &outputs)?;
    Ok((summary, dir))
}
