//! Run summary and CSV files.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use kreinlab::krein::{TraceReport, REPORT_SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiments::{ExperimentOutput, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub schema_version: u32,
    pub tool_version: String,
    pub timestamp: String,
    pub pass: bool,
    pub config: ExperimentConfig,
    pub reports: Vec<TraceReport>,
    /// One line per failing row.
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn new(config: ExperimentConfig, reports: Vec<TraceReport>, timestamp: String) -> Self {
        let failures: Vec<String> = reports
            .iter()
            .flat_map(|r| {
                r.values.iter().filter(|v| !v.pass).map(move |v| {
                    format!(
                        "{}/{}: measured {}, expected {} (tolerance {}) [{}]",
                        r.experiment, v.key, v.measured, v.prediction, v.tolerance, v.paper_anchor
                    )
                })
            })
            .collect();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            pass: failures.is_empty(),
            config,
            reports,
            failures,
        }
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `summary.json`, `<experiment>.csv` with the value rows, and
/// `<experiment>_<table>.csv` for every extra table.
pub fn write_outputs(dir: &Path, summary: &RunSummary, outputs: &[ExperimentOutput]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let json = serde_json::to_string_pretty(summary)?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    for out in outputs {
        let name = &out.report.experiment;
        let path = dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot create {}", path.display()))?;
        for v in &out.report.values {
            w.serialize(v)?;
        }
        w.flush()?;
        for t in &out.tables {
            write_table(&dir.join(format!("{name}_{}.csv", t.name)), t)?;
        }
    }
    Ok(())
}
