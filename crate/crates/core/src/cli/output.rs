use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::settings::Settings;
use super::CliError;
use crate::experiments::{ExperimentConfig, ExperimentId, ExperimentSummary, RecordTable};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One experiment inside a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub experiment: ExperimentId,
    pub passed: bool,
    pub config: ExperimentConfig,
    /// Flat settings that reproduce `config` when passed back via `--config`.
    pub settings: Settings,
    pub records: PathBuf,
    pub summary: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Experiment id, or `all`.
    pub experiment: String,
    pub master_seed: u64,
    pub workers: usize,
    pub duration_seconds: f64,
    pub passed: bool,
    pub runs: Vec<ManifestEntry>,
}

pub fn records_path(out: &Path, id: ExperimentId) -> PathBuf {
    out.join(records_file_name(id))
}

pub fn records_file_name(id: ExperimentId) -> String {
    format!("{id}_records.csv")
}

pub fn summary_path(out: &Path, id: ExperimentId) -> PathBuf {
    out.join(format!("{id}_summary.json"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Shortest round-trip decimal form, with `-0` written as `0`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        v.to_string()
    }
}

pub fn write_csv(path: &Path, table: &RecordTable) -> Result<(), CliError> {
    let csv_err = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| format_value(v))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Summary JSON. The `records` field names the CSV file holding the table.
pub fn summary_json(summary: &ExperimentSummary) -> String {
    let mut value = serde_json::to_value(summary).expect("summary serializes");
    if let Some(obj) = value.as_object_mut() {
        let name = records_file_name(summary.experiment);
        obj.insert("records".into(), serde_json::Value::String(name));
    }
    let mut text = serde_json::to_string_pretty(&value).expect("summary serializes");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes the records CSV and summary JSON of one experiment.
pub fn write_experiment(out: &Path, summary: &ExperimentSummary) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let records = records_path(out, summary.experiment);
    let summary_file = summary_path(out, summary.experiment);
    write_csv(&records, &summary.records)?;
    fs::write(&summary_file, summary_json(summary)).map_err(io_err(&summary_file))?;
    Ok((records, summary_file))
}
