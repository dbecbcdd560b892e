//! Command-line front end: flag and config-file resolution, output files and
//! exit codes.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! errors, 2 for invalid configuration, 3 for I/O failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::experiments::{run, ExperimentId, ExperimentSummary};
use crate::Error;

pub mod output;
pub mod settings;

use output::{write_experiment, write_json, ManifestEntry, RunManifest, MANIFEST_FILE};
use settings::{applicable, check_flags_apply, resolve, settings_for, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{0}")]
    Run(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Run(Error::InvalidParameter { .. }) => EXIT_CONFIG,
            CliError::Run(_) => EXIT_FAILED,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "einselect-lab", version, about = "Typicality and einselection experiments on finite quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distinguishability of Haar-random subsystems from the maximally mixed state
    Typicality(RunArgs),
    /// Bloch-radius distribution of a Haar-random qubit against its analytic law
    Density(RunArgs),
    /// Mean distinguishability along unitary evolution
    Constancy(RunArgs),
    /// Central-spin decoherence and pointer states
    Einselect(RunArgs),
    /// Long-time revivals of the decoherence factor
    Recurrence(RunArgs),
    /// Forward and backward evolution of a coherent central spin
    Reversal(RunArgs),
    /// Every experiment in turn
    All(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub settings: Settings,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads (0 = one per core)
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// JSON file with flag names as keys, or a manifest from an earlier run
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Settings read from `--config`.
#[derive(Debug, Clone, Default)]
pub enum FileSettings {
    #[default]
    None,
    Flat(Box<Settings>),
    /// Per-experiment settings recovered from a run manifest.
    Manifest(BTreeMap<ExperimentId, Settings>),
}

impl FileSettings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        if value.get("runs").is_some() {
            let manifest: RunManifest = serde_json::from_value(value)
                .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
            Ok(FileSettings::Manifest(
                manifest.runs.into_iter().map(|r| (r.experiment, r.settings)).collect(),
            ))
        } else {
            let flat: Settings = serde_json::from_value(value)
                .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
            Ok(FileSettings::Flat(Box::new(flat)))
        }
    }

    pub fn for_experiment(&self, id: ExperimentId) -> Result<Settings, CliError> {
        match self {
            FileSettings::None => Ok(Settings::default()),
            FileSettings::Flat(s) => Ok(restrict(s, id)),
            FileSettings::Manifest(runs) => runs
                .get(&id)
                .cloned()
                .ok_or_else(|| CliError::config("config", format!("manifest has no {id} run"))),
        }
    }
}

/// Drops keys the experiment does not read.
pub fn restrict(s: &Settings, id: ExperimentId) -> Settings {
    let keep = applicable(id);
    let mut value = serde_json::to_value(s).expect("settings serialize");
    if let Some(obj) = value.as_object_mut() {
        obj.retain(|k, _| keep.contains(&k.as_str()));
    }
    serde_json::from_value(value).expect("settings deserialize")
}

fn report(summary: &ExperimentSummary) -> String {
    let status = if summary.passed { "PASS" } else { "FAIL" };
    let mut line = format!("{:<11} {status}", summary.experiment.as_str());
    if let (Some(mean), Some(se)) = (summary.mean, summary.standard_error) {
        line.push_str(&format!("  mean D = {mean:.6} ± {se:.6}"));
    }
    if let Some(bound) = summary.bound {
        line.push_str(&format!("  bound = {bound:.6}"));
    }
    let failed: Vec<&str> = summary
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        line.push_str(&format!("  ({} checks)", summary.checks.len()));
    } else {
        line.push_str(&format!("  failed: {}", failed.join(", ")));
    }
    line
}

/// Runs the experiments, writes all outputs and returns the manifest.
pub fn execute(ids: &[ExperimentId], args: &RunArgs, label: &str) -> Result<RunManifest, CliError> {
    let file = match &args.config {
        Some(path) => FileSettings::load(path)?,
        None => FileSettings::None,
    };
    let mut configs = Vec::with_capacity(ids.len());
    for &id in ids {
        let flags = if ids.len() == 1 {
            check_flags_apply(id, &args.settings)?;
            args.settings.clone()
        } else {
            restrict(&args.settings, id)
        };
        configs.push(resolve(id, &flags.over(&file.for_experiment(id)?))?);
    }

    let started = Instant::now();
    let mut runs = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let summary = run(cfg, args.workers)?;
        let (records, summary_file) = write_experiment(&args.out, &summary)?;
        println!("{}", report(&summary));
        runs.push(ManifestEntry {
            experiment: summary.experiment,
            passed: summary.passed,
            config: cfg.clone(),
            settings: settings_for(cfg),
            records,
            summary: summary_file,
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: label.to_string(),
        master_seed: configs.first().map(|c| c.seed()).unwrap_or_default(),
        workers: args.workers,
        duration_seconds: started.elapsed().as_secs_f64(),
        passed: runs.iter().all(|r| r.passed),
        runs,
    };
    write_json(&args.out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Parses `args` (including the program name) and returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (ids, run_args, label): (Vec<ExperimentId>, _, String) = match &cli.command {
        Command::Typicality(a) => (vec![ExperimentId::Typicality], a, "typicality".into()),
        Command::Density(a) => (vec![ExperimentId::Density], a, "density".into()),
        Command::Constancy(a) => (vec![ExperimentId::Constancy], a, "constancy".into()),
        Command::Einselect(a) => (vec![ExperimentId::Einselect], a, "einselect".into()),
        Command::Recurrence(a) => (vec![ExperimentId::Recurrence], a, "recurrence".into()),
        Command::Reversal(a) => (vec![ExperimentId::Reversal], a, "reversal".into()),
        Command::All(a) => (ExperimentId::ALL.to_vec(), a, "all".into()),
    };
    match execute(&ids, run_args, &label) {
        Ok(manifest) if manifest.passed => EXIT_OK,
        Ok(_) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
