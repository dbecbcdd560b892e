//! Monte Carlo and trajectory harnesses.
//!
//! Each harness takes a fully resolved config and a worker count. Samples
//! are computed independently on a rayon pool and collected in
//! `sample_index` order before any reduction, so summaries do not depend on
//! the worker count.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::central_spin::{CentralSpinModel, CouplingSpec, EnvironmentInit};
use crate::error::{invalid, Result};

mod constancy;
mod density;
mod einselection;
mod recurrence;
mod reversal;
mod typicality;

pub use constancy::{
    mixed_state_invariance_defect, run_dynamical_constancy, ConstancyConfig, HamiltonianSource, IDENTITY_CHECK_COUNT,
    IDENTITY_CHECK_DIM,
};
pub use density::{run_density_of_states, DensityConfig};
pub use einselection::{run_einselection_trajectory, EinselectConfig};
pub use recurrence::{run_recurrence, RecurrenceConfig};
pub use reversal::{run_time_reversal, ReversalConfig};
pub use typicality::{run_kinematic_typicality, TypicalityConfig};

/// Statistical acceptance: mean comparisons use this many standard errors.
pub const SE_FACTOR: f64 = 3.0;
/// Statistical acceptance: histogram fits need a chi-square p-value above this.
pub const MIN_P_VALUE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Typicality,
    Density,
    Constancy,
    Einselect,
    Recurrence,
    Reversal,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Typicality,
        ExperimentId::Density,
        ExperimentId::Constancy,
        ExperimentId::Einselect,
        ExperimentId::Recurrence,
        ExperimentId::Reversal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Typicality => "typicality",
            ExperimentId::Density => "density",
            ExperimentId::Constancy => "constancy",
            ExperimentId::Einselect => "einselect",
            ExperimentId::Recurrence => "recurrence",
            ExperimentId::Reversal => "reversal",
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `steps` uniformly spaced points from `t_start` to `t_end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Self {
        TimeGrid {
            t_start,
            t_end,
            steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(invalid("t-end", "time grid bounds must be finite"));
        }
        if self.steps < 2 {
            return Err(invalid("steps", "must be ≥ 2"));
        }
        if !(self.t_end > self.t_start) {
            return Err(invalid("t-end", "must be greater than t-start"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let dt = (self.t_end - self.t_start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.t_end
                } else {
                    self.t_start + k as f64 * dt
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnvInitSpec {
    /// Each qubit in `(|0> + |1>)/sqrt 2`.
    #[default]
    Superposition,
    /// Each qubit in `|0>`; produces no decoherence.
    ZUp,
    /// Independent Haar-random qubits from the seeded environment stream.
    Haar,
}

/// Central spin model parameters shared by the trajectory experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelOptions {
    pub env_qubits: usize,
    pub couplings: CouplingSpec,
    pub env_init: EnvInitSpec,
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        if self.env_qubits < 1 {
            return Err(invalid("env-qubits", "must be ≥ 1"));
        }
        if self.env_qubits > 20 {
            return Err(invalid("env-qubits", "must be ≤ 20 (state dimension cap 2^21)"));
        }
        Ok(())
    }

    pub fn build(&self, master_seed: u64) -> Result<(CentralSpinModel, EnvironmentInit)> {
        self.validate()?;
        let g = self.couplings.realize(self.env_qubits, master_seed)?;
        let model = CentralSpinModel::new(g)?;
        let env = match self.env_init {
            EnvInitSpec::Superposition => EnvironmentInit::superposition(self.env_qubits),
            EnvInitSpec::ZUp => EnvironmentInit::z_up(self.env_qubits),
            EnvInitSpec::Haar => EnvironmentInit::haar(self.env_qubits, master_seed)?,
        };
        Ok((model, env))
    }
}

/// `half_periods * pi / mean(g)` for the couplings `spec` realizes.
pub fn default_horizon(
    couplings: &CouplingSpec,
    env_qubits: usize,
    master_seed: u64,
    half_periods: f64,
) -> Result<f64> {
    let g = couplings.realize(env_qubits.max(1), master_seed)?;
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    if !(mean.abs() > 0.0) {
        return Err(invalid("couplings", "mean coupling is zero; give t-end explicitly"));
    }
    Ok(half_periods * PI / mean.abs())
}

/// Fully resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Typicality(TypicalityConfig),
    Density(DensityConfig),
    Constancy(ConstancyConfig),
    Einselect(EinselectConfig),
    Recurrence(RecurrenceConfig),
    Reversal(ReversalConfig),
}

impl ExperimentConfig {
    pub fn id(&self) -> ExperimentId {
        match self {
            ExperimentConfig::Typicality(_) => ExperimentId::Typicality,
            ExperimentConfig::Density(_) => ExperimentId::Density,
            ExperimentConfig::Constancy(_) => ExperimentId::Constancy,
            ExperimentConfig::Einselect(_) => ExperimentId::Einselect,
            ExperimentConfig::Recurrence(_) => ExperimentId::Recurrence,
            ExperimentConfig::Reversal(_) => ExperimentId::Reversal,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::Typicality(c) => c.seed,
            ExperimentConfig::Density(c) => c.seed,
            ExperimentConfig::Constancy(c) => c.seed,
            ExperimentConfig::Einselect(c) => c.seed,
            ExperimentConfig::Recurrence(c) => c.seed,
            ExperimentConfig::Reversal(c) => c.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Typicality(c) => c.validate(),
            ExperimentConfig::Density(c) => c.validate(),
            ExperimentConfig::Constancy(c) => c.validate(),
            ExperimentConfig::Einselect(c) => c.validate(),
            ExperimentConfig::Recurrence(c) => c.validate(),
            ExperimentConfig::Reversal(c) => c.validate(),
        }
    }
}

/// Runs any experiment on a pool of `workers` threads (0 = rayon default).
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<ExperimentSummary> {
    match config {
        ExperimentConfig::Typicality(c) => run_kinematic_typicality(c, workers),
        ExperimentConfig::Density(c) => run_density_of_states(c, workers),
        ExperimentConfig::Constancy(c) => run_dynamical_constancy(c, workers),
        ExperimentConfig::Einselect(c) => run_einselection_trajectory(c, workers),
        ExperimentConfig::Recurrence(c) => run_recurrence(c, workers),
        ExperimentConfig::Reversal(c) => run_time_reversal(c, workers),
    }
}

/// Column-named table of per-sample or per-time records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RecordTable {
    pub fn new(columns: &[&str]) -> Self {
        RecordTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// One pass/fail criterion with the measured value and its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value > threshold,
            value,
            threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: ExperimentId,
    pub master_seed: u64,
    pub sample_count: usize,
    pub mean: Option<f64>,
    pub standard_error: Option<f64>,
    /// `(m/2) sqrt(1/n)` where the experiment has one.
    pub bound: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub config: ExperimentConfig,
    pub records: RecordTable,
}

impl ExperimentSummary {
    pub(crate) fn new(config: ExperimentConfig, sample_count: usize, records: RecordTable) -> Self {
        ExperimentSummary {
            experiment: config.id(),
            master_seed: config.seed(),
            sample_count,
            mean: None,
            standard_error: None,
            bound: None,
            metrics: BTreeMap::new(),
            series: BTreeMap::new(),
            checks: Vec::new(),
            passed: false,
            config,
            records,
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

/// Maps `f` over `0..count` on a dedicated pool, preserving index order.
pub(crate) fn par_map<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

pub(crate) fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().map(f64::abs).fold(0.0, f64::max)
}
