use serde::{Deserialize, Serialize};

use super::{par_map, Check, ExperimentConfig, ExperimentSummary, RecordTable, SE_FACTOR};
use crate::diagnostics::distinguishability_from_mixed;
use crate::error::{invalid, Result};
use crate::haar::{sample_state_in, SeedSpec};
use crate::hilbert::{TensorSpace, DEFAULT_DIM_CAP};
use crate::stats::{mean_stats, radial_mean, typicality_bound};

/// Haar states on `C^m (x) C^(n_total/m)`, subsystem = the `m`-dimensional factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TypicalityConfig {
    pub seed: u64,
    pub samples: usize,
    pub n_total: usize,
    pub m: usize,
}

impl Default for TypicalityConfig {
    fn default() -> Self {
        TypicalityConfig {
            seed: 7,
            samples: 2000,
            n_total: 256,
            m: 2,
        }
    }
}

impl TypicalityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(invalid("m", "must be ≥ 2"));
        }
        if self.samples < 1 {
            return Err(invalid("samples", "must be ≥ 1"));
        }
        if self.n_total > DEFAULT_DIM_CAP {
            return Err(invalid("n-total", format!("must be ≤ {DEFAULT_DIM_CAP}")));
        }
        if !self.n_total.is_multiple_of(self.m) || self.n_total / self.m < 2 {
            return Err(invalid("n-total", "must be a multiple of m with n-total/m ≥ 2"));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<TensorSpace> {
        TensorSpace::new(vec![self.m, self.n_total / self.m])
    }
}

/// Distinguishability of Haar subsystems from the maximally mixed state,
/// compared with `(m/2) sqrt(1/n_total)`. For qubit subsystems the mean is
/// also compared with the analytic `E[r]/2`.
pub fn run_kinematic_typicality(cfg: &TypicalityConfig, workers: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let space = cfg.space()?;
    let distances = par_map(workers, cfg.samples, |i| {
        let psi = sample_state_in(space.clone(), SeedSpec::new(cfg.seed, i as u64))?;
        distinguishability_from_mixed(&psi.reduced_leading())
    })?;

    let mut records = RecordTable::new(&["sample_index", "D"]);
    for (i, &d) in distances.iter().enumerate() {
        records.push(vec![i as f64, d]);
    }
    let stats = mean_stats(&distances);
    let bound = typicality_bound(cfg.m, cfg.n_total);

    let mut s = ExperimentSummary::new(ExperimentConfig::Typicality(cfg.clone()), cfg.samples, records);
    s.mean = Some(stats.mean);
    s.standard_error = Some(stats.standard_error);
    s.bound = Some(bound);
    s.metrics.insert("max".into(), stats.max);
    s.metrics.insert("min".into(), stats.min);
    s.checks.push(Check::above("all_positive", stats.min, 0.0));
    s.checks.push(Check::at_most("mean_within_bound", stats.mean, bound));
    if cfg.m == 2 {
        let oracle = 0.5 * radial_mean(cfg.n_total / 2)?;
        s.metrics.insert("analytic_mean".into(), oracle);
        s.checks.push(Check::at_most(
            "analytic_mean_agreement",
            (stats.mean - oracle).abs(),
            SE_FACTOR * stats.standard_error,
        ));
    }
    Ok(s.finish())
}
