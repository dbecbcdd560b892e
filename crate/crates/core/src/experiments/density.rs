use serde::{Deserialize, Serialize};

use super::{par_map, Check, ExperimentConfig, ExperimentSummary, RecordTable, MIN_P_VALUE, SE_FACTOR};
use crate::diagnostics::bloch_vector;
use crate::error::{invalid, Result};
use crate::haar::{sample_state_in, SeedSpec};
use crate::hilbert::TensorSpace;
use crate::stats::{chi_square_uniform_bins, mean_stats, radial_cdf, radial_mean};

/// Bloch-radius histogram of a qubit entangled with an `n_env`-dimensional environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DensityConfig {
    pub seed: u64,
    /// Samples per environment dimension.
    pub samples: usize,
    pub n_env: Vec<usize>,
    pub bins: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            seed: 7,
            samples: 10_000,
            n_env: vec![2, 4, 8],
            bins: 20,
        }
    }
}

impl DensityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(invalid("samples", "must be ≥ 1"));
        }
        if self.n_env.is_empty() {
            return Err(invalid("n-env", "need at least one environment dimension"));
        }
        if let Some(&bad) = self.n_env.iter().find(|&&n| !(2..=1 << 20).contains(&n)) {
            return Err(invalid("n-env", format!("{bad} is outside [2, 2^20]")));
        }
        if self.bins < 2 {
            return Err(invalid("bins", "must be ≥ 2"));
        }
        Ok(())
    }
}

/// Chi-square fit of sampled Bloch radii to the law `r^2 (1 - r^2)^(n_env - 2)`,
/// plus agreement of each sample mean with the analytic `E[r]`. Sample
/// indices run consecutively across the listed environment dimensions.
pub fn run_density_of_states(cfg: &DensityConfig, workers: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let mut records = RecordTable::new(&["n_env", "sample_index", "r"]);
    let mut checks = Vec::new();
    let mut series: [Vec<f64>; 7] = Default::default();
    let mut means = Vec::new();

    for (block, &n_env) in cfg.n_env.iter().enumerate() {
        let space = TensorSpace::new(vec![2, n_env])?;
        let offset = block * cfg.samples;
        let radii = par_map(workers, cfg.samples, |i| {
            let psi = sample_state_in(space.clone(), SeedSpec::new(cfg.seed, (offset + i) as u64))?;
            Ok(bloch_vector(&psi.reduced_leading())?.radius())
        })?;
        for (i, &r) in radii.iter().enumerate() {
            records.push(vec![n_env as f64, (offset + i) as f64, r]);
        }
        let stats = mean_stats(&radii);
        let oracle = radial_mean(n_env)?;
        let chi = chi_square_uniform_bins(&radii, cfg.bins, |x| {
            radial_cdf(n_env, x).expect("n_env validated")
        })?;
        checks.push(Check::above(format!("chi_square_p[n_env={n_env}]"), chi.p_value, MIN_P_VALUE));
        checks.push(Check::at_most(
            format!("mean_r_agreement[n_env={n_env}]"),
            (stats.mean - oracle).abs(),
            SE_FACTOR * stats.standard_error,
        ));
        for (col, v) in series.iter_mut().zip([
            n_env as f64,
            stats.mean,
            stats.standard_error,
            oracle,
            chi.statistic,
            chi.dof as f64,
            chi.p_value,
        ]) {
            col.push(v);
        }
        means.push((n_env, stats.mean));
    }

    means.sort_by_key(|&(n, _)| n);
    if means.len() > 1 {
        let worst_step = means
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check {
            name: "mean_r_decreasing".into(),
            passed: worst_step < 0.0,
            value: worst_step,
            threshold: 0.0,
        });
    }

    let total = cfg.samples * cfg.n_env.len();
    let mut s = ExperimentSummary::new(ExperimentConfig::Density(cfg.clone()), total, records);
    for (name, col) in ["n_env", "mean_r", "se_r", "analytic_mean_r", "chi_square", "dof", "p_value"]
        .into_iter()
        .zip(series)
    {
        s.series.insert(name.into(), col);
    }
    s.checks = checks;
    Ok(s.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dims() {
        let cfg = DensityConfig {
            n_env: vec![1],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn uniform_ball_for_two_qubits() {
        let cfg = DensityConfig {
            samples: 2000,
            n_env: vec![2],
            ..Default::default()
        };
        let s = run_density_of_states(&cfg, 0).unwrap();
        assert!(s.passed, "{:?}", s.checks);
        assert!(s.check("mean_r_decreasing").is_none());
    }
}
