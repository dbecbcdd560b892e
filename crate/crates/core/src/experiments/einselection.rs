use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{max_abs, par_map, Check, ExperimentConfig, ExperimentSummary, ModelOptions, RecordTable, TimeGrid};
use crate::central_spin::{
    build_phase_spectrum, decoherence_factor, evolve_phases, initial_state, offdiag_oracle, polar_amplitudes,
    CouplingSpec,
};
use crate::diagnostics::{bloch_vector, purity};
use crate::error::{invalid, Result};

pub const POPULATION_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-10;
pub const BLOCH_Z_TOL: f64 = 1e-12;
pub const POINTER_PURITY_TOL: f64 = 1e-12;

/// Central spin started at polar angle `theta` on the Bloch sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EinselectConfig {
    pub seed: u64,
    pub model: ModelOptions,
    pub thetas: Vec<f64>,
    pub grid: TimeGrid,
    /// `t_d` is the first grid time with `|r(t)| < epsilon`.
    pub epsilon: f64,
    /// Allowed gap between late-time purity and `1 - sin^2(theta)/2`.
    pub purity_tolerance: f64,
}

impl Default for EinselectConfig {
    fn default() -> Self {
        EinselectConfig {
            seed: 7,
            model: ModelOptions {
                env_qubits: 12,
                couplings: CouplingSpec::default(),
                env_init: Default::default(),
            },
            thetas: vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI],
            grid: TimeGrid::new(0.0, 4.0 * PI, 200),
            epsilon: 0.01,
            purity_tolerance: 1e-3,
        }
    }
}

impl EinselectConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.grid.validate()?;
        if self.thetas.is_empty() {
            return Err(invalid("theta", "need at least one angle"));
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(invalid("theta", "angles must be finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must be in (0, 1)"));
        }
        if !(self.purity_tolerance > 0.0) {
            return Err(invalid("purity-tolerance", "must be > 0"));
        }
        Ok(())
    }
}

/// First time with `|r| < epsilon`.
pub(crate) fn decoherence_time(times: &[f64], r_abs: &[f64], epsilon: f64) -> Option<usize> {
    r_abs.iter().zip(times).position(|(&r, _)| r < epsilon)
}

/// Bloch trajectories of the central spin for a set of initial angles,
/// checked against the closed-form decoherence factor.
///
/// Late-time purity is averaged over grid times `t >= t_d` and compared with
/// `1 - sin^2(theta)/2`, the value reached once `r(t)` has decayed.
pub fn run_einselection_trajectory(cfg: &EinselectConfig, workers: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let (model, env) = cfg.model.build(cfg.seed)?;
    let spectrum = build_phase_spectrum(&model);
    let times = cfg.grid.points();

    let r_abs: Vec<f64> = times
        .iter()
        .map(|&t| decoherence_factor(&model, &env, t).map(|r| r.norm()))
        .collect::<Result<_>>()?;
    let td_index = decoherence_time(&times, &r_abs, cfg.epsilon);

    let mut records = RecordTable::new(&[
        "theta",
        "t",
        "bloch_x",
        "bloch_y",
        "bloch_z",
        "purity",
        "offdiag_abs",
        "offdiag_abs_oracle",
    ]);
    let (mut pop_err, mut oracle_err, mut z_err, mut pointer_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut late_purity = Vec::new();
    let mut asymptote = Vec::new();
    let mut final_offdiag = Vec::new();
    let mut law_gaps = Vec::new();

    for &theta in &cfg.thetas {
        let (alpha, beta) = polar_amplitudes(theta);
        let psi0 = initial_state(alpha, beta, &env)?;
        let rows = par_map(workers, times.len(), |k| {
            let t = times[k];
            let rho = evolve_phases(&psi0, &spectrum, t)?.reduced_leading();
            let oracle = offdiag_oracle(alpha, beta, &model, &env, t)?;
            Ok((rho, oracle))
        })?;

        let p0 = alpha.norm_sqr();
        let p1 = beta.norm_sqr();
        let z0 = bloch_vector(&rows[0].0)?.z;
        let mut purities = Vec::with_capacity(times.len());
        for (k, (rho, oracle)) in rows.iter().enumerate() {
            let b = bloch_vector(rho)?;
            let p = purity(rho);
            let off = rho.get(0, 1);
            pop_err = pop_err.max((rho.get(0, 0).re - p0).abs()).max((rho.get(1, 1).re - p1).abs());
            oracle_err = oracle_err.max((off - oracle).norm());
            z_err = z_err.max((b.z - z0).abs());
            purities.push(p);
            records.push(vec![theta, times[k], b.x, b.y, b.z, p, off.norm(), oracle.norm()]);
        }
        // pointer states: no initial coherence to lose
        if (alpha * beta).norm() < 1e-15 {
            pointer_err = pointer_err.max(max_abs(purities.iter().map(|p| p - 1.0)));
        }
        let law = 1.0 - 0.5 * theta.sin().powi(2);
        let late = td_index.map(|i| {
            let tail = &purities[i..];
            tail.iter().sum::<f64>() / tail.len() as f64
        });
        late_purity.push(late.unwrap_or(f64::NAN));
        asymptote.push(law);
        final_offdiag.push(rows.last().map(|(rho, _)| rho.get(0, 1).norm()).unwrap_or(0.0));
        if let Some(l) = late {
            law_gaps.push((l - law).abs());
        }
    }

    let mut s = ExperimentSummary::new(ExperimentConfig::Einselect(cfg.clone()), cfg.thetas.len(), records);
    s.metrics.insert("mean_coupling".into(), model.mean_coupling());
    if let Some(i) = td_index {
        s.metrics.insert("decoherence_time".into(), times[i]);
    }
    s.series.insert("theta".into(), cfg.thetas.clone());
    s.series.insert("late_purity".into(), late_purity);
    s.series.insert("asymptotic_purity".into(), asymptote);
    s.series.insert("final_offdiag_abs".into(), final_offdiag);
    s.series.insert("couplings".into(), model.couplings().to_vec());
    s.series.insert("t".into(), times.clone());
    s.series.insert("decoherence_factor_abs".into(), r_abs.clone());

    s.checks.push(Check::at_most("populations_constant", pop_err, POPULATION_TOL));
    s.checks.push(Check::at_most("offdiag_matches_oracle", oracle_err, ORACLE_TOL));
    s.checks.push(Check::at_most("bloch_z_constant", z_err, BLOCH_Z_TOL));
    s.checks.push(Check::at_most("pointer_purity", pointer_err, POINTER_PURITY_TOL));
    s.checks.push(Check {
        name: "decoherence_reached".into(),
        passed: td_index.is_some(),
        value: r_abs.iter().copied().fold(f64::INFINITY, f64::min),
        threshold: cfg.epsilon,
    });
    if td_index.is_some() {
        let worst = law_gaps.iter().copied().fold(0.0, f64::max);
        s.checks.push(Check::at_most("late_purity_matches_law", worst, cfg.purity_tolerance));
    }
    Ok(s.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::EnvInitSpec;

    #[test]
    fn decoherence_time_is_first_crossing() {
        let t = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(decoherence_time(&t, &[1.0, 0.5, 0.005, 0.2], 0.01), Some(2));
        assert_eq!(decoherence_time(&t, &[1.0, 0.5, 0.5, 0.2], 0.01), None);
    }

    #[test]
    fn sigma_z_environment_never_decoheres() {
        let cfg = EinselectConfig {
            model: ModelOptions {
                env_qubits: 4,
                couplings: CouplingSpec::default(),
                env_init: EnvInitSpec::ZUp,
            },
            thetas: vec![PI / 2.0],
            grid: TimeGrid::new(0.0, 10.0, 30),
            ..Default::default()
        };
        let s = run_einselection_trajectory(&cfg, 1).unwrap();
        assert!(!s.check("decoherence_reached").unwrap().passed);
        for p in s.records.column("purity").unwrap() {
            assert!((p - 1.0).abs() < 1e-12);
        }
        assert!(!s.passed);
    }

    #[test]
    fn small_superposition_run() {
        let cfg = EinselectConfig {
            model: ModelOptions {
                env_qubits: 3,
                couplings: CouplingSpec::List {
                    values: vec![0.7, 1.1, 1.3],
                },
                env_init: EnvInitSpec::Haar,
            },
            grid: TimeGrid::new(0.0, 5.0, 20),
            ..Default::default()
        };
        let s = run_einselection_trajectory(&cfg, 2).unwrap();
        assert!(s.check("offdiag_matches_oracle").unwrap().passed);
        assert!(s.check("populations_constant").unwrap().passed);
        assert_eq!(s.records.rows.len(), 5 * 20);
    }
}
