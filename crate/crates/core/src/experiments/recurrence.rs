use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::einselection::decoherence_time;
use super::{par_map, Check, ExperimentConfig, ExperimentSummary, ModelOptions, RecordTable, TimeGrid};
use crate::central_spin::{
    build_phase_spectrum, decoherence_factor, evolve_phases, initial_state, CentralSpinModel, CouplingSpec,
    PhaseSpectrum,
};
use crate::error::{invalid, Result};
use crate::hilbert::StateVector;

pub const REVIVAL_TOL: f64 = 1e-10;
pub const NODE_TOL: f64 = 1e-12;
/// Incommensurate couplings must keep `|r|` below this after `t_d`.
pub const NO_REVIVAL_LEVEL: f64 = 0.5;

/// Decoherence factor of the central spin tracked over long times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecurrenceConfig {
    pub seed: u64,
    pub model: ModelOptions,
    pub grid: TimeGrid,
    pub epsilon: f64,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        RecurrenceConfig {
            seed: 7,
            model: ModelOptions {
                env_qubits: 8,
                couplings: CouplingSpec::Equal { g: 1.0 },
                env_init: Default::default(),
            },
            grid: TimeGrid::new(0.0, 2.0 * PI, 201),
            epsilon: 0.01,
        }
    }
}

impl RecurrenceConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.grid.validate()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must be in (0, 1)"));
        }
        Ok(())
    }
}

/// `|r(t)|` recovered from the simulated state as `|rho_01| / |alpha beta|`.
fn simulated_r(psi0: &StateVector, spectrum: &PhaseSpectrum, t: f64) -> Result<f64> {
    let rho = evolve_phases(psi0, spectrum, t)?.reduced_leading();
    Ok(rho.get(0, 1).norm() / 0.5)
}

fn equal_coupling(model: &CentralSpinModel) -> Option<f64> {
    let g = model.couplings()[0];
    (g != 0.0 && model.couplings().iter().all(|&x| x == g)).then_some(g)
}

/// With equal couplings `g`, `|r(t)| = |cos(g t)|^N` revives fully at
/// `t = pi/g` and vanishes at `t = pi/(2g)`. With unequal couplings the
/// check is instead that `|r|` stays below 0.5 after `t_d`.
pub fn run_recurrence(cfg: &RecurrenceConfig, workers: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let (model, env) = cfg.model.build(cfg.seed)?;
    let spectrum = build_phase_spectrum(&model);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let psi0 = initial_state(h, h, &env)?;
    let times = cfg.grid.points();

    let rows = par_map(workers, times.len(), |k| {
        let t = times[k];
        Ok((simulated_r(&psi0, &spectrum, t)?, decoherence_factor(&model, &env, t)?.norm()))
    })?;
    let mut records = RecordTable::new(&["t", "r_abs", "r_abs_oracle"]);
    for (&t, &(sim, oracle)) in times.iter().zip(&rows) {
        records.push(vec![t, sim, oracle]);
    }
    let sim: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let oracle_gap = rows.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let td = decoherence_time(&times, &sim, cfg.epsilon);

    let mut s = ExperimentSummary::new(ExperimentConfig::Recurrence(cfg.clone()), times.len(), records);
    s.series.insert("couplings".into(), model.couplings().to_vec());
    s.checks.push(Check::at_most("matches_closed_form", oracle_gap, super::einselection::ORACLE_TOL));
    if let Some(i) = td {
        s.metrics.insert("decoherence_time".into(), times[i]);
    }

    match equal_coupling(&model) {
        Some(g) => {
            let revival_t = PI / g.abs();
            let node_t = 0.5 * PI / g.abs();
            let revival = simulated_r(&psi0, &spectrum, revival_t)?;
            let node = simulated_r(&psi0, &spectrum, node_t)?;
            s.metrics.insert("revival_time".into(), revival_t);
            s.metrics.insert("r_abs_at_revival".into(), revival);
            s.metrics.insert("r_abs_at_node".into(), node);
            s.checks.push(Check::at_least("full_revival", revival, 1.0 - REVIVAL_TOL));
            s.checks.push(Check::at_most("node_vanishes", node, NODE_TOL));
        }
        None => {
            let late_max = td
                .map(|i| sim[i..].iter().copied().fold(0.0, f64::max))
                .unwrap_or(f64::INFINITY);
            s.metrics.insert("max_r_abs_after_td".into(), late_max);
            s.checks.push(Check {
                name: "decoherence_reached".into(),
                passed: td.is_some(),
                value: sim.iter().copied().fold(f64::INFINITY, f64::min),
                threshold: cfg.epsilon,
            });
            s.checks.push(Check::at_most("no_revival_after_td", late_max, NO_REVIVAL_LEVEL));
        }
    }
    Ok(s.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_coupling_detection() {
        assert_eq!(equal_coupling(&CentralSpinModel::new(vec![2.0, 2.0]).unwrap()), Some(2.0));
        assert_eq!(equal_coupling(&CentralSpinModel::new(vec![2.0, 1.0]).unwrap()), None);
    }

    #[test]
    fn two_qubit_environment_revives() {
        let cfg = RecurrenceConfig {
            model: ModelOptions {
                env_qubits: 2,
                couplings: CouplingSpec::Equal { g: 2.0 },
                env_init: Default::default(),
            },
            grid: TimeGrid::new(0.0, PI, 21),
            ..Default::default()
        };
        let s = run_recurrence(&cfg, 1).unwrap();
        assert!(s.passed, "{:?}", s.checks);
        assert!((s.metric("revival_time").unwrap() - PI / 2.0).abs() < 1e-15);
    }
}
