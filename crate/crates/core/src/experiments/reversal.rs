use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{max_abs, par_map, Check, ExperimentConfig, ExperimentSummary, ModelOptions, RecordTable, TimeGrid};
use crate::central_spin::{build_phase_spectrum, evolve_phases, initial_state, polar_amplitudes, CouplingSpec};
use crate::diagnostics::purity;
use crate::error::{invalid, Result};

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const RESTORE_TOL: f64 = 1e-10;
pub const INITIAL_PURITY_TOL: f64 = 1e-12;

/// Evolution of an atypical (pure, coherent) central spin forward and backward in time.
/// `grid` spans the non-negative half; its mirror image is evaluated as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReversalConfig {
    pub seed: u64,
    pub model: ModelOptions,
    pub theta: f64,
    pub grid: TimeGrid,
}

impl Default for ReversalConfig {
    fn default() -> Self {
        ReversalConfig {
            seed: 7,
            model: ModelOptions {
                env_qubits: 12,
                couplings: CouplingSpec::default(),
                env_init: Default::default(),
            },
            theta: PI / 2.0,
            grid: TimeGrid::new(0.0, 4.0 * PI, 200),
        }
    }
}

impl ReversalConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.grid.validate()?;
        if self.grid.t_start != 0.0 {
            return Err(invalid("t-start", "must be 0 for the time-reversal experiment"));
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        Ok(())
    }
}

/// Purity along `t` and `-t` must agree, since `|r(-t)| = |r(t)|`; evolving
/// forward by `t` and then by `-t` must return the initial amplitudes.
pub fn run_time_reversal(cfg: &ReversalConfig, workers: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let (model, env) = cfg.model.build(cfg.seed)?;
    let spectrum = build_phase_spectrum(&model);
    let (alpha, beta) = polar_amplitudes(cfg.theta);
    let psi0 = initial_state(alpha, beta, &env)?;
    let times = cfg.grid.points();

    // (purity(t), purity(-t), |rho_01(t)|, |rho_01(-t)|, restore error)
    let rows = par_map(workers, times.len(), |k| {
        let t = times[k];
        let forward = evolve_phases(&psi0, &spectrum, t)?;
        let backward = evolve_phases(&psi0, &spectrum, -t)?;
        let restored = evolve_phases(&forward, &spectrum, -t)?;
        let (rf, rb) = (forward.reduced_leading(), backward.reduced_leading());
        Ok((
            purity(&rf),
            purity(&rb),
            rf.get(0, 1).norm(),
            rb.get(0, 1).norm(),
            restored.max_abs_diff(&psi0),
        ))
    })?;

    let mut records = RecordTable::new(&["t", "purity", "offdiag_abs"]);
    for (&t, row) in times.iter().zip(&rows).rev() {
        if t != 0.0 {
            records.push(vec![-t, row.1, row.3]);
        }
    }
    for (&t, row) in times.iter().zip(&rows) {
        records.push(vec![t, row.0, row.2]);
    }

    let asymmetry = max_abs(rows.iter().map(|r| r.0 - r.1));
    let restore = rows.iter().map(|r| r.4).fold(0.0, f64::max);
    let p0 = rows[0].0;

    let mut s = ExperimentSummary::new(ExperimentConfig::Reversal(cfg.clone()), times.len(), records);
    s.metrics.insert("min_purity".into(), rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min));
    s.series.insert("couplings".into(), model.couplings().to_vec());
    s.checks.push(Check::at_most("initial_purity", (p0 - 1.0).abs(), INITIAL_PURITY_TOL));
    s.checks.push(Check::at_most("purity_symmetric", asymmetry, SYMMETRY_TOL));
    s.checks.push(Check::at_most("forward_backward_restores", restore, RESTORE_TOL));
    Ok(s.finish())
}
