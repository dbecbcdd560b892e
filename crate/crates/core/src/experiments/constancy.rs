use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    max_abs, par_map, Check, ExperimentConfig, ExperimentSummary, RecordTable, TimeGrid, SE_FACTOR,
};
use crate::central_spin::{build_phase_spectrum, evolve_phases, CentralSpinModel, CouplingSpec, PhaseSpectrum};
use crate::diagnostics::{distinguishability_from_mixed, trace_distance};
use crate::error::{invalid, Result};
use crate::haar::{sample_gue_hamiltonian, sample_state_in, SeedSpec, SpectralPropagator, DENSE_CAP};
use crate::hilbert::{maximally_mixed, CMatrix, DensityMatrix, HermitianEigen, StateVector, TensorSpace};
use crate::stats::{mean_stats, typicality_bound};

/// Dimension and count of the random unitaries used for the `U Omega U^dagger = Omega` check.
pub const IDENTITY_CHECK_DIM: usize = 64;
pub const IDENTITY_CHECK_COUNT: u64 = 10;
pub const IDENTITY_CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianSource {
    CentralSpin,
    Gue,
}

/// Haar states evolved under one fixed Hamiltonian; the subsystem is factor 0
/// of `C^m (x) C^(n_total/m)` (for the central-spin source, the central qubit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConstancyConfig {
    pub seed: u64,
    pub samples: usize,
    pub hamiltonian: HamiltonianSource,
    /// Used by the central-spin source only.
    pub env_qubits: usize,
    /// Used by the central-spin source only.
    pub couplings: CouplingSpec,
    pub n_total: usize,
    pub m: usize,
    pub grid: TimeGrid,
}

impl Default for ConstancyConfig {
    fn default() -> Self {
        ConstancyConfig {
            seed: 7,
            samples: 200,
            hamiltonian: HamiltonianSource::CentralSpin,
            env_qubits: 7,
            couplings: CouplingSpec::default(),
            n_total: 256,
            m: 2,
            grid: TimeGrid::new(0.0, 4.0 * std::f64::consts::PI, 50),
        }
    }
}

impl ConstancyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(invalid("samples", "must be ≥ 2"));
        }
        self.grid.validate()?;
        if self.m < 2 {
            return Err(invalid("m", "must be ≥ 2"));
        }
        match self.hamiltonian {
            HamiltonianSource::CentralSpin => {
                if !(1..=20).contains(&self.env_qubits) {
                    return Err(invalid("env-qubits", "must be in [1, 20]"));
                }
                if self.m != 2 {
                    return Err(invalid("m", "must be 2 for the central-spin source"));
                }
                if self.n_total != 1 << (self.env_qubits + 1) {
                    return Err(invalid("n-total", "must equal 2^(env-qubits + 1) for the central-spin source"));
                }
            }
            HamiltonianSource::Gue => {
                if self.n_total > DENSE_CAP {
                    return Err(invalid("n-total", format!("must be ≤ {DENSE_CAP} for the GUE source")));
                }
                if !self.n_total.is_multiple_of(self.m) || self.n_total / self.m < 2 {
                    return Err(invalid("n-total", "must be a multiple of m with n-total/m ≥ 2"));
                }
            }
        }
        Ok(())
    }

    fn space(&self) -> Result<TensorSpace> {
        match self.hamiltonian {
            HamiltonianSource::CentralSpin => TensorSpace::qubits(self.env_qubits + 1),
            HamiltonianSource::Gue => TensorSpace::new(vec![self.m, self.n_total / self.m]),
        }
    }
}

enum Evolver {
    Phases(PhaseSpectrum),
    Dense(SpectralPropagator),
}

impl Evolver {
    fn trajectory(&self, psi: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        match self {
            Evolver::Phases(spec) => times.iter().map(|&t| evolve_phases(psi, spec, t)).collect(),
            Evolver::Dense(prop) => {
                let coeffs = prop.to_eigenbasis(psi)?;
                times
                    .iter()
                    .map(|&t| prop.evolve_coefficients(&coeffs, psi.space(), t))
                    .collect()
            }
        }
    }
}

/// Largest entry of `U Omega U^dagger - Omega` over `count` unitaries
/// `e^{-iH}` with GUE `H` of dimension `dim`.
pub fn mixed_state_invariance_defect(dim: usize, master_seed: u64, count: u64) -> Result<f64> {
    let omega = maximally_mixed(dim)?;
    let mut worst: f64 = 0.0;
    for j in 0..count {
        let h = sample_gue_hamiltonian(dim, SeedSpec::new(master_seed, 1_000_000 + j))?;
        let eig = HermitianEigen::new(&h)?;
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            eig.values.iter().map(|&e| Complex64::from_polar(1.0, -e)),
        ));
        let u: CMatrix = &eig.vectors * phases * eig.vectors.adjoint();
        let moved = &u * omega.entries() * u.adjoint();
        worst = worst.max(max_abs((moved - omega.entries()).iter().map(|z| z.norm())));
    }
    Ok(worst)
}

/// Mean distinguishability of Haar subsystems from `Omega_S` along a fixed
/// unitary evolution, checked for constancy against its own standard errors.
pub fn run_dynamical_constancy(cfg: &ConstancyConfig, workers: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let space = cfg.space()?;
    let evolver = match cfg.hamiltonian {
        HamiltonianSource::CentralSpin => {
            let g = cfg.couplings.realize(cfg.env_qubits, cfg.seed)?;
            Evolver::Phases(build_phase_spectrum(&CentralSpinModel::new(g)?))
        }
        HamiltonianSource::Gue => {
            let h = sample_gue_hamiltonian(cfg.n_total, SeedSpec::new(cfg.seed, 0))?;
            Evolver::Dense(SpectralPropagator::new(&h)?)
        }
    };
    let times = cfg.grid.points();

    // per sample: reduced states at each grid time
    let reduced: Vec<Vec<DensityMatrix>> = par_map(workers, cfg.samples, |i| {
        let psi = sample_state_in(space.clone(), SeedSpec::new(cfg.seed, i as u64))?;
        Ok(evolver
            .trajectory(&psi, &times)?
            .iter()
            .map(StateVector::reduced_leading)
            .collect())
    })?;

    let omega_s = maximally_mixed(cfg.m)?;
    let mut records = RecordTable::new(&["sample_index", "t", "D"]);
    let mut per_time: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.samples); times.len()];
    for (i, traj) in reduced.iter().enumerate() {
        for (k, rho) in traj.iter().enumerate() {
            let d = distinguishability_from_mixed(rho)?;
            records.push(vec![i as f64, times[k], d]);
            per_time[k].push(d);
        }
    }

    let stats: Vec<_> = per_time.iter().map(|v| mean_stats(v)).collect();
    let mut ensemble_distance = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let mut avg = CMatrix::zeros(cfg.m, cfg.m);
        for traj in &reduced {
            avg += traj[k].entries();
        }
        avg /= Complex64::new(cfg.samples as f64, 0.0);
        ensemble_distance.push(trace_distance(&DensityMatrix::new(avg)?, &omega_s)?);
    }

    let base = stats[0];
    let worst_z = stats[1..]
        .iter()
        .map(|s| {
            let se = (s.standard_error.powi(2) + base.standard_error.powi(2)).sqrt();
            (s.mean - base.mean).abs() / se
        })
        .fold(0.0, f64::max);
    let max_deviation = max_abs(stats.iter().map(|s| s.mean - base.mean));
    let max_mean = stats.iter().map(|s| s.mean).fold(f64::NEG_INFINITY, f64::max);
    let bound = typicality_bound(cfg.m, cfg.n_total);
    let convergence_limit = 3.0 / (cfg.samples as f64).sqrt();
    let invariance = mixed_state_invariance_defect(IDENTITY_CHECK_DIM, cfg.seed, IDENTITY_CHECK_COUNT)?;

    let mut s = ExperimentSummary::new(ExperimentConfig::Constancy(cfg.clone()), cfg.samples, records);
    s.mean = Some(base.mean);
    s.standard_error = Some(base.standard_error);
    s.bound = Some(bound);
    s.metrics.insert("max_mean_deviation".into(), max_deviation);
    s.metrics.insert("max_standardized_deviation".into(), worst_z);
    s.series.insert("t".into(), times);
    s.series.insert("mean_d".into(), stats.iter().map(|s| s.mean).collect());
    s.series.insert("se_d".into(), stats.iter().map(|s| s.standard_error).collect());
    s.series.insert("ensemble_distance".into(), ensemble_distance.clone());
    s.checks.push(Check::at_most("constant_in_time", worst_z, SE_FACTOR));
    s.checks.push(Check::at_most("mean_within_bound", max_mean, bound));
    s.checks.push(Check::at_most(
        "ensemble_average_converges",
        ensemble_distance.iter().copied().fold(0.0, f64::max),
        convergence_limit,
    ));
    s.checks.push(Check::at_most("mixed_state_invariant", invariance, IDENTITY_CHECK_TOL));
    Ok(s.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut cfg = ConstancyConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.n_total = 128;
        assert!(cfg.validate().is_err());
        cfg.hamiltonian = HamiltonianSource::Gue;
        assert!(cfg.validate().is_ok());
        cfg.n_total = 2048;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mixed_state_is_invariant() {
        assert!(mixed_state_invariance_defect(16, 3, 3).unwrap() <= 1e-12);
    }

    #[test]
    fn small_gue_run() {
        let cfg = ConstancyConfig {
            samples: 40,
            hamiltonian: HamiltonianSource::Gue,
            n_total: 16,
            grid: TimeGrid::new(0.0, 3.0, 6),
            ..Default::default()
        };
        let s = run_dynamical_constancy(&cfg, 3).unwrap();
        assert_eq!(s.records.rows.len(), 40 * 6);
        assert_eq!(s.series["mean_d"].len(), 6);
    }
}
