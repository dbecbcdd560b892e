//! Central spin model: one qubit coupled to `N` environment qubits through
//!
//! ```text
//! H = 1/2 sigma_z (x) sum_i g_i sigma_z^(i)
//! ```
//!
//! `H` is diagonal in the computational basis, so evolution reduces to a
//! table of eigenphases. The central spin is factor 0, i.e. the most
//! significant bit of the composite index. Bit value 0 is the `+1`
//! eigenstate of `sigma_z`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::haar::{sample_state_on_stream, substream, SeedSpec};
use crate::hilbert::{tensor_compose, StateVector, TensorSpace, NORM_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CentralSpinModel {
    couplings: Vec<f64>,
    space: TensorSpace,
}

impl CentralSpinModel {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(invalid("couplings", "need at least one environment qubit"));
        }
        if let Some(g) = couplings.iter().find(|g| !g.is_finite()) {
            return Err(invalid("couplings", format!("non-finite coupling {g}")));
        }
        let space = TensorSpace::qubits(couplings.len() + 1)?;
        Ok(CentralSpinModel { couplings, space })
    }

    pub fn env_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn mean_coupling(&self) -> f64 {
        self.couplings.iter().sum::<f64>() / self.couplings.len() as f64
    }
}

/// How the couplings `g_i` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingSpec {
    /// iid uniform on `[low, high)`, drawn from the seeded coupling stream.
    Uniform { low: f64, high: f64 },
    Equal { g: f64 },
    List { values: Vec<f64> },
}

impl Default for CouplingSpec {
    fn default() -> Self {
        CouplingSpec::Uniform {
            low: 0.5,
            high: 1.5,
        }
    }
}

impl CouplingSpec {
    pub fn realize(&self, env_count: usize, master_seed: u64) -> Result<Vec<f64>> {
        match self {
            CouplingSpec::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(invalid("couplings", "uniform range needs low < high"));
                }
                let mut rng = SeedSpec::new(master_seed, 0).rng(substream::COUPLINGS);
                Ok((0..env_count).map(|_| rng.random_range(*low..*high)).collect())
            }
            CouplingSpec::Equal { g } => Ok(vec![*g; env_count]),
            CouplingSpec::List { values } => {
                if values.len() != env_count {
                    return Err(invalid(
                        "couplings",
                        format!("{} values given for {} environment qubits", values.len(), env_count),
                    ));
                }
                Ok(values.clone())
            }
        }
    }
}

/// Product state `(x)_i (a_i|0> + b_i|1>)` of the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentInit {
    pairs: Vec<(Complex64, Complex64)>,
}

impl EnvironmentInit {
    pub fn new(pairs: Vec<(Complex64, Complex64)>) -> Result<Self> {
        for (a, b) in &pairs {
            let n = a.norm_sqr() + b.norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized(n.sqrt()));
            }
        }
        Ok(EnvironmentInit { pairs })
    }

    /// Every qubit in `(|0> + |1>)/sqrt 2`.
    pub fn superposition(count: usize) -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        EnvironmentInit {
            pairs: vec![(h, h); count],
        }
    }

    /// Every qubit in `|0>`, a `sigma_z` eigenstate.
    pub fn z_up(count: usize) -> Self {
        EnvironmentInit {
            pairs: vec![(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)); count],
        }
    }

    /// Independent Haar-random qubit states.
    pub fn haar(count: usize, master_seed: u64) -> Result<Self> {
        let pairs = (0..count as u64)
            .map(|i| {
                let q = sample_state_on_stream(
                    TensorSpace::new(vec![2])?,
                    SeedSpec::new(master_seed, i),
                    substream::ENVIRONMENT,
                )?;
                Ok((q.amplitudes()[0], q.amplitudes()[1]))
            })
            .collect::<Result<_>>()?;
        Ok(EnvironmentInit { pairs })
    }

    pub fn pairs(&self) -> &[(Complex64, Complex64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Eigenphases of `H`, indexed by computational basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpectrum {
    energies: Vec<f64>,
}

impl PhaseSpectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

pub fn build_phase_spectrum(model: &CentralSpinModel) -> PhaseSpectrum {
    // env_sum[e] = sum_i g_i z_i(e), environment qubit 1 most significant
    let mut env_sum = vec![0.0f64];
    for &g in &model.couplings {
        env_sum = env_sum.iter().flat_map(|&s| [s + g, s - g]).collect();
    }
    let energies = env_sum
        .iter()
        .map(|&s| 0.5 * s)
        .chain(env_sum.iter().map(|&s| -0.5 * s))
        .collect();
    PhaseSpectrum { energies }
}

/// `alpha |+z>|E0> + beta |-z>|E0>`
pub fn initial_state(alpha: Complex64, beta: Complex64, env: &EnvironmentInit) -> Result<StateVector> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(invalid(
            "alpha/beta",
            format!("|alpha|^2 + |beta|^2 = {n}, expected 1"),
        ));
    }
    let mut factors = Vec::with_capacity(env.len() + 1);
    factors.push(StateVector::qubit(alpha, beta)?);
    for &(a, b) in &env.pairs {
        factors.push(StateVector::qubit(a, b)?);
    }
    tensor_compose(&factors)
}

/// Central amplitudes `(cos(theta/2), sin(theta/2))`.
pub fn polar_amplitudes(theta: f64) -> (Complex64, Complex64) {
    let (s, c) = (0.5 * theta).sin_cos();
    (Complex64::new(c, 0.0), Complex64::new(s, 0.0))
}

/// `e^{-iHt} psi` by multiplying each amplitude with its eigenphase.
pub fn evolve_phases(psi: &StateVector, spectrum: &PhaseSpectrum, t: f64) -> Result<StateVector> {
    if psi.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            found: psi.dim(),
        });
    }
    let amplitudes = psi
        .amplitudes()
        .iter()
        .zip(&spectrum.energies)
        .map(|(a, &e)| a * Complex64::from_polar(1.0, -e * t))
        .collect();
    StateVector::new(psi.space().clone(), amplitudes)
}

/// `r(t) = <E_+(t)|E_-(t)> = prod_i (|a_i|^2 e^{i g_i t} + |b_i|^2 e^{-i g_i t})`.
pub fn decoherence_factor(model: &CentralSpinModel, env: &EnvironmentInit, t: f64) -> Result<Complex64> {
    if env.len() != model.env_count() {
        return Err(Error::DimensionMismatch {
            expected: model.env_count(),
            found: env.len(),
        });
    }
    Ok(model
        .couplings
        .iter()
        .zip(&env.pairs)
        .map(|(&g, (a, b))| {
            a.norm_sqr() * Complex64::from_polar(1.0, g * t)
                + b.norm_sqr() * Complex64::from_polar(1.0, -g * t)
        })
        .product())
}

/// Closed form of the central spin's `rho_01(t) = alpha conj(beta) conj(r(t))`.
pub fn offdiag_oracle(
    alpha: Complex64,
    beta: Complex64,
    model: &CentralSpinModel,
    env: &EnvironmentInit,
    t: f64,
) -> Result<Complex64> {
    Ok(alpha * beta.conj() * decoherence_factor(model, env, t)?.conj())
}
