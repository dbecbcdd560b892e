//! Haar-random pure states, GUE Hamiltonians and dense unitary evolution.
//!
//! Every draw comes from a ChaCha stream whose key is derived from
//! `(master_seed, substream)` and whose stream id is the sample index, so a
//! sample's randomness never depends on which worker produced it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{CMatrix, HermitianEigen, StateVector, TensorSpace};

/// Largest matrix dimension for dense Hamiltonians.
pub const DENSE_CAP: usize = 1024;

/// Substream tags. Each purpose owns a disjoint block of 2^32 substreams.
pub mod substream {
    pub const STATE: u64 = 0;
    pub const HAMILTONIAN: u64 = 1 << 32;
    pub const COUPLINGS: u64 = 2 << 32;
    pub const ENVIRONMENT: u64 = 3 << 32;
}

const KEY_TAG: &[u8; 8] = b"einselct";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        SeedSpec {
            master_seed,
            sample_index,
        }
    }

    /// Random stream for this sample and purpose; a pure function of its inputs.
    pub fn rng(&self, substream: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&substream.to_le_bytes());
        key[16..24].copy_from_slice(KEY_TAG);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.sample_index);
        rng
    }
}

fn complex_normal<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Unitarily invariant random unit vector in `space`.
pub fn sample_state_in(space: TensorSpace, seed: SeedSpec) -> Result<StateVector> {
    sample_state_on_stream(space, seed, substream::STATE)
}

/// As [`sample_state_in`] but drawing from the substream block starting at `base`.
/// A zero draw is retried on `base + 1`, `base + 2`, ...
pub fn sample_state_on_stream(space: TensorSpace, seed: SeedSpec, base: u64) -> Result<StateVector> {
    let dim = space.total_dim();
    for attempt in 0.. {
        let mut rng = seed.rng(base + attempt);
        let amps: Vec<Complex64> = (0..dim).map(|_| complex_normal(&mut rng, 1.0)).collect();
        if amps.iter().any(|a| a.norm_sqr() > 0.0) {
            return StateVector::normalized(space, amps);
        }
    }
    unreachable!()
}

/// Haar-random pure state of dimension `dim`, as a single factor.
pub fn sample_pure_state(dim: usize, seed: SeedSpec) -> Result<StateVector> {
    if dim < 2 {
        return Err(invalid("dim", "must be >= 2"));
    }
    sample_state_in(TensorSpace::new(vec![dim])?, seed)
}

/// `(A + A^dagger) / 2` with `A` having iid standard complex normal entries
/// (`E|A_jk|^2 = 1`).
pub fn sample_gue_hamiltonian(dim: usize, seed: SeedSpec) -> Result<CMatrix> {
    if dim < 2 {
        return Err(invalid("dim", "must be >= 2"));
    }
    if dim > DENSE_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DENSE_CAP,
        });
    }
    let mut rng = seed.rng(substream::HAMILTONIAN);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let a = CMatrix::from_fn(dim, dim, |_, _| complex_normal(&mut rng, scale));
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..dim {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    Ok(h)
}

/// `e^{-iHt}` applied through a cached eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigen: HermitianEigen,
}

impl SpectralPropagator {
    pub fn new(hamiltonian: &CMatrix) -> Result<Self> {
        Ok(SpectralPropagator {
            eigen: HermitianEigen::new(hamiltonian)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(())
    }

    /// Coefficients of `psi` in the energy eigenbasis.
    pub fn to_eigenbasis(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        self.check(psi)?;
        let v = DVector::from_column_slice(psi.amplitudes());
        Ok(self.eigen.vectors.ad_mul(&v).iter().copied().collect())
    }

    /// Evolves eigenbasis coefficients by `t` and maps back to `space`.
    pub fn evolve_coefficients(
        &self,
        coefficients: &[Complex64],
        space: &TensorSpace,
        t: f64,
    ) -> Result<StateVector> {
        let phased = DVector::from_iterator(
            coefficients.len(),
            coefficients
                .iter()
                .zip(&self.eigen.values)
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        let out = &self.eigen.vectors * phased;
        StateVector::new(space.clone(), out.iter().copied().collect())
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let coefficients = self.to_eigenbasis(psi)?;
        self.evolve_coefficients(&coefficients, psi.space(), t)
    }
}

/// `e^{-iHt} psi`
pub fn evolve_dense(psi: &StateVector, hamiltonian: &CMatrix, t: f64) -> Result<StateVector> {
    if hamiltonian.nrows() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: hamiltonian.nrows(),
        });
    }
    SpectralPropagator::new(hamiltonian)?.evolve(psi, t)
}

/// `<psi|H|psi>`
pub fn expectation(psi: &StateVector, op: &CMatrix) -> Result<Complex64> {
    if op.nrows() != psi.dim() || op.ncols() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: op.nrows(),
        });
    }
    let v = DVector::from_column_slice(psi.amplitudes());
    Ok(v.dotc(&(op * &v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn states_are_normalized_and_deterministic() {
        for (dim, idx) in [(2, 0), (5, 3), (64, 17), (1000, 9)] {
            let seed = SeedSpec::new(42, idx);
            let a = sample_pure_state(dim, seed).unwrap();
            let b = sample_pure_state(dim, seed).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-12);
            assert_eq!(a.amplitudes(), b.amplitudes());
        }
        assert!(sample_pure_state(1, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn streams_differ_by_index_seed_and_substream() {
        let a = sample_pure_state(4, SeedSpec::new(1, 0)).unwrap();
        let b = sample_pure_state(4, SeedSpec::new(1, 1)).unwrap();
        let c = sample_pure_state(4, SeedSpec::new(2, 0)).unwrap();
        assert_ne!(a.amplitudes(), b.amplitudes());
        assert_ne!(a.amplitudes(), c.amplitudes());
        let mut x = SeedSpec::new(1, 0).rng(substream::STATE);
        let mut y = SeedSpec::new(1, 0).rng(substream::COUPLINGS);
        assert_ne!(x.random::<u64>(), y.random::<u64>());
    }

    #[test]
    fn gue_is_hermitian_and_deterministic() {
        let seed = SeedSpec::new(3, 5);
        let h = sample_gue_hamiltonian(16, seed).unwrap();
        assert!(crate::hilbert::hermitian_defect(&h) <= 1e-14);
        assert_eq!(h, sample_gue_hamiltonian(16, seed).unwrap());
        assert!(matches!(
            sample_gue_hamiltonian(DENSE_CAP + 1, seed),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn larmor_precession() {
        // H = diag(1/2, -1/2): <sigma_x>(t) = cos t for the +x state
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.5, 0.0),
            ],
        );
        let plus = StateVector::qubit(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        let out = evolve_dense(&plus, &h, PI).unwrap();
        let expected = [
            Complex64::from_polar(FRAC_1_SQRT_2, -PI / 2.0),
            Complex64::from_polar(FRAC_1_SQRT_2, PI / 2.0),
        ];
        for (a, e) in out.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-12);
        }
        for t in [0.0, 0.3, 1.0, 2.5, PI] {
            let psi = evolve_dense(&plus, &h, t).unwrap();
            let a = psi.amplitudes();
            let sx = 2.0 * (a[0].conj() * a[1]).re;
            assert!((sx - t.cos()).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn evolution_identity_and_reversal() {
        let h = sample_gue_hamiltonian(12, SeedSpec::new(9, 0)).unwrap();
        let psi = sample_pure_state(12, SeedSpec::new(9, 1)).unwrap();
        let same = evolve_dense(&psi, &h, 0.0).unwrap();
        assert!(same.max_abs_diff(&psi) < 1e-12);
        let prop = SpectralPropagator::new(&h).unwrap();
        let back = prop.evolve(&prop.evolve(&psi, 1.7).unwrap(), -1.7).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-10);
    }

    #[test]
    fn evolve_rejects_mismatch() {
        let h = sample_gue_hamiltonian(4, SeedSpec::new(0, 0)).unwrap();
        let psi = sample_pure_state(3, SeedSpec::new(0, 0)).unwrap();
        assert!(matches!(
            evolve_dense(&psi, &h, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
