//! Scalar diagnostics of density matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{hermitian_spectrum, maximally_mixed, DensityMatrix};

/// Eigenvalues below this are a broken invariant, not roundoff.
pub const ENTROPY_NEGATIVE_TOL: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// `1/2 sum |eigenvalues of (rho - sigma)|`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let diff = rho.entries() - sigma.entries();
    let spectrum = hermitian_spectrum(&diff)?;
    Ok(0.5 * spectrum.iter().map(|l| l.abs()).sum::<f64>())
}

/// `Tr(rho^2)`, computed as the squared Frobenius norm.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let p = rho.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
    #[cfg(debug_assertions)]
    if rho.dim() == 2 {
        let r = bloch_vector(rho).map(|b| b.radius()).unwrap_or(0.0);
        debug_assert!((p - 0.5 * (1.0 + r * r)).abs() < 1e-10);
    }
    p
}

/// `-sum l ln l` with `0 ln 0 = 0`. Eigenvalues in `[-1e-8, 0)` are clamped to zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spectrum = rho.spectrum();
    if let Some(&min) = spectrum.last() {
        if min < ENTROPY_NEGATIVE_TOL {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(spectrum
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum())
}

/// `(Tr rho sigma_x, Tr rho sigma_y, Tr rho sigma_z)` of a qubit.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let off = rho.get(0, 1);
    Ok(BlochVector {
        x: 2.0 * off.re,
        y: -2.0 * off.im,
        z: rho.get(0, 0).re - rho.get(1, 1).re,
    })
}

/// Trace distance to the maximally mixed state of the same dimension.
pub fn distinguishability_from_mixed(rho: &DensityMatrix) -> Result<f64> {
    let d = trace_distance(rho, &maximally_mixed(rho.dim())?)?;
    #[cfg(debug_assertions)]
    if rho.dim() == 2 {
        let r = bloch_vector(rho)?.radius();
        debug_assert!((d - 0.5 * r).abs() < 1e-10);
    }
    Ok(d)
}
