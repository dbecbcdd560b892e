//! Finite-dimensional tensor-product Hilbert spaces.
//!
//! Composite indices are big-endian: the first factor is the most
//! significant digit, so for qubits `|s_0 s_1 ... s_k>` sits at index
//! `s_0 * 2^k + ... + s_k`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest composite dimension accepted unless a space is built with an explicit cap.
pub const DEFAULT_DIM_CAP: usize = 1 << 21;

/// Tolerance on `| ||psi|| - 1 |` for state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise Hermiticity and unit-trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-12;
/// Largest Hermiticity defect accepted before symmetrizing for an eigensolve.
pub const SPECTRUM_HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorSpace {
    factor_dims: Vec<usize>,
    total_dim: usize,
}

impl TensorSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(factor_dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(factor_dims: Vec<usize>, cap: usize) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut total: usize = 1;
        for &d in &factor_dims {
            if d < 2 {
                return Err(Error::InvalidFactorDim(d));
            }
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or(Error::DimensionCap {
                    dim: total.saturating_mul(d),
                    cap,
                })?;
        }
        Ok(TensorSpace {
            factor_dims,
            total_dim: total,
        })
    }

    /// `count` qubit factors.
    pub fn qubits(count: usize) -> Result<Self> {
        Self::new(vec![2; count])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn factor_count(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Index weight of each factor under the big-endian convention.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factor_dims.len()];
        for i in (0..self.factor_dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factor_dims[i + 1];
        }
        strides
    }

    /// Splits a composite index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factor_dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    fn check_selection(&self, keep: &[usize]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.factor_count()) {
            return Err(Error::InvalidFactorIndex {
                index: bad,
                factors: self.factor_count(),
            });
        }
        Ok(sorted)
    }

    /// Maps every composite index to `(kept index, traced index)` for a sorted selection.
    fn split_map(&self, keep: &[usize]) -> (usize, usize, Vec<(usize, usize)>) {
        let mut is_kept = vec![false; self.factor_count()];
        for &k in keep {
            is_kept[k] = true;
        }
        let keep_dim: usize = keep.iter().map(|&k| self.factor_dims[k]).product();
        let env_dim = self.total_dim / keep_dim;
        let mut map = Vec::with_capacity(self.total_dim);
        for idx in 0..self.total_dim {
            let (mut a, mut e) = (0, 0);
            for (f, digit) in self.digits(idx).into_iter().enumerate() {
                if is_kept[f] {
                    a = a * self.factor_dims[f] + digit;
                } else {
                    e = e * self.factor_dims[f] + digit;
                }
            }
            map.push((a, e));
        }
        (keep_dim, env_dim, map)
    }

    /// The space formed by the selected factors, in ascending factor order.
    pub fn subspace(&self, keep: &[usize]) -> Result<TensorSpace> {
        let keep = self.check_selection(keep)?;
        TensorSpace::new(keep.iter().map(|&k| self.factor_dims[k]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: TensorSpace,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes, rejecting wrong lengths and norms off by more than [`NORM_TOL`].
    pub fn new(space: TensorSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: amplitudes.len(),
            });
        }
        let norm = norm(&amplitudes);
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { space, amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(space: TensorSpace, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        amplitudes.iter_mut().for_each(|a| *a /= n);
        Self::new(space, amplitudes)
    }

    pub fn basis(space: TensorSpace, index: usize) -> Result<Self> {
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector { space, amplitudes })
    }

    /// A single qubit `a|0> + b|1>`.
    pub fn qubit(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(TensorSpace::new(vec![2])?, vec![a, b])
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Reduced density matrix on the factors in `keep`, without forming `|psi><psi|`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = self.space.check_selection(keep)?;
        let (keep_dim, env_dim, map) = self.space.split_map(&keep);
        // rows: kept index, columns: environment index
        let mut block = vec![ZERO; keep_dim * env_dim];
        for (amp, &(a, e)) in self.amplitudes.iter().zip(&map) {
            block[a * env_dim + e] = *amp;
        }
        Ok(DensityMatrix::from_gram(&block, keep_dim, env_dim))
    }

    /// Reduced state of the leading factor; the fast path used by the central-spin experiments.
    pub fn reduced_leading(&self) -> DensityMatrix {
        let keep_dim = self.space.factor_dims()[0];
        let env_dim = self.dim() / keep_dim;
        DensityMatrix::from_gram(&self.amplitudes, keep_dim, env_dim)
    }
}

fn norm(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of normalized states, first factor most significant.
pub fn tensor_compose(factors: &[StateVector]) -> Result<StateVector> {
    tensor_compose_with_cap(factors, DEFAULT_DIM_CAP)
}

pub fn tensor_compose_with_cap(factors: &[StateVector], cap: usize) -> Result<StateVector> {
    if factors.is_empty() {
        return Err(Error::EmptySpace);
    }
    let dims: Vec<usize> = factors
        .iter()
        .flat_map(|f| f.space.factor_dims().iter().copied())
        .collect();
    let space = TensorSpace::with_cap(dims, cap)?;
    let mut amplitudes = vec![ONE];
    for f in factors {
        amplitudes = amplitudes
            .iter()
            .flat_map(|a| f.amplitudes.iter().map(move |b| a * b))
            .collect();
    }
    StateVector::new(space, amplitudes)
}

/// `|psi><psi|`
pub fn outer_product(psi: &StateVector) -> DensityMatrix {
    let n = psi.dim();
    let entries = CMatrix::from_fn(n, n, |j, k| psi.amplitudes[j] * psi.amplitudes[k].conj());
    DensityMatrix { entries }
}

/// Hermitian, unit-trace, positive semi-definite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let herm = hermitian_defect(&entries);
        if herm > DENSITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let spectrum = hermitian_spectrum(&entries)?;
        let min = spectrum.last().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix { entries })
    }

    /// Real diagonal density matrix from probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let n = probabilities.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in probabilities.iter().enumerate() {
            m[(i, i)] = Complex64::new(p, 0.0);
        }
        Self::new(m)
    }

    /// `B B^dagger` for a row-major `rows x cols` block. Only the upper triangle is
    /// accumulated and then mirrored, so the result is exactly Hermitian.
    fn from_gram(block: &[Complex64], rows: usize, cols: usize) -> Self {
        let mut m = CMatrix::zeros(rows, rows);
        for a in 0..rows {
            let ra = &block[a * cols..(a + 1) * cols];
            for b in a..rows {
                let rb = &block[b * cols..(b + 1) * cols];
                let s: Complex64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
                if a == b {
                    m[(a, a)] = Complex64::new(s.re, 0.0);
                } else {
                    m[(a, b)] = s;
                    m[(b, a)] = s.conj();
                }
            }
        }
        DensityMatrix { entries: m }
    }

    /// Re-checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.entries.clone()).map(|_| ())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Eigenvalues in descending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_spectrum(&self.entries).expect("density matrices are Hermitian")
    }

    /// `U rho U^dagger`
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        let m = unitary * &self.entries * unitary.adjoint();
        Ok(DensityMatrix {
            entries: symmetrize(&m),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `(1/dim) I`
pub fn maximally_mixed(dim: usize) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(crate::error::invalid("dim", "must be >= 1"));
    }
    let p = 1.0 / dim as f64;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(p, 0.0);
    }
    Ok(DensityMatrix { entries: m })
}

/// Traces out every factor of `space` not listed in `keep`.
pub fn partial_trace(
    rho: &DensityMatrix,
    space: &TensorSpace,
    keep: &[usize],
) -> Result<DensityMatrix> {
    if rho.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: rho.dim(),
        });
    }
    let keep = space.check_selection(keep)?;
    let (keep_dim, env_dim, map) = space.split_map(&keep);
    // inverse map: (kept, env) -> composite
    let mut composite = vec![0usize; space.total_dim()];
    for (idx, &(a, e)) in map.iter().enumerate() {
        composite[a * env_dim + e] = idx;
    }
    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    for a in 0..keep_dim {
        for b in 0..keep_dim {
            let mut s = ZERO;
            for e in 0..env_dim {
                s += rho.entries[(composite[a * env_dim + e], composite[b * env_dim + e])];
            }
            out[(a, b)] = s;
        }
    }
    Ok(DensityMatrix {
        entries: symmetrize(&out),
    })
}

/// Largest entrywise modulus of `M - M^dagger`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix, sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        let sym = checked_symmetrize(m)?;
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(m.nrows(), m.nrows(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok(HermitianEigen { values, vectors })
    }
}

fn checked_symmetrize(m: &CMatrix) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = hermitian_defect(m);
    if !(defect <= SPECTRUM_HERMITIAN_TOL) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(symmetrize(m))
}

/// Real spectrum of a Hermitian matrix in descending order.
pub fn hermitian_spectrum(m: &CMatrix) -> Result<Vec<f64>> {
    let sym = checked_symmetrize(m)?;
    if sym.nrows() == 2 {
        return Ok(spectrum_2x2(&sym));
    }
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

// closed form for the qubit case, which dominates the experiment loops
fn spectrum_2x2(m: &CMatrix) -> Vec<f64> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    vec![mean + half_gap, mean - half_gap]
}
