#![allow(dead_code)]

use einselect_lab::hilbert::{CMatrix, DensityMatrix, StateVector, TensorSpace};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random normalized amplitudes from uniform box draws (not Haar, which is fine for oracles).
pub fn random_state(space: TensorSpace, rng: &mut impl Rng) -> StateVector {
    let amps = (0..space.total_dim())
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(space, amps).unwrap()
}

/// Random unitary from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let mut q = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut v = a.column(j).into_owned();
        for k in 0..j {
            let qk = q.column(k).into_owned();
            let proj = qk.dotc(&v);
            v -= qk * proj;
        }
        let n = v.norm();
        q.set_column(j, &(v / c(n, 0.0)));
    }
    q
}

/// Convex mixture of random pure states.
pub fn random_density(dim: usize, terms: usize, rng: &mut impl Rng) -> DensityMatrix {
    let space = TensorSpace::new(vec![dim]).unwrap();
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(dim, dim);
    for w in weights {
        let psi = random_state(space.clone(), rng);
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        m += (&v * v.adjoint()) * c(w / total, 0.0);
    }
    DensityMatrix::new((&m + m.adjoint()) * c(0.5, 0.0)).unwrap()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Composite-to-digit decomposition, big-endian.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Reduced density matrix by summing over all index pairs that agree on the traced factors.
pub fn brute_partial_trace(amps: &[Complex64], dims: &[usize], keep: &[usize]) -> CMatrix {
    let kd: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let kdim: usize = kd.iter().product();
    let flat = |d: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);
    let total = amps.len();
    let mut out = CMatrix::zeros(kdim, kdim);
    for i in 0..total {
        let di = digits(i, dims);
        for j in 0..total {
            let dj = digits(j, dims);
            let traced_agree = (0..dims.len()).filter(|k| !keep.contains(k)).all(|k| di[k] == dj[k]);
            if traced_agree {
                out[(flat(&di), flat(&dj))] += amps[i] * amps[j].conj();
            }
        }
    }
    out
}

pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
