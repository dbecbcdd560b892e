//! Sample statistics and the analytic radial law of a random qubit's Bloch vector.
//!
//! For a Haar-random pure state on `C^2 (x) C^n`, the eigenvalues of the
//! qubit's reduced state have joint density `(l1 l2)^(n-2) (l1 - l2)^2`.
//! In terms of the Bloch radius `r = |l1 - l2|` this is a density
//! `(1 - r^2)^(n-2)` per unit volume of the Bloch ball, i.e. a radial law
//! proportional to `r^2 (1 - r^2)^(n-2)` on `[0, 1]`. Substituting `u = r^2`
//! shows `r^2 ~ Beta(3/2, n - 1)`.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{invalid, Result};

/// Mean and standard error (sample stddev / sqrt K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStats {
    pub mean: f64,
    pub standard_error: f64,
    pub max: f64,
    pub min: f64,
}

pub fn mean_stats(values: &[f64]) -> MeanStats {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    MeanStats {
        mean,
        standard_error: (var / k).sqrt(),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// `(m/2) sqrt(1/n)`
pub fn typicality_bound(m: usize, n_total: usize) -> f64 {
    (m as f64 / 2.0) * (1.0 / n_total as f64).sqrt()
}

fn check_env_dim(n_env: usize) -> Result<()> {
    if n_env < 2 {
        return Err(invalid("n-env", "must be >= 2"));
    }
    Ok(())
}

/// `P(R <= r)` under the radial law for environment dimension `n_env`.
pub fn radial_cdf(n_env: usize, r: f64) -> Result<f64> {
    check_env_dim(n_env)?;
    let u = (r * r).clamp(0.0, 1.0);
    Ok(beta_reg(1.5, (n_env - 1) as f64, u))
}

/// `E[R] = B(2, n-1) / B(3/2, n-1)`.
pub fn radial_mean(n_env: usize) -> Result<f64> {
    check_env_dim(n_env)?;
    let b = (n_env - 1) as f64;
    Ok((ln_beta(2.0, b) - ln_beta(1.5, b)).exp())
}

/// Normalized radial density `r^2 (1 - r^2)^(n-2) / (B(3/2, n-1) / 2)`.
pub fn radial_density(n_env: usize, r: f64) -> Result<f64> {
    check_env_dim(n_env)?;
    if !(0.0..=1.0).contains(&r) {
        return Ok(0.0);
    }
    let b = (n_env - 1) as f64;
    let norm = 0.5 * ln_beta(1.5, b).exp();
    Ok(r * r * (1.0 - r * r).powi(n_env as i32 - 2) / norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareTest {
    /// Bin edges after merging, `bins + 1` entries.
    pub edges: Vec<f64>,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Minimum expected count per bin; sparser adjacent bins are merged.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson chi-square of `samples` against a CDF on `[0, 1]` with `bins`
/// equal-width initial bins.
pub fn chi_square_uniform_bins<F>(samples: &[f64], bins: usize, cdf: F) -> Result<ChiSquareTest>
where
    F: Fn(f64) -> f64,
{
    if bins < 2 {
        return Err(invalid("bins", "need at least 2 bins"));
    }
    let total = samples.len() as f64;
    let mut counts = vec![0u64; bins];
    for &s in samples {
        let b = ((s * bins as f64).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    let fine_edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let fine_expected: Vec<f64> = fine_edges
        .windows(2)
        .map(|w| total * (cdf(w[1]) - cdf(w[0])))
        .collect();

    let mut edges = vec![0.0];
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let (mut acc_o, mut acc_e) = (0u64, 0.0f64);
    for i in 0..bins {
        acc_o += counts[i];
        acc_e += fine_expected[i];
        if acc_e >= MIN_EXPECTED {
            observed.push(acc_o);
            expected.push(acc_e);
            edges.push(fine_edges[i + 1]);
            acc_o = 0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0 {
        // fold the sparse tail into the last full bin
        match (observed.last_mut(), expected.last_mut()) {
            (Some(o), Some(e)) => {
                *o += acc_o;
                *e += acc_e;
                *edges.last_mut().unwrap() = 1.0;
            }
            _ => {
                observed.push(acc_o);
                expected.push(acc_e);
                edges.push(1.0);
            }
        }
    }
    if observed.len() < 2 {
        return Err(invalid("samples", "too few samples for two bins of expected count >= 5"));
    }
    let statistic = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum::<f64>();
    let dof = observed.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .expect("dof >= 1")
        .sf(statistic);
    Ok(ChiSquareTest {
        edges,
        observed,
        expected,
        statistic,
        dof,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_stats_basic() {
        let s = mean_stats(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        // sample variance 5/3
        assert!((s.standard_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert_eq!(mean_stats(&[2.0]).standard_error, 0.0);
    }

    #[test]
    fn bound_values() {
        assert_eq!(typicality_bound(2, 256), 0.0625);
        assert_eq!(typicality_bound(2, 4), 0.5);
    }

    #[test]
    fn two_dim_env_is_uniform_ball() {
        // r^2 law: CDF r^3, mean 3/4
        for r in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!((radial_cdf(2, r).unwrap() - r * r * r).abs() < 1e-12);
        }
        assert!((radial_mean(2).unwrap() - 0.75).abs() < 1e-12);
        assert!((radial_density(2, 0.5).unwrap() - 0.75).abs() < 1e-12);
        assert!(radial_mean(1).is_err());
    }

    #[test]
    fn chi_square_merges_sparse_bins() {
        let samples: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let t = chi_square_uniform_bins(&samples, 50, |x| x).unwrap();
        assert!(t.expected.iter().all(|&e| e >= MIN_EXPECTED));
        assert_eq!(t.observed.iter().sum::<u64>(), 100);
        assert!(t.p_value > 0.99);
        assert_eq!(*t.edges.last().unwrap(), 1.0);
    }
}
