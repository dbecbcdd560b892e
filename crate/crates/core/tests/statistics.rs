mod common;

use common::*;
use einselect_lab::experiments::{
    run_density_of_states, run_dynamical_constancy, run_kinematic_typicality, ConstancyConfig, DensityConfig,
    HamiltonianSource, TimeGrid, TypicalityConfig,
};
use einselect_lab::haar::{sample_gue_hamiltonian, sample_pure_state, SeedSpec};
use einselect_lab::hilbert::CMatrix;
use einselect_lab::stats::mean_stats;
use nalgebra::DVector;

fn within_three_se(a: &[f64], b: &[f64]) -> (bool, f64, f64) {
    let (sa, sb) = (mean_stats(a), mean_stats(b));
    let se = (sa.standard_error.powi(2) + sb.standard_error.powi(2)).sqrt();
    ((sa.mean - sb.mean).abs() <= 3.0 * se, sa.mean - sb.mean, se)
}

#[test]
fn haar_moments_at_dim_16() {
    let dim = 16;
    let k = 100_000;
    let mut first = Vec::with_capacity(k);
    let mut fourth = Vec::with_capacity(k);
    for i in 0..k {
        let psi = sample_pure_state(dim, SeedSpec::new(11, i as u64)).unwrap();
        let p = psi.amplitudes()[3].norm_sqr();
        first.push(p);
        fourth.push(p * p);
    }
    let s1 = mean_stats(&first);
    assert!((s1.mean - 1.0 / 16.0).abs() <= 3.0 * s1.standard_error, "{s1:?}");
    let s2 = mean_stats(&fourth);
    let expected = 2.0 / (dim * (dim + 1)) as f64;
    assert!((s2.mean - expected).abs() <= 3.0 * s2.standard_error, "{s2:?}");
}

#[test]
fn sampling_is_a_pure_function_of_seed_and_index() {
    let a = sample_pure_state(8, SeedSpec::new(5, 17)).unwrap();
    let b = sample_pure_state(8, SeedSpec::new(5, 17)).unwrap();
    let other_index = sample_pure_state(8, SeedSpec::new(5, 18)).unwrap();
    let other_seed = sample_pure_state(8, SeedSpec::new(6, 17)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, other_index);
    assert_ne!(a, other_seed);
}

#[test]
fn sampling_is_unitarily_invariant() {
    let dim = 8;
    let k = 10_000;
    let v = random_unitary(dim, &mut rng(21));
    // observables with operator norm 1
    let projector = |j: usize| move |x: &DVector<num_complex::Complex64>| x[j].norm_sqr();
    let coherence = |x: &DVector<num_complex::Complex64>| (x[0] * x[5].conj()).re * 2.0;
    let (mut p0, mut p0v, mut p6, mut p6v, mut co, mut cov) =
        (vec![], vec![], vec![], vec![], vec![], vec![]);
    for i in 0..k {
        let psi = DVector::from_column_slice(sample_pure_state(dim, SeedSpec::new(3, i)).unwrap().amplitudes());
        let moved = &v * &psi;
        p0.push(projector(0)(&psi));
        p0v.push(projector(0)(&moved));
        p6.push(projector(6)(&psi));
        p6v.push(projector(6)(&moved));
        co.push(coherence(&psi));
        cov.push(coherence(&moved));
    }
    for (name, a, b) in [("p0", &p0, &p0v), ("p6", &p6, &p6v), ("coherence", &co, &cov)] {
        let (ok, diff, se) = within_three_se(a, b);
        assert!(ok, "{name}: diff {diff} se {se}");
    }
}

#[test]
fn gue_trace_moments() {
    let dim = 64;
    let samples = 200;
    let mut traces = Vec::new();
    let mut second = Vec::new();
    for i in 0..samples {
        let h: CMatrix = sample_gue_hamiltonian(dim, SeedSpec::new(9, i)).unwrap();
        traces.push(h.trace().re / dim as f64);
        second.push((&h * &h).trace().re / (dim * dim) as f64);
    }
    let t = mean_stats(&traces);
    assert!(t.mean.abs() <= 3.0 * t.standard_error, "{t:?}");
    let s = mean_stats(&second);
    assert!((s.mean - 0.5).abs() <= 3.0 * s.standard_error, "{s:?}");
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

#[test]
fn ensemble_average_distance_scales_as_inverse_sqrt_k() {
    let distance = |samples: usize, seed: u64| {
        let cfg = ConstancyConfig {
            seed,
            samples,
            hamiltonian: HamiltonianSource::Gue,
            n_total: 64,
            m: 2,
            grid: TimeGrid::new(0.0, 40.0, 50),
            ..Default::default()
        };
        let s = run_dynamical_constancy(&cfg, 0).unwrap();
        s.series["ensemble_distance"].clone()
    };
    let (mut small, mut large) = (Vec::new(), Vec::new());
    for seed in 1..=4 {
        small.extend(distance(100, seed));
        large.extend(distance(400, seed + 100));
    }
    for d in &small {
        assert!(*d < 3.0 / 10.0);
    }
    for d in &large {
        assert!(*d < 3.0 / 20.0);
    }
    let ratio = rms(&small) / rms(&large);
    assert!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn summaries_do_not_depend_on_worker_count() {
    let typ = TypicalityConfig {
        samples: 300,
        ..Default::default()
    };
    assert_eq!(run_kinematic_typicality(&typ, 1).unwrap(), run_kinematic_typicality(&typ, 8).unwrap());
    let dens = DensityConfig {
        samples: 500,
        n_env: vec![2, 4],
        ..Default::default()
    };
    assert_eq!(run_density_of_states(&dens, 1).unwrap(), run_density_of_states(&dens, 5).unwrap());
    let cons = ConstancyConfig {
        samples: 20,
        env_qubits: 4,
        n_total: 32,
        grid: TimeGrid::new(0.0, 5.0, 6),
        ..Default::default()
    };
    assert_eq!(run_dynamical_constancy(&cons, 1).unwrap(), run_dynamical_constancy(&cons, 8).unwrap());
}
