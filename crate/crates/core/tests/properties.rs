mod common;

use common::*;
use einselect_lab::central_spin::{
    build_phase_spectrum, evolve_phases, initial_state, polar_amplitudes, CentralSpinModel, EnvironmentInit,
};
use einselect_lab::diagnostics::{
    bloch_vector, distinguishability_from_mixed, purity, trace_distance, von_neumann_entropy,
};
use einselect_lab::haar::{evolve_dense, expectation, sample_gue_hamiltonian, SeedSpec};
use einselect_lab::hilbert::{
    hermitian_spectrum, maximally_mixed, outer_product, partial_trace, tensor_compose, StateVector, TensorSpace,
};
use proptest::prelude::*;

fn factor_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 1..=4).prop_filter("small", |d| d.iter().product::<usize>() <= 64)
}

fn state_in(dims: Vec<usize>) -> impl Strategy<Value = StateVector> {
    let n: usize = dims.iter().product();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6)
        .prop_map(move |v| {
            let space = TensorSpace::new(dims.clone()).unwrap();
            StateVector::normalized(space, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
}

fn any_state() -> impl Strategy<Value = StateVector> {
    factor_dims().prop_flat_map(state_in)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduced_single_factor_is_valid_density(psi in any_state(), pick in 0usize..4) {
        let keep = pick % psi.space().factor_count();
        let rho = psi.reduced_density(&[keep]).unwrap();
        prop_assert!(rho.validate().is_ok());
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.spectrum().iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), dim in 2usize..6) {
        let mut g = rng(seed);
        let (a, b, t) = (random_density(dim, 2, &mut g), random_density(dim, 3, &mut g), random_density(dim, 1, &mut g));
        let direct = trace_distance(&a, &t).unwrap();
        let via = trace_distance(&a, &b).unwrap() + trace_distance(&b, &t).unwrap();
        prop_assert!(direct <= via + 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partial_trace_composes(psi in state_in(vec![2, 2, 3, 2])) {
        let space = psi.space().clone();
        let rho = outer_product(&psi);
        let at_once = partial_trace(&rho, &space, &[0, 1]).unwrap();
        let step = partial_trace(&rho, &space, &[0, 1, 2]).unwrap();
        let then = partial_trace(&step, &space.subspace(&[0, 1, 2]).unwrap(), &[0, 1]).unwrap();
        prop_assert!(at_once.max_abs_diff(&then) < 1e-12);
        prop_assert!(psi.reduced_density(&[0, 1]).unwrap().max_abs_diff(&at_once) < 1e-12);
    }

    #[test]
    fn product_state_factors_are_recovered(a in state_in(vec![2]), b in state_in(vec![3]), d in state_in(vec![2])) {
        let joint = tensor_compose(&[a.clone(), b.clone(), d.clone()]).unwrap();
        for (k, factor) in [a, b, d].iter().enumerate() {
            let reduced = joint.reduced_density(&[k]).unwrap();
            prop_assert!(reduced.max_abs_diff(&outer_product(factor)) < 1e-12);
        }
    }

    #[test]
    fn spectrum_of_difference_from_mixed_sums_to_zero(psi in any_state()) {
        let rho = outer_product(&psi);
        let omega = maximally_mixed(rho.dim()).unwrap();
        let spectrum = hermitian_spectrum(&(rho.entries() - omega.entries())).unwrap();
        prop_assert!(spectrum.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn diagnostics_are_unitarily_invariant(seed in any::<u64>(), dim in 2usize..7) {
        let mut g = rng(seed);
        let rho = random_density(dim, 3, &mut g);
        let sigma = random_density(dim, 2, &mut g);
        let u = random_unitary(dim, &mut g);
        let (ru, su) = (rho.conjugate_by(&u).unwrap(), sigma.conjugate_by(&u).unwrap());
        prop_assert!((trace_distance(&ru, &su).unwrap() - trace_distance(&rho, &sigma).unwrap()).abs() < 1e-10);
        prop_assert!((purity(&ru) - purity(&rho)).abs() < 1e-10);
        prop_assert!((von_neumann_entropy(&ru).unwrap() - von_neumann_entropy(&rho).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn qubit_diagnostics_follow_bloch_radius(seed in any::<u64>()) {
        let mut g = rng(seed);
        let rho = random_density(2, 2, &mut g);
        let r = bloch_vector(&rho).unwrap().radius();
        prop_assert!((purity(&rho) - 0.5 * (1.0 + r * r)).abs() < 1e-12);
        prop_assert!((distinguishability_from_mixed(&rho).unwrap() - 0.5 * r).abs() < 1e-12);
    }

    #[test]
    fn dense_evolution_conserves_norm_and_energy(seed in 0u64..1000, dim in 2usize..12, t in -20.0f64..20.0) {
        let h = sample_gue_hamiltonian(dim, SeedSpec::new(seed, 0)).unwrap();
        let mut g = rng(seed);
        let psi = random_state(TensorSpace::new(vec![dim]).unwrap(), &mut g);
        let out = evolve_dense(&psi, &h, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
        let (e0, e1) = (expectation(&psi, &h).unwrap(), expectation(&out, &h).unwrap());
        prop_assert!((e0 - e1).norm() < 1e-10);
        let back = evolve_dense(&out, &h, -t).unwrap();
        prop_assert!(back.max_abs_diff(&psi) < 1e-10);
    }

    #[test]
    fn central_spin_populations_are_conserved(
        couplings in prop::collection::vec(0.1f64..2.0, 1..7),
        theta in 0.0f64..std::f64::consts::PI,
        t in -30.0f64..30.0,
    ) {
        let n = couplings.len();
        let model = CentralSpinModel::new(couplings).unwrap();
        let spectrum = build_phase_spectrum(&model);
        let (alpha, beta) = polar_amplitudes(theta);
        let psi0 = initial_state(alpha, beta, &EnvironmentInit::superposition(n)).unwrap();
        let rho = evolve_phases(&psi0, &spectrum, t).unwrap().reduced_leading();
        prop_assert!((rho.get(0, 0).re - alpha.norm_sqr()).abs() < 1e-12);
        prop_assert!((rho.get(1, 1).re - beta.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn central_spin_spectrum_is_odd_under_central_flip(couplings in prop::collection::vec(-2.0f64..2.0, 1..8)) {
        let spectrum = build_phase_spectrum(&CentralSpinModel::new(couplings).unwrap());
        let half = spectrum.dim() / 2;
        let e = spectrum.energies();
        for i in 0..half {
            prop_assert_eq!(e[i], -e[i + half]);
        }
    }
}
