use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use oqw::channels::{classical_markov, dephase_step, liouvillian, propagator, DensityMatrix};
use oqw::dynamics::{relax_classical, relax_quantum, spectral_expansion, ProbabilityVector};
use oqw::linalg::{hermiticity_residual, unitarity_residual};
use oqw::models::{coined_markov_direct, coined_step_unitary, ring_hamiltonian, CoinedWalkModel, RingModel};
use oqw::spectral::{detailed_balance_residual, full_spectrum, OverlapValue};
use oqw::transitions::{locate_crossing, WalkFamily};

fn ring_model() -> impl Strategy<Value = RingModel> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..2.0 * PI).prop_map(|(a, b, c, p)| RingModel::new(a, b, c, p).unwrap())
}

fn coined_model() -> impl Strategy<Value = CoinedWalkModel> {
    (2usize..=6, 0.0..PI).prop_map(|(l, b)| CoinedWalkModel::new(l, b).unwrap())
}

fn distribution(n: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(1e-3..1.0f64, n).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
        p[0] += 1.0 - p.iter().sum::<f64>();
        ProbabilityVector::from_slice(&p).unwrap()
    })
}

fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |xs| {
        let a = DMatrix::from_iterator(n, n, xs.into_iter().map(|(re, im)| Complex64::new(re, im)));
        let m = &a * a.adjoint() + DMatrix::identity(n, n) * Complex64::new(1e-3, 0.0);
        let tr = m.trace();
        DensityMatrix::new(m.map(|z| z / tr)).unwrap()
    })
}

fn cmax(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_hamiltonian_is_hermitian(model in ring_model()) {
        let h = ring_hamiltonian(&model);
        prop_assert!(hermiticity_residual(h.matrix()) <= 1e-12);
    }

    #[test]
    fn ring_hamiltonian_is_real_only_without_flux(j in 0.1..2.0f64, phi in 0.0..2.0 * PI) {
        let h = ring_hamiltonian(&RingModel::new(1.0, 1.0, j, phi).unwrap());
        let imag = h.matrix().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let on_axis = phi.sin().abs() <= 1e-12;
        prop_assert_eq!(imag <= 1e-12, on_axis);
    }

    #[test]
    fn ring_propagator_is_unitary(model in ring_model(), tau in 0.0..5.0f64) {
        let u = propagator(&ring_hamiltonian(&model), tau).unwrap();
        prop_assert!(unitarity_residual(u.matrix()) <= 1e-10);
    }

    #[test]
    fn coined_unitary_reproduces_direct_markov(model in coined_model()) {
        let u = coined_step_unitary(&model).unwrap();
        prop_assert!(unitarity_residual(u.matrix()) <= 1e-10);
        let from_u = classical_markov(&u);
        let direct = coined_markov_direct(&model);
        prop_assert!((from_u.matrix() - direct.matrix()).amax() <= 1e-12);
    }

    #[test]
    fn markov_matrices_are_doubly_stochastic(model in ring_model(), tau in 0.0..5.0f64) {
        let q = classical_markov(&propagator(&ring_hamiltonian(&model), tau).unwrap());
        prop_assert!(q.residual() <= 1e-12);
        prop_assert!(q.matrix().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn dephase_step_matches_liouvillian(model in ring_model(), tau in 0.0..3.0f64, q in 0.0..=1.0f64, rho in density(3)) {
        let u = propagator(&ring_hamiltonian(&model), tau).unwrap();
        let direct = dephase_step(&rho, &u, q).unwrap();
        let via_l = liouvillian(&u, q).unwrap().apply(&rho).unwrap();
        prop_assert!(cmax(&(direct.matrix() - via_l.matrix())) <= 1e-12);
    }

    #[test]
    fn dephasing_preserves_positivity_and_trace(beta in 0.0..PI, q in 0.0..=1.0f64, seed in density(4)) {
        let u = coined_step_unitary(&CoinedWalkModel::new(2, beta).unwrap()).unwrap();
        let mut rho = seed;
        for _ in 0..20 {
            rho = dephase_step(&rho, &u, q).unwrap();
            prop_assert!(rho.min_eigenvalue() >= -1e-10);
            prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn overlap_is_invariant_under_scaling(
        a in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
        b in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
        ca in (0.1..10.0f64, 0.0..2.0 * PI),
        cb in (0.1..10.0f64, 0.0..2.0 * PI),
    ) {
        let to_vec = |xs: &[(f64, f64)]| DVector::from_iterator(3, xs.iter().map(|&(r, i)| Complex64::new(r, i)));
        let (a, b) = (to_vec(&a), to_vec(&b));
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let g = OverlapValue::between(&a, &b).unwrap().value();
        let sa = Complex64::from_polar(ca.0, ca.1);
        let sb = Complex64::from_polar(cb.0, cb.1);
        let scaled = OverlapValue::between(&(a * sa), &(b * sb)).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!((g - scaled).abs() <= 1e-12);
    }

    #[test]
    fn spectra_lie_in_the_unit_disk(model in ring_model(), tau in 0.0..3.0f64, q in 0.0..=1.0f64) {
        let u = propagator(&ring_hamiltonian(&model), tau).unwrap();
        let d = full_spectrum(&liouvillian(&u, q).unwrap()).unwrap();
        let rho = d.eigenvalues().iter().map(|m| m.norm()).fold(0.0, f64::max);
        prop_assert!(rho <= 1.0 + 1e-10);
        prop_assert!(d.exponents().iter().all(|l| l.re >= -1e-10));
    }

    #[test]
    fn detailed_balance_gives_real_spectrum(j in prop::array::uniform3(0.0..2.0f64), tau in 0.0..3.0f64, pi_phase in any::<bool>()) {
        let phi = if pi_phase { PI } else { 0.0 };
        let q = classical_markov(&propagator(&ring_hamiltonian(&RingModel::new(j[0], j[1], j[2], phi).unwrap()), tau).unwrap());
        prop_assert!(detailed_balance_residual(&q) <= 1e-12);
        let d = full_spectrum(&q).unwrap();
        prop_assert!(d.eigenvalues().iter().all(|m| m.im.abs() <= 1e-8));
    }

    #[test]
    fn spectral_expansion_reconstructs_iteration(beta in 0.05..1.2f64, phi in 0.0..2.0 * PI, p0 in distribution(3)) {
        let q = classical_markov(&WalkFamily::ring(1.0, 1.0, 0.5, phi).unwrap().unitary(beta).unwrap());
        let d = full_spectrum(&q).unwrap();
        prop_assume!(d.is_biorthonormal() && d.condition() < 1e4);
        let amps = spectral_expansion(&d, &p0).unwrap();
        let t = relax_classical(&q, &p0, 15).unwrap();
        for (k, p) in t.states().iter().enumerate() {
            prop_assert!((amps.reconstruct(k as i32) - p.vector()).amax() <= 1e-8);
        }
    }

    #[test]
    fn classical_relaxation_conserves_probability(model in coined_model(), steps in 1usize..60) {
        let q = coined_markov_direct(&model);
        let t = relax_classical(&q, &ProbabilityVector::basis(q.dim(), 0).unwrap(), steps).unwrap();
        for p in t.states() {
            prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.as_slice().iter().all(|&x| x >= -1e-15));
        }
    }

    #[test]
    fn quantum_relaxation_conserves_trace(frac in 0.05..0.95f64, q in 0.0..=1.0f64, rho0 in density(6)) {
        let u = coined_step_unitary(&CoinedWalkModel::new(3, frac * FRAC_PI_2).unwrap()).unwrap();
        let t = relax_quantum(&liouvillian(&u, q).unwrap(), &rho0, 40).unwrap();
        for rho in t.states() {
            prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn located_crossing_is_stable_under_bracket_changes(lo in 0.55..0.68f64, hi in 0.8..0.95f64) {
        let ring = WalkFamily::ring(1.0, 1.0, 0.5, PI / 3.0).unwrap();
        let reference = locate_crossing(&ring, (0.6, 0.9), 1.0).unwrap().beta_c.unwrap();
        let shifted = locate_crossing(&ring, (lo, hi), 1.0).unwrap().beta_c.unwrap();
        prop_assert!((reference - shifted).abs() <= 1e-6);
    }
}
