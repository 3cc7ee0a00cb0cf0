mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qinside_core::dynamics::{
    environment_pair, premeasurement_hamiltonian, pure_final_state, so_coherence, trace_environment,
};
use qinside_core::linalg::{sigma_x, sigma_z};
use qinside_core::{
    build_premeasurement, decohere_triple, evolve_exact, evolve_liouville, mixed_final_state, partial_trace,
    Complex64, DensityState, Factorization, MeasurementModel, Operator, PureState,
};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn model() -> MeasurementModel {
    MeasurementModel::new(&[0.0, 1.0, -1.0]).unwrap()
}

/// `exp(−iHt)` by scaling and squaring a truncated Taylor series.
fn expm_oracle(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let d = h.nrows();
    let a = h * c(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let s = norm.log2().ceil().max(0.0) as i32 + 4;
    let a = a / c(2f64.powi(s), 0.0);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn plus_x() -> DensityState {
    PureState::from_slice(&[c(H, 0.0), c(H, 0.0)]).unwrap().density()
}

#[test]
fn s_z_rotates_plus_x_to_minus_x() {
    let h = sigma_z();
    let t = std::f64::consts::FRAC_PI_2;
    let exact = evolve_exact(&plus_x(), &h, t).unwrap();
    let rk = evolve_liouville(&plus_x(), &h, t, 1e-3).unwrap();
    assert!((exact.expectation(&sigma_x()).unwrap().re + 1.0).abs() <= 1e-12);
    assert!((rk.expectation(&sigma_x()).unwrap().re + 1.0).abs() <= 1e-8);
    assert!(max_abs(&(rk.matrix() - exact.matrix())) <= 1e-8);
    let u = expm_oracle(h.matrix(), t);
    let oracle = &u * plus_x().matrix() * u.adjoint();
    assert!(max_abs(&(exact.matrix() - oracle)) <= 1e-12);
}

#[test]
fn zero_hamiltonian_leaves_state_alone() {
    let h = Operator::zeros(&Factorization::single(2));
    let r = evolve_liouville(&plus_x(), &h, 3.0, 0.1).unwrap();
    assert!(max_abs(&(r.matrix() - plus_x().matrix())) == 0.0);
}

#[test]
fn integrator_is_fourth_order() {
    let m = model();
    let h = premeasurement_hamiltonian(&m, 0.0, 1.0).unwrap();
    let rho = m.initial_state(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap().density();
    let exact = evolve_exact(&rho, &h, 1.0).unwrap();
    let mut errs = Vec::new();
    for dt in [0.1, 0.05, 0.025] {
        let r = evolve_liouville(&rho, &h, 1.0, dt).unwrap();
        errs.push(max_abs(&(r.matrix() - exact.matrix())));
    }
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 8.0, "error ratio {} from {:?}", w[0] / w[1], errs);
    }
}

#[test]
fn hamiltonian_reproduces_the_premeasurement_map() {
    let m = model();
    let h = premeasurement_hamiltonian(&m, 0.0, 2.0).unwrap();
    let u = expm_oracle(h.matrix(), 2.0);
    assert!(max_abs(&(u - m.premeasurement().matrix())) <= 1e-10);
}

#[test]
fn premeasurement_permutation() {
    let u = build_premeasurement(2, 3).unwrap();
    let ud = u.matrix().adjoint() * u.matrix();
    assert!(max_abs(&(ud - DMatrix::identity(6, 6))) == 0.0);
    // |s₁O₁⟩ (index 1) goes to |s₁O₀⟩ (index 0).
    assert_eq!(u.matrix()[(0, 1)], c(1.0, 0.0));
    assert!(build_premeasurement(2, 2).is_err());
}

#[test]
fn decoherence_triple_interpolates_between_pure_and_mixed() {
    let m = model();
    let a = [c(H, 0.0), c(H, 0.0)];
    for (kappa, expected) in [(0.0, 0.0), (0.3, 0.15), (1.0, 0.5)] {
        let env = environment_pair(2, kappa, 0.0).unwrap();
        let reduced = trace_environment(&decohere_triple(&m, &a, &env).unwrap()).unwrap();
        let coh = so_coherence(&reduced, &m, 1, 2).unwrap().norm();
        assert!((coh - expected).abs() <= 1e-12, "κ = {kappa}: {coh}");
    }
    let ortho = trace_environment(&decohere_triple(&m, &a, &environment_pair(2, 0.0, 0.0).unwrap()).unwrap()).unwrap();
    assert!(max_abs(&(ortho.matrix() - mixed_final_state(&a, &m).unwrap().matrix())) <= 1e-12);
    let same = trace_environment(&decohere_triple(&m, &a, &environment_pair(2, 1.0, 0.0).unwrap()).unwrap()).unwrap();
    assert!(max_abs(&(same.matrix() - pure_final_state(&a, &m).unwrap().matrix())) <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_evolution_preserves_spectrum(rho in density(Factorization::new(vec![2, 3]).unwrap()), e in entries(36), t in 0.0f64..5.0) {
        let h = Operator::from_matrix(herm_from(&e, 6)).unwrap();
        let out = evolve_exact(&rho, &h, t).unwrap();
        for (a, b) in jacobi_eigenvalues(rho.matrix()).iter().zip(jacobi_eigenvalues(out.matrix())) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let u = expm_oracle(h.matrix(), t);
        prop_assert!(max_abs(&(out.matrix() - &u * rho.matrix() * u.adjoint())) <= 1e-10);
    }

    #[test]
    fn rk4_keeps_trace_and_hermiticity(rho in density(Factorization::single(4)), e in entries(16), t in 0.0f64..3.0) {
        let h = Operator::from_matrix(herm_from(&e, 4)).unwrap();
        let out = evolve_liouville(&rho, &h, t, 0.01).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-9 * t.max(1.0));
        prop_assert!(out.operator().hermitian_deviation() <= 1e-9 * t.max(1.0));
    }

    #[test]
    fn premeasurement_is_unbiased(a in amplitude_pair()) {
        let m = model();
        let rho_in = m.initial_state(&a).unwrap().density();
        let sz = rho_in.expectation(&m.lifted_s_observable()).unwrap().re;
        let q = pure_final_state(&a, &m).unwrap().expectation(&m.lifted_pointer()).unwrap().re;
        prop_assert!((q - sz).abs() <= 1e-12);
        prop_assert!((sz - (a[0].norm_sqr() - a[1].norm_sqr())).abs() <= 1e-12);
    }

    #[test]
    fn local_reductions_agree(a in amplitude_pair()) {
        let m = model();
        let p = pure_final_state(&a, &m).unwrap();
        let mx = mixed_final_state(&a, &m).unwrap();
        for keep in 0..2 {
            let x = partial_trace(&p, &[keep]).unwrap();
            let y = partial_trace(&mx, &[keep]).unwrap();
            prop_assert!(max_abs(&(x.matrix() - y.matrix())) <= 1e-12);
        }
    }

    #[test]
    fn triple_coherence_is_product_of_magnitudes(a in amplitude_pair(), kappa in 0.0f64..=1.0, phase in -3.0f64..3.0) {
        let m = model();
        let env = environment_pair(3, kappa, phase).unwrap();
        let overlap = env[1].inner(&env[0]).unwrap();
        prop_assert!((overlap.norm() - kappa).abs() <= 1e-12);
        let reduced = trace_environment(&decohere_triple(&m, &a, &env).unwrap()).unwrap();
        let coh = so_coherence(&reduced, &m, 1, 2).unwrap().norm();
        prop_assert!((coh - (a[0] * a[1]).norm() * kappa).abs() <= 1e-12);
    }
}
