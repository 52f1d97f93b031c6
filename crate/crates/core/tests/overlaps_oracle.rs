mod common;

use common::{dense_overlaps, max_abs, random_hamiltonian, random_state, rng};
use qas_core::linalg::{hermitian_eigen, hermiticity_defect};
use qas_core::overlaps::assemble;
use qas_core::state::{build_hardware_efficient_state, CircuitSpec};
use qas_core::{Estimator, ModelSpec, MomentBasis, ProductState};
use rand::Rng;

#[test]
fn assembly_matches_dense_states() {
    let mut r = rng(11);
    for case in 0..40 {
        let n = r.random_range(1..=5);
        let terms = r.random_range(1..=4usize).min((1 << (2 * n)) - 1);
        let h = random_hamiltonian(n, terms, &mut r);
        let psi = random_state(n, &mut r);
        let k = r.random_range(0..=2);
        let basis = MomentBasis::from_hamiltonian(&h, k).unwrap();
        let m = assemble(&basis, &h, &psi, Estimator::Exact, true).unwrap();
        let (e, d, f) = dense_overlaps(&basis, &h, &psi);
        assert!(max_abs(&(&m.e - e)) <= 1e-9, "case {case}: E");
        assert!(max_abs(&(&m.d - d)) <= 1e-9, "case {case}: D");
        assert!(max_abs(&(m.f.unwrap() - f)) <= 1e-9, "case {case}: F");
    }
}

#[test]
fn gram_is_hermitian_psd_with_unit_diagonal() {
    let mut r = rng(12);
    for case in 0..100 {
        let n = r.random_range(1..=6);
        let terms = r.random_range(1..=5usize).min((1 << (2 * n)) - 1);
        let h = random_hamiltonian(n, terms, &mut r);
        let spec = CircuitSpec::random(n, r.random_range(0..6), r.random());
        let psi = build_hardware_efficient_state(&spec).unwrap();
        let basis = MomentBasis::from_hamiltonian(&h, r.random_range(0..=2)).unwrap();
        let m = assemble(&basis, &h, &psi, Estimator::Exact, false).unwrap();
        assert_eq!(hermiticity_defect(&m.e), 0.0, "case {case}");
        assert!(hermiticity_defect(&m.d) <= 1e-12, "case {case}");
        for i in 0..m.dim() {
            assert_eq!(m.e[(i, i)].re, 1.0);
            assert_eq!(m.e[(i, i)].im, 0.0);
        }
        let eig = hermitian_eigen(&m.e, 1e-12).unwrap();
        assert!(
            eig.values[0] >= -1e-10,
            "case {case}: lambda_min {}",
            eig.values[0]
        );
    }
}

#[test]
fn product_and_statevector_backends_agree() {
    let h = ModelSpec::random_strings(8, 4, 5).build().unwrap();
    let basis = MomentBasis::from_hamiltonian(&h, 4).unwrap();
    let prod = ProductState::plus(8).unwrap();
    let vec = prod.to_state_vector().unwrap();
    let a = assemble(&basis, &h, &prod, Estimator::Exact, true).unwrap();
    let b = assemble(&basis, &h, &vec, Estimator::Exact, true).unwrap();
    assert!(max_abs(&(&a.e - &b.e)) <= 1e-12);
    assert!(max_abs(&(&a.d - &b.d)) <= 1e-12);
    assert!(max_abs(&(a.f.unwrap() - b.f.unwrap())) <= 1e-12);
}

#[test]
fn sampled_matrices_are_reproducible_and_close() {
    let mut r = rng(13);
    let h = random_hamiltonian(4, 3, &mut r);
    let psi = random_state(4, &mut r);
    let basis = MomentBasis::from_hamiltonian(&h, 2).unwrap();
    let est = Estimator::Sampled {
        shots: 200_000,
        seed: 9,
    };
    let a = assemble(&basis, &h, &psi, est, false).unwrap();
    let b = assemble(&basis, &h, &psi, est, false).unwrap();
    assert_eq!(a.e, b.e);
    assert_eq!(a.d, b.d);
    let exact = assemble(&basis, &h, &psi, Estimator::Exact, false).unwrap();
    // 200k shots: per-string standard error <= 1/sqrt(2e5) ~ 2.2e-3
    assert!(max_abs(&(&a.e - &exact.e)) < 0.02);
    assert_eq!(hermiticity_defect(&a.e), 0.0);
}
