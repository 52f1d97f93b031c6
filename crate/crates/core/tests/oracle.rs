mod common;

use common::{random_hamiltonian, random_state, rng};
use nalgebra::DMatrix;
use num_complex::Complex64;
use qas_core::moments::apply_pauli_sum;
use qas_core::oracle::{dense_from_pauli_sum, exact_evolve, ground_state};
use qas_core::{CMatrix, CVector, ExactPropagator, ModelSpec, PauliSum, StateVector};
use rand::Rng;

fn column(psi: &StateVector) -> CVector {
    CVector::from_column_slice(psi.amplitudes())
}

fn apply(h: &PauliSum, v: &CVector) -> CVector {
    let n = h.num_qubits();
    let psi = StateVector::from_raw(n, v.iter().copied().collect()).unwrap();
    column(&apply_pauli_sum(h, &psi).unwrap())
}

/// Lowest Ritz value from matrix-free Lanczos with full reorthogonalization.
fn lanczos_ground_energy(h: &PauliSum, start: &StateVector, steps: usize) -> f64 {
    let mut basis: Vec<CVector> = vec![column(start)];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..steps {
        let mut w = apply(h, &basis[j]);
        alpha.push(basis[j].dotc(&w).re);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w -= v * c;
            }
        }
        let b = w.norm();
        if b < 1e-12 {
            break;
        }
        beta.push(b);
        basis.push(w / Complex64::new(b, 0.0));
    }
    let k = alpha.len();
    let t = DMatrix::<f64>::from_fn(k, k, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    t.symmetric_eigen().eigenvalues.min()
}

#[test]
fn ising_ground_energy_matches_lanczos() {
    let h = ModelSpec::ising(8, 1.0, 0.5).build().unwrap();
    let (e0, psi) = ground_state(&dense_from_pauli_sum(&h).unwrap()).unwrap();
    let start = random_state(8, &mut rng(41));
    let lanczos = lanczos_ground_energy(&h, &start, 120);
    assert!((e0 - lanczos).abs() <= 1e-9, "{e0} vs {lanczos}");
    // eigen-equation residual of the returned state
    let r = apply(&h, &column(&psi)) - column(&psi) * Complex64::new(e0, 0.0);
    assert!(r.norm() <= 1e-10);
}

#[test]
fn time_composition() {
    let mut r = rng(42);
    for _ in 0..10 {
        let n = r.random_range(1..=5);
        let h = dense_from_pauli_sum(&random_hamiltonian(n, 5.min((1 << (2 * n)) - 1), &mut r))
            .unwrap();
        let psi = random_state(n, &mut r);
        let (t1, t2) = (r.random::<f64>() * 3.0, r.random::<f64>() * 3.0);
        let mid = exact_evolve(&h, &psi, &[t1]).unwrap().remove(0);
        let two_step = exact_evolve(&h, &mid, &[t2]).unwrap().remove(0);
        let direct = exact_evolve(&h, &psi, &[t1 + t2]).unwrap().remove(0);
        assert!((column(&two_step) - column(&direct)).camax() <= 1e-9);
    }
}

#[test]
fn propagator_matches_taylor_series() {
    let mut r = rng(43);
    let h = random_hamiltonian(4, 6, &mut r);
    let psi = random_state(4, &mut r);
    let t = 0.7;
    // sum_p (-iHt)^p / p! |psi>, with ||Ht|| small enough for 40 terms
    let mut term = column(&psi);
    let mut sum = term.clone();
    for p in 1..40 {
        term = apply(&h, &term) * Complex64::new(0.0, -t / p as f64);
        sum += &term;
    }
    let exact = exact_evolve(&dense_from_pauli_sum(&h).unwrap(), &psi, &[t]).unwrap();
    assert!((column(&exact[0]) - sum).camax() <= 1e-12);
}

#[test]
fn diagonal_fast_path_matches_rotated_full_path() {
    // H_z is diagonal; H_x = U H_z U with U = Hadamard on every qubit is not,
    // so the two propagators take different code paths.
    let n = 4;
    let hz = PauliSum::parse("0.7 0 ZIII\n-0.4 0 IZZI\n1.1 0 ZIIZ\n0.3 0 IIIZ").unwrap();
    let hx = PauliSum::parse("0.7 0 XIII\n-0.4 0 IXXI\n1.1 0 XIIX\n0.3 0 IIIX").unwrap();
    let h1 = CMatrix::from_row_slice(
        2,
        2,
        &[1.0, 1.0, 1.0, -1.0].map(|x| Complex64::new(x * 0.5f64.sqrt(), 0.0)),
    );
    let mut u = CMatrix::identity(1, 1);
    for _ in 0..n {
        u = u.kronecker(&h1);
    }
    let psi = random_state(n, &mut rng(44));
    let rotated = StateVector::from_raw(n, (&u * column(&psi)).iter().copied().collect()).unwrap();
    let times = [0.0, 0.5, 2.0, 7.5];
    let z = ExactPropagator::new(&dense_from_pauli_sum(&hz).unwrap())
        .unwrap()
        .evolve(&psi, &times)
        .unwrap();
    let x = ExactPropagator::new(&dense_from_pauli_sum(&hx).unwrap())
        .unwrap()
        .evolve(&rotated, &times)
        .unwrap();
    for (a, b) in z.iter().zip(&x) {
        assert!((column(a) - &u * column(b)).camax() <= 1e-12);
    }
}

#[test]
fn ground_energy_is_a_variational_lower_bound() {
    let mut r = rng(45);
    for _ in 0..20 {
        let n = r.random_range(1..=5);
        let h = random_hamiltonian(n, 6.min((1 << (2 * n)) - 1), &mut r);
        let dense = dense_from_pauli_sum(&h).unwrap();
        let (e0, g) = ground_state(&dense).unwrap();
        assert!((dense.expectation(&g).unwrap() - e0).abs() <= 1e-10);
        assert!((ExactPropagator::new(&dense).unwrap().ground_energy() - e0).abs() <= 1e-12);
        for _ in 0..10 {
            assert!(dense.expectation(&random_state(n, &mut r)).unwrap() >= e0 - 1e-12);
        }
    }
}
