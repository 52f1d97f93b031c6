#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qas_core::models::random_strings;
use qas_core::moments::realize_states;
use qas_core::oracle::dense_from_pauli_sum;
use qas_core::{CMatrix, CVector, MomentBasis, PauliSum, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::normalized(n, amps).unwrap()
}

/// Random Hermitian Pauli sum with `r` distinct strings and real weights in [-1, 1).
pub fn random_hamiltonian(n: usize, r: usize, rng: &mut ChaCha8Rng) -> PauliSum {
    let strings = random_strings(n, r, rng.random()).unwrap();
    PauliSum::from_real_terms(
        n,
        strings
            .into_iter()
            .map(|p| (2.0 * rng.random::<f64>() - 1.0, p)),
    )
    .unwrap()
}

pub fn unit(m: usize) -> CVector {
    let mut a = CVector::zeros(m);
    a[0] = Complex64::new(1.0, 0.0);
    a
}

/// Columns are the realized moment states.
pub fn state_matrix(basis: &MomentBasis, psi: &StateVector) -> CMatrix {
    let states = realize_states(basis, psi).unwrap();
    CMatrix::from_fn(psi.dim(), states.len(), |r, c| states[c].amplitudes()[r])
}

/// Dense `E`, `D`, `F` from explicit state vectors.
pub fn dense_overlaps(
    basis: &MomentBasis,
    h: &PauliSum,
    psi: &StateVector,
) -> (CMatrix, CMatrix, CMatrix) {
    let s = state_matrix(basis, psi);
    let hm = dense_from_pauli_sum(h).unwrap().matrix().clone();
    let hs = &hm * &s;
    (s.adjoint() * &s, s.adjoint() * &hs, hs.adjoint() * &hs)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
