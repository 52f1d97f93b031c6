//! Fixtures shared by the benchmarks in `benches/`.

use qas_core::state::{build_hardware_efficient_state, CircuitSpec};
use qas_core::{
    CVector, Estimator, ModelSpec, MomentBasis, OverlapMatrices, PauliSum, StateVector,
};

/// Transverse Ising chain from a depth-20 random circuit, with its order-`k` basis.
pub struct IsingFixture {
    pub h: PauliSum,
    pub basis: MomentBasis,
    pub psi: StateVector,
}

impl IsingFixture {
    pub fn new(n: usize, k: usize) -> Self {
        let h = ModelSpec::ising(n, 1.0, 1.0).build().expect("valid model");
        let basis = MomentBasis::from_hamiltonian(&h, k).expect("valid order");
        let psi =
            build_hardware_efficient_state(&CircuitSpec::random(n, 20, 0)).expect("valid circuit");
        IsingFixture { h, basis, psi }
    }

    pub fn matrices(&self) -> OverlapMatrices {
        qas_core::assemble(&self.basis, &self.h, &self.psi, Estimator::Exact, false)
            .expect("assembly succeeds")
    }
}

/// `(1, 0, ..., 0)`: the reference state itself.
pub fn unit(m: usize) -> CVector {
    let mut a = CVector::zeros(m);
    a[0] = 1.0.into();
    a
}
