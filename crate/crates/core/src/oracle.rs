//! Dense ground truth for small systems: Hamiltonian matrices, exact
//! propagation, ground states and fidelities against moment-basis states.

use num_complex::Complex64;

use crate::error::{QasError, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CVector, HermitianEigen, I};
use crate::moments::{realize_states, MomentBasis};
use crate::pauli::{PauliOp, PauliSum, HERMITIAN_TOL};
use crate::state::StateVector;

/// Largest qubit count accepted for dense matrices.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Allowed deviation of `alpha^+ E alpha` from 1 in [`fidelity`].
pub const FIDELITY_NORM_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct DenseOperator {
    num_qubits: usize,
    matrix: CMatrix,
    hermitian: bool,
}

impl DenseOperator {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn apply(&self, psi: &StateVector) -> Result<CVector> {
        QasError::check_dim(self.num_qubits, psi.num_qubits())?;
        Ok(&self.matrix * CVector::from_column_slice(psi.amplitudes()))
    }

    /// `<psi|H|psi>`, real part.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let hpsi = self.apply(psi)?;
        Ok(CVector::from_column_slice(psi.amplitudes()).dotc(&hpsi).re)
    }

    fn eigen(&self) -> Result<HermitianEigen> {
        if !self.hermitian {
            return Err(QasError::Data("operator is not Hermitian".into()));
        }
        hermitian_eigen(&self.matrix, HERMITIAN_TOL)
    }
}

/// Dense `sum_k beta_k P_k`. Qubit 0 is the leftmost tensor factor.
pub fn dense_from_pauli_sum(h: &PauliSum) -> Result<DenseOperator> {
    let n = h.num_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(QasError::Resource(format!(
            "dense matrices are limited to {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut matrix = CMatrix::zeros(dim, dim);
    for (beta, p) in h.terms() {
        // P|j> = phase_j |j ^ flip>, so each column has a single entry.
        let mut flip = 0usize;
        let mut zmask = 0usize;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            match p.op(q) {
                PauliOp::I => {}
                PauliOp::X => flip |= bit,
                PauliOp::Y => {
                    flip |= bit;
                    zmask |= bit;
                }
                PauliOp::Z => zmask |= bit,
            }
        }
        // Y = i X Z on each qubit, so prefactor i^{#Y}.
        let pref = *beta * p.phase().to_complex() * I.powu(p.y_count());
        for j in 0..dim {
            let sign = if (j & zmask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            matrix[(j ^ flip, j)] += pref * sign;
        }
    }
    Ok(DenseOperator {
        num_qubits: n,
        hermitian: h.is_hermitian(),
        matrix,
    })
}

/// `exp(-iHt)` from one eigendecomposition, reusable across initial states
/// and time grids. Diagonal Hamiltonians keep only their diagonal.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    num_qubits: usize,
    values: Vec<f64>,
    /// Eigenvectors as columns; `None` means the computational basis.
    vectors: Option<CMatrix>,
}

impl ExactPropagator {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let a = &h.matrix;
        let n = a.nrows();
        let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || a[(i, j)] == Complex64::default()));
        if diagonal && h.hermitian {
            return Ok(ExactPropagator {
                num_qubits: h.num_qubits,
                values: (0..n).map(|i| a[(i, i)].re).collect(),
                vectors: None,
            });
        }
        let eig = h.eigen()?;
        Ok(ExactPropagator {
            num_qubits: h.num_qubits,
            values: eig.values,
            vectors: Some(eig.vectors),
        })
    }

    /// Smallest eigenvalue.
    pub fn ground_energy(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn evolve(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        QasError::check_dim(self.num_qubits, psi0.num_qubits())?;
        let psi = CVector::from_column_slice(psi0.amplitudes());
        let coeffs = match &self.vectors {
            Some(v) => v.adjoint() * psi,
            None => psi,
        };
        times
            .iter()
            .map(|&t| {
                let rotated = CVector::from_fn(coeffs.len(), |k, _| {
                    coeffs[k] * Complex64::from_polar(1.0, -self.values[k] * t)
                });
                let amps = match &self.vectors {
                    Some(v) => v * rotated,
                    None => rotated,
                };
                StateVector::normalized(self.num_qubits, amps.iter().copied().collect())
            })
            .collect()
    }
}

/// `exp(-iHt)|psi0>` at each requested time, from a single eigendecomposition.
pub fn exact_evolve(
    h: &DenseOperator,
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    QasError::check_dim(h.num_qubits, psi0.num_qubits())?;
    ExactPropagator::new(h)?.evolve(psi0, times)
}

/// Lowest eigenpair; among degenerate ground states the first eigenvector
/// returned by the solver is used.
pub fn ground_state(h: &DenseOperator) -> Result<(f64, StateVector)> {
    let eig = h.eigen()?;
    let v = eig.vectors.column(0);
    // Fix the global phase so the largest component is real and positive.
    let (mut best, mut pivot) = (0.0, Complex64::new(1.0, 0.0));
    for z in v.iter() {
        if z.norm() > best + 1e-12 {
            best = z.norm();
            pivot = *z;
        }
    }
    let phase = pivot.conj() / pivot.norm();
    let amps = v.iter().map(|z| z * phase).collect();
    Ok((eig.values[0], StateVector::normalized(h.num_qubits, amps)?))
}

/// `|<exact|phi>|^2` with `|phi> = sum_i alpha_i l_i |psi>`.
pub fn fidelity(
    exact: &StateVector,
    basis: &MomentBasis,
    psi: &StateVector,
    alpha: &CVector,
) -> Result<f64> {
    let states = realize_states(basis, psi)?;
    fidelity_with_states(exact, &states, alpha)
}

/// [`fidelity`] with the moment states already realized.
pub fn fidelity_with_states(
    exact: &StateVector,
    states: &[StateVector],
    alpha: &CVector,
) -> Result<f64> {
    let phi = combine_states(states, alpha)?;
    QasError::check_dim(exact.dim(), phi.len())?;
    let norm = phi.norm_squared();
    if (norm - 1.0).abs() > FIDELITY_NORM_TOL {
        return Err(QasError::Argument(format!(
            "combined state has norm^2 {norm}, expected 1 within {FIDELITY_NORM_TOL}"
        )));
    }
    let overlap = CVector::from_column_slice(exact.amplitudes()).dotc(&phi);
    Ok(overlap.norm_sqr().min(1.0))
}

/// `sum_i alpha_i |s_i>` as a raw amplitude vector.
pub fn combine_states(states: &[StateVector], alpha: &CVector) -> Result<CVector> {
    QasError::check_dim(states.len(), alpha.len())?;
    let dim = states
        .first()
        .map(StateVector::dim)
        .ok_or_else(|| QasError::Argument("empty moment basis".into()))?;
    let mut phi = CVector::zeros(dim);
    for (s, &a) in states.iter().zip(alpha.iter()) {
        if a == Complex64::default() {
            continue;
        }
        for (out, amp) in phi.iter_mut().zip(s.amplitudes()) {
            *out += a * amp;
        }
    }
    Ok(phi)
}
