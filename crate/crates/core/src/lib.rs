//! Classical simulation of quantum dynamics in a Krylov-like space spanned by
//! Pauli-string moments of a reference state.
//!
//! The pipeline is: build a [`PauliSum`] Hamiltonian, generate a
//! [`MomentBasis`] from its terms, measure overlap matrices against a
//! reference state with [`assemble`], then integrate the coefficient equations
//! with [`evolve`]. The [`oracle`] module supplies dense ground truth for small
//! systems.

pub mod error;
pub mod evolve;
pub mod linalg;
pub mod models;
pub mod moments;
pub mod oracle;
pub mod overlaps;
pub mod pauli;
pub mod state;

pub use error::{QasError, Result};
pub use evolve::{evolve, IntegratorConfig, Method, Mode, Trajectory};
pub use linalg::{CMatrix, CVector};
pub use models::{Boundary, Family, ModelSpec};
pub use moments::MomentBasis;
pub use oracle::{DenseOperator, ExactPropagator};
pub use overlaps::{assemble, Estimator, OverlapMatrices};
pub use pauli::{PauliOp, PauliString, PauliSum, Phase};
pub use state::{
    build_hardware_efficient_state, CircuitSpec, PauliExpectation, ProductState, StateVector,
};
