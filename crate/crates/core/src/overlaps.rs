//! Overlap matrices of a moment basis.
//!
//! Every entry `<psi| l_i^dagger O l_j |psi>` with Pauli labels `l_i, l_j`
//! and a Pauli operator `O` collapses to `a <psi|P'|psi>` for a single
//! string `P'` and a prefactor `a` in `{1, -1, i, -i}`. The assembler keeps
//! one value per distinct `P'`, so each string is evaluated (or sampled)
//! once no matter how many entries share it.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QasError, Result};
use crate::linalg::{CMatrix, CVector};
use crate::moments::MomentBasis;
use crate::pauli::{PauliString, PauliSum};
use crate::state::{sample_expectation, PauliExpectation};

/// Largest tolerated imaginary part of `<H>` in exact mode.
pub const ENERGY_IMAG_TOL: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    Exact,
    Sampled {
        shots: u64,
        seed: u64,
    },
}

impl Estimator {
    pub fn is_exact(&self) -> bool {
        matches!(self, Estimator::Exact)
    }
}

#[derive(Clone, Debug)]
pub struct OverlapMatrices {
    /// Gram matrix `E_ij = <psi_i|psi_j>`.
    pub e: CMatrix,
    /// Hamiltonian overlaps `D_ij = <psi_i|H|psi_j>`.
    pub d: CMatrix,
    /// `F_ij = <psi_i|H^2|psi_j>`, when requested.
    pub f: Option<CMatrix>,
    pub estimator: Estimator,
    /// Number of distinct Pauli strings whose expectation was needed.
    pub distinct_strings: usize,
}

impl OverlapMatrices {
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }
}

/// `bra^dagger * op * ket` as one string with its accumulated phase.
pub fn reduce_to_single_string(
    bra: &PauliString,
    op: &PauliString,
    ket: &PauliString,
) -> Result<PauliString> {
    bra.dagger().mul(op)?.mul(ket)
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one string in sampled mode; independent of evaluation order.
fn string_seed(seed: u64, p: &PauliString) -> u64 {
    let mut h = mix64(seed);
    for (&x, &z) in p.x_words().iter().zip(p.z_words()) {
        h = mix64(h ^ x);
        h = mix64(h ^ z.rotate_left(17));
    }
    h
}

/// Evaluates overlap matrices of one basis against one reference state,
/// sharing a single expectation cache across all matrices it builds.
pub struct OverlapAssembler<'a, S: PauliExpectation + ?Sized> {
    labels: &'a [PauliString],
    state: &'a S,
    estimator: Estimator,
    cache: HashMap<PauliString, Complex64>,
}

impl<'a, S: PauliExpectation + ?Sized> OverlapAssembler<'a, S> {
    pub fn new(basis: &'a MomentBasis, state: &'a S, estimator: Estimator) -> Result<Self> {
        QasError::check_dim(basis.num_qubits(), state.num_qubits())?;
        if let Estimator::Sampled { shots: 0, .. } = estimator {
            return Err(QasError::Argument(
                "sampled estimator needs shots > 0".into(),
            ));
        }
        Ok(OverlapAssembler {
            labels: basis.labels(),
            state,
            estimator,
            cache: HashMap::new(),
        })
    }

    pub fn distinct_strings(&self) -> usize {
        self.cache.len()
    }

    /// Expectation of a phased string through the cache.
    fn value(&mut self, p: PauliString) -> Result<Complex64> {
        let phase = p.phase().to_complex();
        let key = p.stripped();
        if let Some(v) = self.cache.get(&key) {
            return Ok(phase * v);
        }
        let v = match self.estimator {
            _ if key.is_identity_ops() => Complex64::new(1.0, 0.0),
            Estimator::Exact => self.state.expectation(&key)?,
            Estimator::Sampled { shots, seed } => Complex64::new(
                sample_expectation(self.state, &key, shots, string_seed(seed, &key))?,
                0.0,
            ),
        };
        self.cache.insert(key, v);
        Ok(phase * v)
    }

    /// Gram matrix. Only `i <= j` is evaluated; the rest is mirrored.
    pub fn gram(&mut self) -> Result<CMatrix> {
        let m = self.labels.len();
        let mut e = CMatrix::zeros(m, m);
        for i in 0..m {
            e[(i, i)] = Complex64::new(1.0, 0.0);
            for j in i + 1..m {
                let v = self.value(self.labels[i].dagger().mul(&self.labels[j])?)?;
                e[(i, j)] = v;
                e[(j, i)] = v.conj();
            }
        }
        Ok(e)
    }

    /// `M_ij = sum_k c_k <psi| l_i^dagger P_k l_j |psi>`. For Hermitian sums
    /// only the upper triangle is evaluated and mirrored.
    pub fn operator(&mut self, op: &PauliSum) -> Result<CMatrix> {
        QasError::check_dim(self.state.num_qubits(), op.num_qubits())?;
        let m = self.labels.len();
        let hermitian = op.is_hermitian();
        let mut out = CMatrix::zeros(m, m);
        // P_k l_j, reused across rows
        let mut right: Vec<Vec<PauliString>> = Vec::with_capacity(m);
        for l in self.labels {
            right.push(
                op.terms()
                    .iter()
                    .map(|(_, p)| p.mul(l))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        for i in 0..m {
            let bra = self.labels[i].dagger();
            let j0 = if hermitian { i } else { 0 };
            for j in j0..m {
                let mut acc = Complex64::default();
                for ((c, _), pl) in op.terms().iter().zip(&right[j]) {
                    acc += c * self.value(bra.mul(pl)?)?;
                }
                if hermitian {
                    if i == j {
                        acc.im = 0.0;
                    }
                    out[(i, j)] = acc;
                    out[(j, i)] = acc.conj();
                } else {
                    out[(i, j)] = acc;
                }
            }
        }
        Ok(out)
    }
}

/// Builds `E`, `D` and optionally `F` (via the merged square of `h`).
pub fn assemble<S: PauliExpectation + ?Sized>(
    basis: &MomentBasis,
    h: &PauliSum,
    state: &S,
    estimator: Estimator,
    with_f: bool,
) -> Result<OverlapMatrices> {
    QasError::check_dim(basis.num_qubits(), h.num_qubits())?;
    let mut asm = OverlapAssembler::new(basis, state, estimator)?;
    let e = asm.gram()?;
    let d = asm.operator(h)?;
    let f = if with_f {
        Some(asm.operator(&h.gram_square()?)?)
    } else {
        None
    };
    Ok(OverlapMatrices {
        e,
        d,
        f,
        estimator,
        distinct_strings: asm.distinct_strings(),
    })
}

/// `Re(alpha^dagger D alpha) / (alpha^dagger E alpha)`.
pub fn expectation_of_hamiltonian(alpha: &CVector, m: &OverlapMatrices) -> Result<f64> {
    QasError::check_dim(m.dim(), alpha.len())?;
    let norm = alpha.dotc(&(&m.e * alpha)).re;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(QasError::Argument(format!(
            "coefficient vector has non-positive norm {norm}"
        )));
    }
    let num = alpha.dotc(&(&m.d * alpha)) / norm;
    if m.estimator.is_exact() && num.im.abs() > ENERGY_IMAG_TOL * num.re.abs().max(1.0) {
        return Err(QasError::Data(format!(
            "energy has imaginary part {:.3e}",
            num.im
        )));
    }
    Ok(num.re)
}

/// Row-major `re im` pairs, one matrix row per line.
pub fn dump_matrix(a: &CMatrix) -> String {
    let mut s = String::new();
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols())
            .map(|j| format!("{} {}", a[(i, j)].re, a[(i, j)].im))
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
