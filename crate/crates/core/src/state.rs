//! Reference states and Pauli expectation values.
//!
//! Two exact backends implement [`PauliExpectation`]: dense statevectors for
//! small registers and factorized product states, whose expectations cost
//! O(N) and therefore scale to thousands of qubits. [`sample_expectation`]
//! wraps either backend with a finite-shot estimator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{QasError, Result};
use crate::pauli::PauliString;

/// Largest register held as a dense statevector.
pub const MAX_STATEVECTOR_QUBITS: usize = 26;

/// Normalization tolerance for [`StateVector`].
pub const STATE_NORM_TOL: f64 = 1e-10;

/// Normalization tolerance for each factor of a [`ProductState`].
pub const PRODUCT_NORM_TOL: f64 = 1e-12;

/// Anything that can return exact `<psi|P|psi>` for a Pauli string.
pub trait PauliExpectation {
    fn num_qubits(&self) -> usize;

    /// Exact expectation including the phase of `p`.
    fn expectation(&self, p: &PauliString) -> Result<Complex64>;
}

/// Dense N-qubit state. Qubit `q` is bit `N - 1 - q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

fn guard_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(QasError::Argument(
            "register must have at least one qubit".into(),
        ));
    }
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(QasError::Resource(format!(
            "{n} qubits exceeds the statevector limit of {MAX_STATEVECTOR_QUBITS}"
        )));
    }
    Ok(())
}

/// Masks and prefactor for the action `P|b> = pref * (-1)^{|b & z|} |b ^ x>`.
struct IndexMasks {
    x: usize,
    z: usize,
    pref: Complex64,
}

fn index_masks(p: &PauliString) -> IndexMasks {
    let n = p.num_qubits();
    let (mut x, mut z) = (0usize, 0usize);
    for q in 0..n {
        let w = q / 64;
        let b = q % 64;
        let bit = 1usize << (n - 1 - q);
        if (p.x_words()[w] >> b) & 1 == 1 {
            x |= bit;
        }
        if (p.z_words()[w] >> b) & 1 == 1 {
            z |= bit;
        }
    }
    let y = crate::pauli::Phase::from_exponent(p.y_count());
    IndexMasks {
        x,
        z,
        pref: (p.phase() * y).to_complex(),
    }
}

#[inline]
fn parity_sign(v: usize) -> f64 {
    if v.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        guard_qubits(num_qubits)?;
        let mut amps = vec![Complex64::default(); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps amplitudes, checking the length and the normalization.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        guard_qubits(num_qubits)?;
        QasError::check_dim(1 << num_qubits, amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(QasError::Data(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { num_qubits, amps })
    }

    /// Normalizes arbitrary amplitudes.
    pub fn normalized(num_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QasError::Data("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(num_qubits, amps)
    }

    /// Wraps amplitudes without a normalization check; for intermediate
    /// vectors such as `H|psi>` or unnormalized combinations.
    pub fn from_raw(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        guard_qubits(num_qubits)?;
        QasError::check_dim(1 << num_qubits, amps.len())?;
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        QasError::check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Exact action of `p`, phase included.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        QasError::check_dim(self.num_qubits, p.num_qubits())?;
        let m = index_masks(p);
        let mut out = vec![Complex64::default(); self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            out[b ^ m.x] = m.pref * parity_sign(b & m.z) * a;
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps: out,
        })
    }

    fn apply_single(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                self.amps[b] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[b | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    fn apply_cz(&mut self, q1: usize, q2: usize) {
        let n = self.num_qubits;
        let mask = (1usize << (n - 1 - q1)) | (1usize << (n - 1 - q2));
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b & mask == mask {
                *a = -*a;
            }
        }
    }
}

impl PauliExpectation for StateVector {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn expectation(&self, p: &PauliString) -> Result<Complex64> {
        QasError::check_dim(self.num_qubits, p.num_qubits())?;
        let m = index_masks(p);
        let mut acc = Complex64::default();
        for (b, &a) in self.amps.iter().enumerate() {
            acc += self.amps[b ^ m.x].conj() * a * parity_sign(b & m.z);
        }
        Ok(m.pref * acc)
    }
}

/// Tensor product of single-qubit states.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    qubits: Vec<[Complex64; 2]>,
}

impl ProductState {
    pub fn new(qubits: Vec<[Complex64; 2]>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(QasError::Argument(
                "register must have at least one qubit".into(),
            ));
        }
        for (q, v) in qubits.iter().enumerate() {
            let n = v[0].norm_sqr() + v[1].norm_sqr();
            if (n - 1.0).abs() > PRODUCT_NORM_TOL {
                return Err(QasError::Data(format!("qubit {q} state has norm {n}")));
            }
        }
        Ok(ProductState { qubits })
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::new(vec![
            [Complex64::new(1.0, 0.0), Complex64::default()];
            num_qubits
        ])
    }

    pub fn plus(num_qubits: usize) -> Result<Self> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(vec![[h, h]; num_qubits])
    }

    pub fn qubit_states(&self) -> &[[Complex64; 2]] {
        &self.qubits
    }

    pub fn to_state_vector(&self) -> Result<StateVector> {
        let n = self.qubits.len();
        guard_qubits(n)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for q in &self.qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        StateVector::from_amplitudes(n, amps)
    }
}

impl PauliExpectation for ProductState {
    fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    fn expectation(&self, p: &PauliString) -> Result<Complex64> {
        QasError::check_dim(self.qubits.len(), p.num_qubits())?;
        let mut acc = p.phase().to_complex();
        for (w, (&xw, &zw)) in p.x_words().iter().zip(p.z_words()).enumerate() {
            let mut support = xw | zw;
            while support != 0 {
                let b = support.trailing_zeros() as usize;
                support &= support - 1;
                let [a0, a1] = self.qubits[w * 64 + b];
                let value = match ((xw >> b) & 1, (zw >> b) & 1) {
                    (1, 0) => 2.0 * (a0.conj() * a1).re,
                    (1, 1) => 2.0 * (a0.conj() * a1).im,
                    _ => a0.norm_sqr() - a1.norm_sqr(),
                };
                if value == 0.0 {
                    return Ok(Complex64::default());
                }
                acc *= value;
            }
        }
        Ok(acc)
    }
}

/// Finite-shot estimate of `<P>` for a phase-`+1` string.
///
/// Each shot is a +-1 outcome with `P(+1) = (1 + <P>) / 2`; the sum of
/// outcomes is drawn as one binomial variate. Deterministic in `seed`.
pub fn sample_expectation<S: PauliExpectation + ?Sized>(
    state: &S,
    p: &PauliString,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(QasError::Argument("shots must be positive".into()));
    }
    if p.phase() != crate::pauli::Phase::ONE {
        return Err(QasError::Argument(format!(
            "sampled observable must have phase +1, got {p}"
        )));
    }
    let exact = state.expectation(p)?.re;
    let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(shots, p_plus).map_err(|e| QasError::Data(e.to_string()))?;
    let plus = dist.sample(&mut rng) as f64;
    Ok((2.0 * plus - shots as f64) / shots as f64)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Placement of the controlled-phase layer.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    /// Pairs `(q, q+1)` for `q = 0..N-1`.
    #[default]
    Chain,
    /// Chain plus the wrap-around pair `(N-1, 0)`.
    Ring,
}

/// Parameters of a layered hardware-efficient circuit: per layer one
/// rotation per qubit, then CZ gates on the entangler pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub depth: usize,
    pub seed: u64,
    #[serde(default)]
    pub entangler: Entangler,
    /// `depth x num_qubits` rotation angles in radians.
    pub angles: Vec<Vec<f64>>,
    /// `depth x num_qubits` rotation axes.
    pub axes: Vec<Vec<Axis>>,
}

impl CircuitSpec {
    /// Draws angles uniformly in `[0, 2pi)` and axes uniformly from
    /// `{x, y, z}`. Each `(layer, qubit)` cell reads its own position of a
    /// ChaCha keystream (stream = layer), so cells are independent of how
    /// many others are generated.
    pub fn random(num_qubits: usize, depth: usize, seed: u64) -> Self {
        let mut angles = Vec::with_capacity(depth);
        let mut axes = Vec::with_capacity(depth);
        for layer in 0..depth {
            let mut row_a = Vec::with_capacity(num_qubits);
            let mut row_x = Vec::with_capacity(num_qubits);
            for qubit in 0..num_qubits {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(layer as u64);
                rng.set_word_pos(qubit as u128 * 16);
                row_a.push(rng.random::<f64>() * 2.0 * PI);
                row_x.push([Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3usize)]);
            }
            angles.push(row_a);
            axes.push(row_x);
        }
        CircuitSpec {
            num_qubits,
            depth,
            seed,
            entangler: Entangler::Chain,
            angles,
            axes,
        }
    }

    pub fn with_entangler(mut self, entangler: Entangler) -> Self {
        self.entangler = entangler;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let rows_ok = self.angles.len() == self.depth
            && self.axes.len() == self.depth
            && self.angles.iter().all(|r| r.len() == self.num_qubits)
            && self.axes.iter().all(|r| r.len() == self.num_qubits);
        if !rows_ok {
            return Err(QasError::Argument(
                "circuit angles/axes must be depth x num_qubits".into(),
            ));
        }
        if self.angles.iter().flatten().any(|a| !a.is_finite()) {
            return Err(QasError::Argument("circuit angles must be finite".into()));
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.num_qubits;
        let mut pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        if self.entangler == Entangler::Ring && n > 2 {
            pairs.push((n - 1, 0));
        }
        pairs
    }
}

fn rotation(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let z = Complex64::default();
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [[Complex64::new(c, -s), z], [z, Complex64::new(c, s)]],
    }
}

/// Runs the circuit on `|0...0>`.
pub fn build_hardware_efficient_state(spec: &CircuitSpec) -> Result<StateVector> {
    spec.validate()?;
    let mut psi = StateVector::zero(spec.num_qubits)?;
    let pairs = spec.pairs();
    for (row_a, row_x) in spec.angles.iter().zip(&spec.axes) {
        for (q, (&theta, &axis)) in row_a.iter().zip(row_x).enumerate() {
            psi.apply_single(q, rotation(axis, theta));
        }
        for &(a, b) in &pairs {
            psi.apply_cz(a, b);
        }
    }
    let norm = psi.norm_sqr().sqrt();
    psi.amps.iter_mut().for_each(|a| *a /= norm);
    Ok(psi)
}
