//! Exact algebra of N-qubit Pauli strings and weighted Pauli sums.
//!
//! Strings are stored in symplectic form: one bit-plane for the X part and
//! one for the Z part, packed 64 qubits per word. A string is represented as
//!
//! ```text
//!   phase * i^{|x & z|} * X^x Z^z
//! ```
//!
//! so that a qubit with both bits set is a plain `Y`. Products reduce to
//! word-level XOR and popcount, and the phase stays an exact power of `i`.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use num_complex::Complex64;

use crate::error::{QasError, Result};

/// Merged coefficients with magnitude below this are dropped from a [`PauliSum`].
pub const COEFF_CUTOFF: f64 = 1e-12;

/// Tolerance on the imaginary part of a coefficient for [`PauliSum::is_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const WORD_BITS: usize = 64;

/// A fourth root of unity, stored as the exponent of `i`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// True for `+1` and `-1`.
    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (true, false),
            PauliOp::Y => (true, true),
            PauliOp::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> PauliOp {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    pub fn from_char(c: char) -> Option<PauliOp> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }
}

/// Phase-tagged tensor product of single-qubit Pauli operators.
///
/// Qubit 0 is the leftmost factor in the text form and the first Kronecker
/// factor in dense representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        let w = words_for(num_qubits);
        PauliString {
            num_qubits,
            x: vec![0; w],
            z: vec![0; w],
            phase: Phase::ONE,
        }
    }

    pub fn from_ops(ops: &[PauliOp]) -> Self {
        let mut p = PauliString::identity(ops.len());
        for (q, &op) in ops.iter().enumerate() {
            p.set_op(q, op);
        }
        p
    }

    /// A string acting as `op` on qubit `qubit` and identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, op: PauliOp) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(QasError::Argument(format!(
                "qubit {qubit} out of range for {num_qubits} qubits"
            )));
        }
        let mut p = PauliString::identity(num_qubits);
        p.set_op(qubit, op);
        Ok(p)
    }

    /// Parses a sparse description such as `"X0 Z3"` (operator, qubit index).
    pub fn from_sparse(num_qubits: usize, text: &str) -> Result<Self> {
        let mut p = PauliString::identity(num_qubits);
        for tok in text.split_whitespace() {
            let mut chars = tok.chars();
            let op = chars
                .next()
                .and_then(PauliOp::from_char)
                .ok_or_else(|| QasError::Argument(format!("bad sparse Pauli token '{tok}'")))?;
            let qubit: usize = chars
                .as_str()
                .parse()
                .map_err(|_| QasError::Argument(format!("bad qubit index in '{tok}'")))?;
            if qubit >= num_qubits {
                return Err(QasError::Argument(format!(
                    "qubit {qubit} out of range for {num_qubits} qubits"
                )));
            }
            if p.op(qubit) != PauliOp::I {
                return Err(QasError::Argument(format!("qubit {qubit} given twice")));
            }
            p.set_op(qubit, op);
        }
        Ok(p)
    }

    fn set_op(&mut self, qubit: usize, op: PauliOp) {
        let (w, b) = (qubit / WORD_BITS, qubit % WORD_BITS);
        let (xb, zb) = op.bits();
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | if xb { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if zb { mask } else { 0 };
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Same operators with phase `+1`; the canonical representative of its
    /// span-equivalence class.
    pub fn stripped(&self) -> Self {
        self.clone().with_phase(Phase::ONE)
    }

    pub fn dagger(&self) -> Self {
        self.clone().with_phase(self.phase.conj())
    }

    pub fn op(&self, qubit: usize) -> PauliOp {
        let (w, b) = (qubit / WORD_BITS, qubit % WORD_BITS);
        PauliOp::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn ops(&self) -> impl Iterator<Item = PauliOp> + '_ {
        (0..self.num_qubits).map(|q| self.op(q))
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// True when the operator part is the identity (the phase may be anything).
    pub fn is_identity_ops(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Equality of operator parts, ignoring phase.
    pub fn span_equivalent(&self, other: &PauliString) -> bool {
        self.num_qubits == other.num_qubits && self.x == other.x && self.z == other.z
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti: u32 = (0..self.x.len())
            .map(|w| ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones())
            .sum();
        anti.is_multiple_of(2)
    }

    /// Exact product `self * rhs`.
    pub fn mul(&self, rhs: &PauliString) -> Result<PauliString> {
        QasError::check_dim(self.num_qubits, rhs.num_qubits)?;
        let nw = self.x.len();
        let mut x = Vec::with_capacity(nw);
        let mut z = Vec::with_capacity(nw);
        // i^{y1} X^{x1} Z^{z1} * i^{y2} X^{x2} Z^{z2}
        //   = i^{y1 + y2} (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
        let mut swaps = 0u32;
        let mut y_in = 0u32;
        let mut y_out = 0u32;
        for w in 0..nw {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], rhs.x[w], rhs.z[w]);
            swaps += (z1 & x2).count_ones();
            y_in += (x1 & z1).count_ones() + (x2 & z2).count_ones();
            let (x3, z3) = (x1 ^ x2, z1 ^ z2);
            y_out += (x3 & z3).count_ones();
            x.push(x3);
            z.push(z3);
        }
        // y_in - y_out + 2 * swaps (mod 4)
        let k = (y_in + 3 * y_out + 2 * swaps) % 4;
        Ok(PauliString {
            num_qubits: self.num_qubits,
            x,
            z,
            phase: self.phase * rhs.phase * Phase::from_exponent(k),
        })
    }

    /// Compact display of the operator part (phase omitted).
    pub fn ops_string(&self) -> String {
        self.ops().map(PauliOp::as_char).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phase, self.ops_string())
    }
}

impl FromStr for PauliString {
    type Err = QasError;

    /// Parses a dense operator string such as `"XIZ"`, optionally prefixed
    /// by one of `+`, `-`, `+i`, `-i`, `i`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i").or_else(|| s.strip_prefix('i'))
        {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        if body.is_empty() {
            return Err(QasError::Argument("empty Pauli string".into()));
        }
        let ops = body
            .chars()
            .map(|c| {
                PauliOp::from_char(c)
                    .ok_or_else(|| QasError::Argument(format!("invalid Pauli character '{c}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_ops(&ops).with_phase(phase))
    }
}

/// Left-to-right product of a non-empty list of strings.
pub fn multiply_chain(strings: &[PauliString]) -> Result<PauliString> {
    let (first, rest) = strings
        .split_first()
        .ok_or_else(|| QasError::Argument("empty Pauli chain".into()))?;
    rest.iter().try_fold(first.clone(), |acc, p| acc.mul(p))
}

/// Weighted sum of phase-`+1` Pauli strings, `H = sum_k beta_k P_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    pub fn zero(num_qubits: usize) -> Self {
        PauliSum {
            num_qubits,
            terms: Vec::new(),
        }
    }

    /// Builds a sum, folding string phases into coefficients and merging
    /// span-equivalent strings in first-seen order.
    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, PauliString)>,
    {
        let mut merged: IndexMap<PauliString, Complex64> = IndexMap::new();
        for (c, p) in terms {
            QasError::check_dim(num_qubits, p.num_qubits())?;
            *merged.entry(p.stripped()).or_default() += c * p.phase().to_complex();
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= COEFF_CUTOFF)
            .map(|(p, c)| (c, p))
            .collect();
        Ok(PauliSum { num_qubits, terms })
    }

    pub fn from_real_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        Self::from_terms(
            num_qubits,
            terms.into_iter().map(|(c, p)| (Complex64::new(c, 0.0), p)),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The phase-`+1` strings of the sum, in term order.
    pub fn strings(&self) -> Vec<PauliString> {
        self.terms.iter().map(|(_, p)| p.clone()).collect()
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() <= HERMITIAN_TOL)
    }

    /// `self^dagger * self`, merged. Equals `H^2` for Hermitian `H`.
    pub fn gram_square(&self) -> Result<PauliSum> {
        let mut out = Vec::with_capacity(self.len() * self.len());
        for (bk, pk) in &self.terms {
            for (bl, pl) in &self.terms {
                out.push((bk.conj() * bl, pk.mul(pl)?));
            }
        }
        PauliSum::from_terms(self.num_qubits, out)
    }

    /// Parses the line format `<re> <im> <ops>`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<PauliSum> {
        let mut n: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |message: String| QasError::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(perr(format!(
                    "expected '<re> <im> <ops>', found {} fields",
                    fields.len()
                )));
            }
            let re: f64 = fields[0]
                .parse()
                .map_err(|_| perr(format!("malformed real part '{}'", fields[0])))?;
            let im: f64 = fields[1]
                .parse()
                .map_err(|_| perr(format!("malformed imaginary part '{}'", fields[1])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(perr("non-finite coefficient".into()));
            }
            let mut ops = Vec::with_capacity(fields[2].len());
            for c in fields[2].chars() {
                ops.push(
                    PauliOp::from_char(c)
                        .ok_or_else(|| perr(format!("invalid Pauli character '{c}'")))?,
                );
            }
            match n {
                None => n = Some(ops.len()),
                Some(n0) if n0 != ops.len() => {
                    return Err(perr(format!(
                        "operator length {} differs from earlier length {n0}",
                        ops.len()
                    )))
                }
                _ => {}
            }
            terms.push((Complex64::new(re, im), PauliString::from_ops(&ops)));
        }
        let n = n.ok_or(QasError::Parse {
            line: 0,
            message: "no terms found".into(),
        })?;
        PauliSum::from_terms(n, terms)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (c, p) in &self.terms {
            s.push_str(&format!("{} {} {}\n", c.re, c.im, p.ops_string()));
        }
        s
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}
