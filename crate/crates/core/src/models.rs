//! Hamiltonian families used by the experiments.

use std::path::PathBuf;

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QasError, Result};
use crate::pauli::{PauliOp, PauliString, PauliSum};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SingleZ,
    Ising,
    Xxz,
    FermionTunnel,
    RandomStrings,
    ZzPair,
    File,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    /// Qubit count; optional for `file`, where it is checked when given.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default, rename = "J", alias = "j")]
    pub j: Option<f64>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default, alias = "Delta")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl ModelSpec {
    pub fn new(family: Family, n: usize) -> Self {
        ModelSpec {
            family,
            n: Some(n),
            j: None,
            h: None,
            delta: None,
            boundary: Boundary::default(),
            seed: None,
            r: None,
            path: None,
        }
    }

    pub fn ising(n: usize, j: f64, h: f64) -> Self {
        ModelSpec {
            j: Some(j),
            h: Some(h),
            ..Self::new(Family::Ising, n)
        }
    }

    pub fn xxz(n: usize, delta: f64) -> Self {
        ModelSpec {
            delta: Some(delta),
            ..Self::new(Family::Xxz, n)
        }
    }

    pub fn random_strings(n: usize, r: usize, seed: u64) -> Self {
        ModelSpec {
            r: Some(r),
            seed: Some(seed),
            ..Self::new(Family::RandomStrings, n)
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    fn qubits(&self, min: usize) -> Result<usize> {
        let n = self.n.ok_or_else(|| missing(self.family, "n"))?;
        if n < min {
            return Err(QasError::Configuration(format!(
                "{:?} needs at least {min} qubit(s), got {n}",
                self.family
            )));
        }
        Ok(n)
    }

    fn param(&self, value: Option<f64>, name: &str) -> Result<f64> {
        match value {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(QasError::Configuration(format!(
                "parameter {name} must be finite, got {v}"
            ))),
            None => Err(missing(self.family, name)),
        }
    }

    pub fn build(&self) -> Result<PauliSum> {
        match self.family {
            Family::SingleZ => {
                let n = self.qubits(1)?;
                let terms = (0..n).map(|q| PauliString::single(n, q, PauliOp::Z).map(|p| (1.0, p)));
                PauliSum::from_real_terms(n, terms.collect::<Result<Vec<_>>>()?)
            }
            Family::ZzPair => {
                let n = self.qubits(2)?;
                PauliSum::from_real_terms(n, [(1.0, PauliString::from_sparse(n, "Z0 Z1")?)])
            }
            Family::Ising => {
                let n = self.qubits(1)?;
                let j = self.param(self.j, "J")?;
                let h = self.param(self.h, "h")?;
                let mut terms = Vec::new();
                for (a, b) in bonds(n, self.boundary) {
                    terms.push((j / 2.0, PauliString::from_sparse(n, &format!("X{a} X{b}"))?));
                }
                for q in 0..n {
                    terms.push((h / 2.0, PauliString::single(n, q, PauliOp::Z)?));
                }
                PauliSum::from_real_terms(n, terms)
            }
            Family::Xxz => {
                let n = self.qubits(2)?;
                let delta = self.param(self.delta, "delta")?;
                let mut terms = Vec::new();
                for (a, b) in bonds(n, self.boundary) {
                    terms.push((0.5, PauliString::from_sparse(n, &format!("X{a} X{b}"))?));
                    terms.push((0.5, PauliString::from_sparse(n, &format!("Y{a} Y{b}"))?));
                    terms.push((
                        0.5 * delta,
                        PauliString::from_sparse(n, &format!("Z{a} Z{b}"))?,
                    ));
                }
                PauliSum::from_real_terms(n, terms)
            }
            Family::FermionTunnel => {
                let n = self.qubits(2)?;
                let string = |end: PauliOp| {
                    let mut ops = vec![PauliOp::Z; n];
                    ops[0] = end;
                    ops[n - 1] = end;
                    PauliString::from_ops(&ops)
                };
                PauliSum::from_real_terms(n, [(0.5, string(PauliOp::X)), (0.5, string(PauliOp::Y))])
            }
            Family::RandomStrings => {
                let n = self.qubits(1)?;
                let r = self.r.ok_or_else(|| missing(self.family, "r"))?;
                let seed = self.seed.ok_or_else(|| missing(self.family, "seed"))?;
                let strings = random_strings(n, r, seed)?;
                PauliSum::from_real_terms(n, strings.into_iter().map(|p| (1.0, p)))
            }
            Family::File => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| missing(self.family, "path"))?;
                let text = std::fs::read_to_string(path).map_err(|e| {
                    QasError::Configuration(format!("cannot read {}: {e}", path.display()))
                })?;
                let h = PauliSum::parse(&text)?;
                if let Some(n) = self.n {
                    QasError::check_dim(n, h.num_qubits())?;
                }
                Ok(h)
            }
        }
    }
}

fn missing(family: Family, name: &str) -> QasError {
    QasError::Configuration(format!("{family:?} model requires parameter '{name}'"))
}

/// Distinct nearest-neighbour pairs. The wrap-around bond is only added when
/// it differs from an existing one, so two sites share a single bond.
pub fn bonds(n: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut out: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic && n > 2 {
        out.push((n - 1, 0));
    }
    out
}

/// `r` distinct non-identity strings, uniform over the `4^n - 1` choices.
pub fn random_strings(n: usize, r: usize, seed: u64) -> Result<Vec<PauliString>> {
    let available = if 2 * n >= 64 {
        u64::MAX
    } else {
        (1u64 << (2 * n)) - 1
    };
    if r as u64 > available {
        return Err(QasError::Configuration(format!(
            "cannot draw {r} distinct non-identity strings on {n} qubits"
        )));
    }
    const OPS: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = IndexSet::with_capacity(r);
    while seen.len() < r {
        let ops: Vec<PauliOp> = (0..n).map(|_| OPS[rng.random_range(0..4)]).collect();
        let p = PauliString::from_ops(&ops);
        if !p.is_identity_ops() {
            seen.insert(p);
        }
    }
    Ok(seen.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(h: &PauliSum) -> Vec<(f64, String)> {
        h.terms()
            .iter()
            .map(|(c, p)| (c.re, p.ops_string()))
            .collect()
    }

    #[test]
    fn single_z() {
        let h = ModelSpec::new(Family::SingleZ, 1).build().unwrap();
        assert_eq!(terms(&h), vec![(1.0, "Z".to_string())]);
    }

    #[test]
    fn ising_pair_has_one_bond() {
        let h = ModelSpec::ising(2, 1.0, 1.0).build().unwrap();
        assert_eq!(
            terms(&h),
            vec![(0.5, "XX".into()), (0.5, "ZI".into()), (0.5, "IZ".into())]
        );
    }

    #[test]
    fn ising_ring_and_chain() {
        let ring = ModelSpec::ising(4, 1.0, 0.5).build().unwrap();
        assert_eq!(ring.len(), 8);
        assert!(terms(&ring).contains(&(0.5, "XIIX".into())));
        let chain = ModelSpec::ising(4, 1.0, 0.5)
            .with_boundary(Boundary::Open)
            .build()
            .unwrap();
        assert_eq!(chain.len(), 7);
        assert!(ring.is_hermitian() && chain.is_hermitian());
    }

    #[test]
    fn xxz_terms() {
        let h = ModelSpec::xxz(3, 2.0).build().unwrap();
        assert_eq!(h.len(), 9);
        assert!(terms(&h).contains(&(1.0, "ZIZ".into())));
        assert!(terms(&h).contains(&(0.5, "IYY".into())));
    }

    #[test]
    fn fermion_tunnel() {
        let h = ModelSpec::new(Family::FermionTunnel, 4).build().unwrap();
        assert_eq!(terms(&h), vec![(0.5, "XZZX".into()), (0.5, "YZZY".into())]);
    }

    #[test]
    fn zz_pair() {
        let h = ModelSpec::new(Family::ZzPair, 12).build().unwrap();
        assert_eq!(terms(&h), vec![(1.0, format!("ZZ{}", "I".repeat(10)))]);
    }

    #[test]
    fn random_strings_reproducible_and_distinct() {
        let a = ModelSpec::random_strings(1000, 9, 7).build().unwrap();
        let b = ModelSpec::random_strings(1000, 9, 7).build().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
        let c = ModelSpec::random_strings(1000, 9, 8).build().unwrap();
        assert_ne!(a, c);
        // all 3 non-identity single-qubit strings
        let all = ModelSpec::random_strings(1, 3, 1).build().unwrap();
        assert_eq!(all.len(), 3);
        assert!(ModelSpec::random_strings(1, 4, 1).build().is_err());
    }

    #[test]
    fn missing_parameters() {
        let mut spec = ModelSpec::ising(3, 1.0, 1.0);
        spec.h = None;
        assert!(matches!(spec.build(), Err(QasError::Configuration(_))));
        assert!(ModelSpec::new(Family::Xxz, 3).build().is_err());
        assert!(ModelSpec::new(Family::File, 3).build().is_err());
    }

    #[test]
    fn file_family() {
        let dir = std::env::temp_dir().join(format!("qas-models-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("h.txt");
        std::fs::write(&path, "# test\n1.0 0.0 ZI\n1.0 0.0 IZ\n").unwrap();
        let mut spec = ModelSpec::new(Family::File, 2);
        spec.path = Some(path.clone());
        assert_eq!(spec.build().unwrap().len(), 2);
        spec.n = Some(3);
        assert!(spec.build().is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
