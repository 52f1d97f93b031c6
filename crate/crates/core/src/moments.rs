//! Cumulative K-moment bases.
//!
//! A basis state is `U_{i_k} ... U_{i_1} |psi>` for generator strings `U_i`.
//! Because every generator is a Pauli string, each such product is a single
//! Pauli string up to a phase, so the basis is stored as phase-stripped
//! labels relative to the reference state; label 0 is the identity.

use std::collections::HashSet;

use num_complex::Complex64;

use crate::error::{QasError, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::state::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct MomentBasis {
    generators: Vec<PauliString>,
    order: usize,
    labels: Vec<PauliString>,
    level_sizes: Vec<usize>,
    closed_at: Option<usize>,
}

impl MomentBasis {
    /// Breadth-first expansion to moment order `order`.
    ///
    /// Level `j + 1` consists of `g * l` for each new level-`j` label `l`
    /// (in label order) and each generator `g` (in generator order), with
    /// phases stripped and labels already present skipped. Products of
    /// labels first seen at earlier levels cannot be new, so only the
    /// frontier is expanded. One extra level is probed without being kept
    /// so that closure at exactly `order` is detected.
    pub fn generate(generators: &[PauliString], order: usize) -> Result<Self> {
        let first = generators.first().ok_or_else(|| {
            QasError::Argument("moment basis needs at least one generator".into())
        })?;
        let n = first.num_qubits();
        for g in generators {
            QasError::check_dim(n, g.num_qubits())?;
        }
        let generators: Vec<PauliString> = generators.iter().map(PauliString::stripped).collect();

        let mut labels = vec![PauliString::identity(n)];
        let mut seen: HashSet<PauliString> = labels.iter().cloned().collect();
        let mut level_sizes = vec![1];
        let mut frontier = 0..1;
        let mut closed_at = None;

        for level in 1..=order + 1 {
            let mut fresh = Vec::new();
            for idx in frontier.clone() {
                for g in &generators {
                    let cand = g.mul(&labels[idx])?.stripped();
                    if !seen.contains(&cand) {
                        seen.insert(cand.clone());
                        fresh.push(cand);
                    }
                }
            }
            if fresh.is_empty() {
                closed_at = Some(level - 1);
                break;
            }
            if level > order {
                break;
            }
            let start = labels.len();
            level_sizes.push(fresh.len());
            labels.extend(fresh);
            frontier = start..labels.len();
        }

        Ok(MomentBasis {
            generators,
            order,
            labels,
            level_sizes,
            closed_at,
        })
    }

    /// Basis from the strings of a Pauli sum.
    pub fn from_hamiltonian(h: &PauliSum, order: usize) -> Result<Self> {
        Self::generate(&h.strings(), order)
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn labels(&self) -> &[PauliString] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.labels[0].num_qubits()
    }

    /// Number of labels first reached at each level `0..`.
    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    /// Smallest `K*` with `CS_{K*+1} == CS_{K*}`, if it is `<= order`.
    pub fn closed_at(&self) -> Option<usize> {
        self.closed_at
    }

    /// One label per line in the `IXYZ` alphabet.
    pub fn dump(&self) -> String {
        self.labels.iter().map(|l| l.ops_string() + "\n").collect()
    }
}

/// `label_i |psi>` for every label.
pub fn realize_states(basis: &MomentBasis, psi: &StateVector) -> Result<Vec<StateVector>> {
    QasError::check_dim(basis.num_qubits(), psi.num_qubits())?;
    basis.labels().iter().map(|l| psi.apply_pauli(l)).collect()
}

/// `sum_k beta_k P_k |psi>`, unnormalized.
pub fn apply_pauli_sum(h: &PauliSum, psi: &StateVector) -> Result<StateVector> {
    QasError::check_dim(h.num_qubits(), psi.num_qubits())?;
    let mut out = vec![Complex64::default(); psi.dim()];
    for (beta, p) in h.terms() {
        let v = psi.apply_pauli(p)?;
        for (o, a) in out.iter_mut().zip(v.amplitudes()) {
            *o += beta * a;
        }
    }
    StateVector::from_raw(psi.num_qubits(), out)
}

/// Orthonormal basis of the span of `states` by two passes of modified
/// Gram-Schmidt; directions with relative residual below `drop_tol` are skipped.
pub(crate) fn orthonormal_span(states: &[StateVector], drop_tol: f64) -> Vec<Vec<Complex64>> {
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    for s in states {
        let mut v = s.amplitudes().to_vec();
        let n0 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for u in &q {
                let c: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n > drop_tol * n0 {
            v.iter_mut().for_each(|x| *x /= n);
            q.push(v);
        }
    }
    q
}

/// `1 - ||P gamma_K||^2`, where `gamma_K` is the normalized order-`k`
/// Taylor truncation of `exp(-iHt)|psi>` and `P` projects onto the span of
/// the basis states. Zero means `gamma_K` lies in the span.
pub fn taylor_span_residual(
    h: &PauliSum,
    psi: &StateVector,
    basis: &MomentBasis,
    t: f64,
    k: usize,
) -> Result<f64> {
    if k > basis.order() {
        return Err(QasError::Argument(format!(
            "Taylor order {k} exceeds basis order {}",
            basis.order()
        )));
    }
    if !t.is_finite() {
        return Err(QasError::Argument("time must be finite".into()));
    }
    QasError::check_dim(h.num_qubits(), psi.num_qubits())?;

    let mut term = psi.clone();
    let mut gamma = psi.amplitudes().to_vec();
    for p in 1..=k {
        let next = apply_pauli_sum(h, &term)?;
        let scale = Complex64::new(0.0, -t) / p as f64;
        let amps: Vec<Complex64> = next.amplitudes().iter().map(|a| a * scale).collect();
        gamma.iter_mut().zip(&amps).for_each(|(g, a)| *g += a);
        term = StateVector::from_raw(psi.num_qubits(), amps)?;
    }
    let gamma = StateVector::normalized(psi.num_qubits(), gamma)?;

    let span = orthonormal_span(&realize_states(basis, psi)?, 1e-10);
    let captured: f64 = span
        .iter()
        .map(|u| {
            u.iter()
                .zip(gamma.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    Ok(1.0 - captured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliOp;
    use crate::state::ProductState;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_z_closes_at_first_order() {
        let b = MomentBasis::generate(&[ps("Z")], 1).unwrap();
        assert_eq!(b.labels(), &[ps("I"), ps("Z")]);
        assert_eq!(b.closed_at(), Some(1));
        let b5 = MomentBasis::generate(&[ps("Z")], 5).unwrap();
        assert_eq!(b5.labels(), b.labels());
        assert_eq!(b5.closed_at(), Some(1));
    }

    #[test]
    fn order_zero_is_reference_only() {
        let b = MomentBasis::generate(&[ps("XX"), ps("ZI")], 0).unwrap();
        assert_eq!(b.labels(), &[ps("II")]);
        assert_eq!(b.closed_at(), None);
        let closed = MomentBasis::generate(&[ps("II")], 0).unwrap();
        assert_eq!(closed.closed_at(), Some(0));
    }

    #[test]
    fn empty_generators_rejected() {
        assert!(matches!(
            MomentBasis::generate(&[], 2),
            Err(QasError::Argument(_))
        ));
    }

    #[test]
    fn tunnelling_pair_closes_at_two() {
        let b = MomentBasis::generate(&[ps("XZZX"), ps("YZZY")], 3).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.closed_at(), Some(2));
        assert_eq!(b.labels()[3], ps("ZIIZ"));
    }

    #[test]
    fn dump_lists_labels() {
        let b = MomentBasis::generate(&[ps("XI"), ps("IZ")], 2).unwrap();
        assert_eq!(b.dump(), "II\nXI\nIZ\nXZ\n");
    }

    #[test]
    fn realize_single_qubit() {
        let plus = ProductState::plus(1).unwrap().to_state_vector().unwrap();
        let b = MomentBasis::generate(&[ps("Z")], 0).unwrap();
        assert_eq!(realize_states(&b, &plus).unwrap(), vec![plus.clone()]);
        let b = MomentBasis::generate(&[ps("Z")], 1).unwrap();
        let s = realize_states(&b, &plus).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s[1].amplitudes()[1].re, -h, epsilon = 1e-15);
        let zero = StateVector::zero(1).unwrap();
        let b = MomentBasis::generate(&[ps("X")], 1).unwrap();
        let s = realize_states(&b, &zero).unwrap();
        assert_eq!(s[1].amplitudes()[1], Complex64::new(1.0, 0.0));
        let two = StateVector::zero(2).unwrap();
        assert!(realize_states(&b, &two).is_err());
    }

    #[test]
    fn taylor_residual_examples() {
        let plus = ProductState::plus(1).unwrap().to_state_vector().unwrap();
        let h = PauliSum::parse("1 0 Z").unwrap();
        let b = MomentBasis::from_hamiltonian(&h, 1).unwrap();
        assert_abs_diff_eq!(
            taylor_span_residual(&h, &plus, &b, 0.0, 1).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            taylor_span_residual(&h, &plus, &b, 0.5, 1).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert!(taylor_span_residual(&h, &plus, &b, 0.5, 2).is_err());
    }

    #[test]
    fn taylor_residual_positive_outside_span() {
        // gamma_2 needs second-moment labels; a first-order basis misses it.
        let psi = crate::state::build_hardware_efficient_state(&crate::state::CircuitSpec::random(
            3, 6, 2,
        ))
        .unwrap();
        let h = PauliSum::parse("1 0 XXI\n1 0 IXX\n0.7 0 ZII\n0.7 0 IZI\n0.7 0 IIZ").unwrap();
        let b2 = MomentBasis::from_hamiltonian(&h, 2).unwrap();
        let b1 = MomentBasis::from_hamiltonian(&h, 1).unwrap();
        let r = taylor_span_residual(&h, &psi, &b1, 0.8, 1).unwrap();
        assert!(r.abs() < 1e-12);
        assert!(taylor_span_residual(&h, &psi, &b2, 0.8, 2).unwrap().abs() < 1e-12);
        // the first-order span does not contain the second-order truncation
        let mut b1_as_2 = b1.clone();
        b1_as_2.order = 2;
        assert!(taylor_span_residual(&h, &psi, &b1_as_2, 0.8, 2).unwrap() > 1e-6);
    }

    /// All products `U_{i_j} ... U_{i_1}` for `j <= k`, by direct enumeration.
    fn brute_force_labels(gens: &[PauliString], k: usize) -> HashSet<PauliString> {
        let n = gens[0].num_qubits();
        let mut out = HashSet::new();
        let mut level = vec![PauliString::identity(n)];
        out.insert(PauliString::identity(n));
        for _ in 0..k {
            let mut next = Vec::new();
            for s in &level {
                for g in gens {
                    let p = g.mul(s).unwrap();
                    out.insert(p.stripped());
                    next.push(p);
                }
            }
            level = next;
        }
        out
    }

    fn arb_gens() -> impl Strategy<Value = Vec<PauliString>> {
        (1usize..4).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0usize..4, n), 1..5).prop_map(move |v| {
                v.into_iter()
                    .map(|ops| {
                        PauliString::from_ops(
                            &ops.into_iter()
                                .map(|c| [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z][c])
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force_enumeration(gens in arb_gens(), k in 0usize..3) {
            let b = MomentBasis::generate(&gens, k).unwrap();
            let got: HashSet<PauliString> = b.labels().iter().cloned().collect();
            prop_assert_eq!(got.len(), b.len());
            prop_assert_eq!(got, brute_force_labels(&gens, k));
        }

        #[test]
        fn levels_are_prefixes(gens in arb_gens(), k in 0usize..4) {
            let a = MomentBasis::generate(&gens, k).unwrap();
            let b = MomentBasis::generate(&gens, k + 1).unwrap();
            prop_assert_eq!(&b.labels()[..a.len()], a.labels());
        }

        #[test]
        fn cardinality_bound(gens in arb_gens(), k in 0usize..5) {
            let b = MomentBasis::generate(&gens, k).unwrap();
            let r = gens.len() as u32;
            let geometric: usize = (0..=k as u32).map(|j| (gens.len()).pow(j)).sum();
            prop_assert!(b.len() <= geometric.min(1usize << r));
        }

        #[test]
        fn closure_is_sound(gens in arb_gens()) {
            let b = MomentBasis::generate(&gens, 10).unwrap();
            let k = b.closed_at().expect("Pauli generators always close");
            for l in b.labels() {
                for g in b.generators() {
                    let p = g.mul(l).unwrap();
                    prop_assert!(b.labels().iter().any(|x| x.span_equivalent(&p)));
                }
            }
            let again = MomentBasis::generate(&gens, k + 3).unwrap();
            prop_assert_eq!(again.labels(), b.labels());
        }
    }
}
