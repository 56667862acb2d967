//! Restriction-induced tensors and partial traces, and symbolic operators
//! built from them.

use std::fmt;
use std::sync::Arc;

use crate::graphs::{Graph, Universe};
use crate::hilbert::{LinearMap, OperatorMatrix, StateVector, C64};
use crate::restrict::Restriction;

pub mod gen;
pub mod laws;

pub use laws::{run_law, LawFailure, LawId, LawOptions, LawReport, LawStatus};

/// An operator given by its action on basis graphs, valid on any graph.
pub trait BasisOperator: Send + Sync {
    fn apply_basis(&self, g: &Graph) -> StateVector;
    fn adjoint(&self) -> Operator;
    fn label(&self) -> String;
}

/// Symbolic operators. Identities stay symbolic so that `A ⊗_χ I` can act on
/// graphs outside any finite support.
#[derive(Clone)]
pub enum Operator {
    Identity,
    Zero,
    Matrix(Arc<OperatorMatrix>),
    Basis(Arc<dyn BasisOperator>),
    /// `A ⊗_χ B`: `A` acts on `K_χ`, `B` on `K_χ̄`.
    Tensor {
        a: Box<Operator>,
        b: Box<Operator>,
        chi: Restriction,
    },
    /// `Product([A, B, C]) = A·B·C`; `C` acts first.
    Product(Vec<Operator>),
    Sum(Vec<(C64, Operator)>),
}

impl Operator {
    pub fn matrix(m: OperatorMatrix) -> Operator {
        Operator::Matrix(Arc::new(m))
    }

    pub fn basis(op: impl BasisOperator + 'static) -> Operator {
        Operator::Basis(Arc::new(op))
    }

    pub fn tensor(a: Operator, b: Operator, chi: Restriction) -> Operator {
        Operator::Tensor {
            a: Box::new(a),
            b: Box::new(b),
            chi,
        }
    }

    /// `A ⊗_χ I`.
    pub fn localized(a: Operator, chi: Restriction) -> Operator {
        Operator::tensor(a, Operator::Identity, chi)
    }

    /// `self · other`.
    pub fn then_after(&self, other: &Operator) -> Operator {
        Operator::Product(vec![self.clone(), other.clone()])
    }

    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Identity => Operator::Identity,
            Operator::Zero => Operator::Zero,
            Operator::Matrix(m) => Operator::matrix(m.adjoint()),
            Operator::Basis(b) => b.adjoint(),
            Operator::Tensor { a, b, chi } => {
                Operator::tensor(a.adjoint(), b.adjoint(), chi.clone())
            }
            Operator::Product(ops) => {
                Operator::Product(ops.iter().rev().map(|o| o.adjoint()).collect())
            }
            Operator::Sum(terms) => {
                Operator::Sum(terms.iter().map(|(c, o)| (c.conj(), o.adjoint())).collect())
            }
        }
    }

    pub fn apply_basis(&self, g: &Graph) -> StateVector {
        match self {
            Operator::Identity => StateVector::basis(g.clone()),
            Operator::Zero => StateVector::zero(),
            Operator::Matrix(m) => m.column(g),
            Operator::Basis(b) => b.apply_basis(g),
            Operator::Tensor { a, b, chi } => {
                let (inside, outside) = chi.split(g);
                tensor_states(&a.apply_basis(&inside), &b.apply_basis(&outside), chi)
            }
            Operator::Product(ops) => {
                let mut v = StateVector::basis(g.clone());
                for op in ops.iter().rev() {
                    v = op.apply(&v);
                }
                v
            }
            Operator::Sum(terms) => {
                let mut v = StateVector::zero();
                for (c, op) in terms {
                    v = v.add(&op.apply_basis(g).scale(*c));
                }
                v
            }
        }
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        LinearMap::apply(self, psi)
    }

    /// Tabulate on a set of graphs.
    pub fn to_matrix<'a>(&self, graphs: impl IntoIterator<Item = &'a Graph>) -> OperatorMatrix {
        let mut m = OperatorMatrix::zero();
        for g in graphs {
            for (h, a) in self.apply_basis(g).sorted_terms() {
                m.add_entry(h, g.clone(), a);
            }
        }
        m
    }

    pub fn to_matrix_on(&self, u: &Universe) -> OperatorMatrix {
        self.to_matrix(u.graphs())
    }
}

impl LinearMap for Operator {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        Operator::apply_basis(self, g)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Identity => f.write_str("I"),
            Operator::Zero => f.write_str("0"),
            Operator::Matrix(m) => write!(f, "matrix[{} entries]", m.num_entries()),
            Operator::Basis(b) => f.write_str(&b.label()),
            Operator::Tensor { a, b, chi } => write!(f, "({a} (x)[{chi}] {b})"),
            Operator::Product(ops) => {
                let v: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                write!(f, "{}", v.join("*"))
            }
            Operator::Sum(terms) => {
                let v: Vec<String> = terms.iter().map(|(c, o)| format!("({c})*{o}")).collect();
                write!(f, "{}", v.join(" + "))
            }
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `A ⊗_χ I`, kept with its restriction for reporting.
#[derive(Clone, Debug)]
pub struct LocalizedOperator {
    pub inner: Operator,
    pub chi: Restriction,
}

impl LocalizedOperator {
    pub fn new(inner: Operator, chi: Restriction) -> LocalizedOperator {
        LocalizedOperator { inner, chi }
    }

    pub fn as_operator(&self) -> Operator {
        Operator::localized(self.inner.clone(), self.chi.clone())
    }
}

impl LinearMap for LocalizedOperator {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let (inside, outside) = self.chi.split(g);
        tensor_states(
            &self.inner.apply_basis(&inside),
            &StateVector::basis(outside),
            &self.chi,
        )
    }
}

/// `|h⟩ ⊗_χ |h2⟩`: the unique candidate `h ∪ h2`, if it splits back.
pub fn tensor_basis(h: &Graph, h2: &Graph, chi: &Restriction) -> Option<Graph> {
    let g = h.disjoint_union(h2)?;
    let (a, b) = chi.split(&g);
    (&a == h && &b == h2).then_some(g)
}

pub fn tensor_states(psi: &StateVector, phi: &StateVector, chi: &Restriction) -> StateVector {
    let mut out = StateVector::zero();
    for (h, a) in psi.sorted_terms() {
        for (h2, b) in phi.sorted_terms() {
            if let Some(g) = tensor_basis(&h, &h2, chi) {
                out.add_term(g, a * b);
            }
        }
    }
    out
}

pub fn tensor_densities(
    rho: &OperatorMatrix,
    sigma: &OperatorMatrix,
    chi: &Restriction,
) -> OperatorMatrix {
    let mut out = OperatorMatrix::zero();
    let se = sigma.entries();
    for (k1, b1, a) in rho.entries() {
        for (k2, b2, b) in &se {
            if let (Some(k), Some(br)) = (tensor_basis(&k1, k2, chi), tensor_basis(&b1, b2, chi)) {
                out.add_entry(k, br, a * b);
            }
        }
    }
    out
}

/// `A ⊗_χ B`, symbolic. Pass `Operator::Identity` for `B` to get the
/// localized form.
pub fn tensor_operators(a: Operator, b: Operator, chi: &Restriction) -> Operator {
    Operator::tensor(a, b, chi.clone())
}

/// `ρ_{|χ}`: each `|G⟩⟨H|` goes to `|G_χ⟩⟨H_χ|` when `G_χ̄ = H_χ̄`, else 0.
pub fn partial_trace(rho: &OperatorMatrix, chi: &Restriction) -> OperatorMatrix {
    let mut out = OperatorMatrix::zero();
    for (k, b, a) in rho.entries() {
        let (kc, kr) = chi.split(&k);
        let (bc, br) = chi.split(&b);
        if kr == br {
            out.add_entry(kc, bc, a);
        }
    }
    out
}

/// `((·)_{|χ} ⊗_ζ I)(ρ)`: trace out the `χ̄` part of `G_ζ`, keep `G_ζ̄`.
pub fn partial_trace_tensored(
    rho: &OperatorMatrix,
    chi: &Restriction,
    zeta: &Restriction,
) -> OperatorMatrix {
    let mut out = OperatorMatrix::zero();
    for (k, b, a) in rho.entries() {
        let (kz, kzr) = zeta.split(&k);
        let (bz, bzr) = zeta.split(&b);
        let (kzc, kzcr) = chi.split(&kz);
        let (bzc, bzcr) = chi.split(&bz);
        if kzcr != bzcr {
            continue;
        }
        if let (Some(ket), Some(bra)) = (
            tensor_basis(&kzc, &kzr, zeta),
            tensor_basis(&bzc, &bzr, zeta),
        ) {
            out.add_entry(ket, bra, a);
        }
    }
    out
}

/// First pair of support graphs with nonzero joint amplitude whose tensor
/// vanishes.
pub fn consistency_states(
    psi: &StateVector,
    phi: &StateVector,
    chi: &Restriction,
) -> Option<(Graph, Graph)> {
    for (h, _) in psi.sorted_terms() {
        for (h2, _) in phi.sorted_terms() {
            if tensor_basis(&h, &h2, chi).is_none() {
                return Some((h, h2));
            }
        }
    }
    None
}

/// Like [`consistency_states`], on kets and bras of two densities.
pub fn consistency_densities(
    rho: &OperatorMatrix,
    sigma: &OperatorMatrix,
    chi: &Restriction,
) -> Option<((Graph, Graph), (Graph, Graph))> {
    let se = sigma.entries();
    for (k1, b1, _) in rho.entries() {
        for (k2, b2, _) in &se {
            if tensor_basis(&k1, k2, chi).is_none() || tensor_basis(&b1, b2, chi).is_none() {
                return Some(((k1, b1), (k2.clone(), b2.clone())));
            }
        }
    }
    None
}

/// `⟨H|A|G_χ⟩ ≠ 0` entails `|H⟩ ⊗_χ |G_χ̄⟩ ≠ 0`, for `A` and for `A†`.
/// Returns `(G, H, which)` on failure.
pub fn consistent_preserving(
    a: &dyn LinearMap,
    chi: &Restriction,
    u: &Universe,
) -> crate::Result<Option<(Graph, Graph, &'static str)>> {
    let m = crate::hilbert::UMatrix::materialize(a, u)?.to_operator(u);
    let adj = m.adjoint();
    for g in u.graphs() {
        let (gc, gr) = chi.split(g);
        for (which, op) in [("A", &m), ("A^dagger", &adj)] {
            for (h, _) in op.column(&gc).sorted_terms() {
                if tensor_basis(&h, &gr, chi).is_none() {
                    return Ok(Some((g.clone(), h, which)));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::System;
    use crate::hilbert::{real, TOL};
    use crate::names::Name;

    fn sys(state: &str, v: Name) -> System {
        System::new(state, v)
    }

    #[test]
    fn split_then_tensor_round_trips() {
        let u = Universe::default_small();
        let chis = [
            Restriction::state("0"),
            Restriction::disk(Restriction::zeta(Name::atom(1)), 1, false),
            Restriction::Namewise(vec![Name::atom(2)]),
        ];
        for chi in &chis {
            for g in u.graphs() {
                let (a, b) = chi.split(g);
                assert_eq!(tensor_basis(&a, &b, chi).as_ref(), Some(g));
            }
        }
    }

    #[test]
    fn shared_part_kills_tensor() {
        let m = sys("0", Name::atom(1));
        let g = Graph::new([sys("0", Name::atom(2)), m.clone()]).unwrap();
        let h = Graph::new([m, sys("1", Name::atom(-2))]).unwrap();
        for chi in [
            Restriction::Full,
            Restriction::Empty,
            Restriction::state("0"),
        ] {
            assert!(tensor_basis(&g, &h, &chi).is_none());
        }
    }

    #[test]
    fn trace_boundaries() {
        let a = Graph::new([sys("0", Name::atom(1))]).unwrap();
        let b = Graph::new([sys("1", Name::atom(2))]).unwrap();
        let psi = StateVector::from_terms([(a.clone(), real(0.6)), (b, real(0.8))]);
        let rho = OperatorMatrix::outer(&psi, &psi);
        assert!(partial_trace(&rho, &Restriction::Full).approx_eq(&rho, TOL));
        let t = partial_trace(&rho, &Restriction::Empty);
        assert!((t.entry(&Graph::empty(), &Graph::empty()) - rho.full_trace()).norm() < TOL);
        let full = partial_trace_tensored(&rho, &Restriction::state("0"), &Restriction::Full);
        assert!(full.approx_eq(&partial_trace(&rho, &Restriction::state("0")), TOL));
        let _ = a;
    }

    #[test]
    fn localized_matches_entry_formula() {
        let u = Universe::default_small();
        let chi = Restriction::disk(Restriction::zeta(Name::atom(1)), 1, false);
        let a = Graph::new([sys("0", Name::atom(1))]).unwrap();
        let b = Graph::new([sys("1", Name::atom(1))]).unwrap();
        let inner =
            OperatorMatrix::from_entries([(b.clone(), a.clone(), real(1.0)), (a, b, real(-1.0))]);
        let op = Operator::localized(Operator::matrix(inner.clone()), chi.clone());
        for g in u.graphs() {
            let col = op.apply_basis(g);
            let (gc, gr) = chi.split(g);
            for h in u.graphs() {
                let (hc, hr) = chi.split(h);
                let expect = if hr == gr {
                    inner.entry(&hc, &gc)
                } else {
                    real(0.0)
                };
                assert!((col.get(h) - expect).norm() < TOL, "{h} {g}");
            }
        }
    }
}
