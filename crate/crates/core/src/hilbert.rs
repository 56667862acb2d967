//! Sparse vectors and operators over graph bases.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QnetError, Result};
use crate::graphs::{Graph, Universe};
use crate::names::{corresponds, Name, Renaming};

pub type C64 = Complex64;

/// Amplitudes below this are dropped.
pub const PRUNE: f64 = 1e-14;
/// Default comparison tolerance.
pub const TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateVector {
    amps: HashMap<Graph, C64>,
}

impl StateVector {
    pub fn zero() -> StateVector {
        StateVector::default()
    }

    pub fn basis(g: Graph) -> StateVector {
        let mut v = StateVector::zero();
        v.add_term(g, real(1.0));
        v
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Graph, C64)>) -> StateVector {
        let mut v = StateVector::zero();
        for (g, a) in terms {
            v.add_term(g, a);
        }
        v
    }

    pub fn add_term(&mut self, g: Graph, a: C64) {
        match self.amps.entry(g) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += a;
                if o.get().norm() < PRUNE {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if a.norm() >= PRUNE {
                    v.insert(a);
                }
            }
        }
    }

    pub fn get(&self, g: &Graph) -> C64 {
        self.amps.get(g).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Graph, &C64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn support(&self) -> BTreeSet<Graph> {
        self.amps.keys().cloned().collect()
    }

    pub fn sorted_terms(&self) -> Vec<(Graph, C64)> {
        let mut v: Vec<(Graph, C64)> = self.amps.iter().map(|(g, a)| (g.clone(), *a)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn scale(&self, a: C64) -> StateVector {
        StateVector::from_terms(self.amps.iter().map(|(g, x)| (g.clone(), x * a)))
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (g, a) in &other.amps {
            out.add_term(g.clone(), *a);
        }
        out
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        self.add(&other.scale(real(-1.0)))
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        let (small, big, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (g, a) in &small.amps {
            if let Some(b) = big.amps.get(g) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(real(1.0 / n))
        }
    }

    pub fn map_graphs(&self, f: impl Fn(&Graph) -> Graph) -> StateVector {
        StateVector::from_terms(self.amps.iter().map(|(g, a)| (f(g), *a)))
    }

    /// Largest coefficient difference, with the graph where it occurs.
    pub fn max_diff(&self, other: &StateVector) -> (f64, Option<Graph>) {
        let keys: BTreeSet<&Graph> = self.amps.keys().chain(other.amps.keys()).collect();
        let mut best = (0.0, None);
        for g in keys {
            let d = (self.get(g) - other.get(g)).norm();
            if d > best.0 {
                best = (d, Some(g.clone()));
            }
        }
        best
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_diff(other).0 <= tol
    }
}

/// Anything that maps basis graphs to vectors.
pub trait LinearMap: Sync {
    fn apply_basis(&self, g: &Graph) -> StateVector;

    fn apply(&self, psi: &StateVector) -> StateVector {
        let mut out = StateVector::zero();
        for (g, a) in psi.sorted_terms() {
            for (h, b) in self.apply_basis(&g).sorted_terms() {
                out.add_term(h, a * b);
            }
        }
        out
    }
}

/// A sparse operator stored by columns: `cols[G] = A|G⟩`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorMatrix {
    cols: HashMap<Graph, StateVector>,
}

pub type DensityOperator = OperatorMatrix;

impl OperatorMatrix {
    pub fn zero() -> OperatorMatrix {
        OperatorMatrix::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Graph, Graph, C64)>) -> OperatorMatrix {
        let mut m = OperatorMatrix::zero();
        for (ket, bra, a) in entries {
            m.add_entry(ket, bra, a);
        }
        m
    }

    pub fn identity_on<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> OperatorMatrix {
        OperatorMatrix::from_entries(
            graphs
                .into_iter()
                .map(|g| (g.clone(), g.clone(), real(1.0))),
        )
    }

    /// `|psi⟩⟨phi|`.
    pub fn outer(psi: &StateVector, phi: &StateVector) -> OperatorMatrix {
        let mut m = OperatorMatrix::zero();
        for (h, a) in psi.iter() {
            for (g, b) in phi.iter() {
                m.add_entry(h.clone(), g.clone(), a * b.conj());
            }
        }
        m
    }

    /// Adds `a |ket⟩⟨bra|`.
    pub fn add_entry(&mut self, ket: Graph, bra: Graph, a: C64) {
        let col = self.cols.entry(bra.clone()).or_default();
        col.add_term(ket, a);
        if col.is_empty() {
            self.cols.remove(&bra);
        }
    }

    /// `⟨ket|A|bra⟩`.
    pub fn entry(&self, ket: &Graph, bra: &Graph) -> C64 {
        self.cols.get(bra).map(|c| c.get(ket)).unwrap_or_default()
    }

    pub fn column(&self, bra: &Graph) -> StateVector {
        self.cols.get(bra).cloned().unwrap_or_default()
    }

    /// Entries as `(ket, bra, value)`, sorted by `(bra, ket)`.
    pub fn entries(&self) -> Vec<(Graph, Graph, C64)> {
        let mut out: Vec<(Graph, Graph, C64)> = self
            .cols
            .iter()
            .flat_map(|(g, col)| col.iter().map(move |(h, a)| (h.clone(), g.clone(), *a)))
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    pub fn num_entries(&self) -> usize {
        self.cols.values().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    /// Graphs appearing as a ket or a bra.
    pub fn support(&self) -> BTreeSet<Graph> {
        self.cols
            .iter()
            .flat_map(|(g, col)| std::iter::once(g.clone()).chain(col.support()))
            .collect()
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix::from_entries(self.entries().into_iter().map(|(h, g, a)| (g, h, a.conj())))
    }

    pub fn scale(&self, a: C64) -> OperatorMatrix {
        OperatorMatrix::from_entries(self.entries().into_iter().map(|(h, g, x)| (h, g, x * a)))
    }

    pub fn add(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_entries(self.entries().into_iter().chain(other.entries()))
    }

    pub fn sub(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.add(&other.scale(real(-1.0)))
    }

    /// `self · other`.
    pub fn mul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        let mut m = OperatorMatrix::zero();
        for (k, g, b) in other.entries() {
            if let Some(col) = self.cols.get(&k) {
                for (h, a) in col.iter() {
                    m.add_entry(h.clone(), g.clone(), a * b);
                }
            }
        }
        m
    }

    pub fn full_trace(&self) -> C64 {
        self.cols.iter().map(|(g, col)| col.get(g)).sum()
    }

    /// Largest entrywise difference, with its `(ket, bra)` position.
    pub fn max_diff(&self, other: &OperatorMatrix) -> (f64, Option<(Graph, Graph)>) {
        let d = self.sub(other);
        let mut best = (0.0, None);
        for (h, g, a) in d.entries() {
            if a.norm() > best.0 {
                best = (a.norm(), Some((h, g)));
            }
        }
        best
    }

    pub fn approx_eq(&self, other: &OperatorMatrix, tol: f64) -> bool {
        self.max_diff(other).0 <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let basis: Vec<Graph> = self.support().into_iter().collect();
        let n = basis.len();
        if n == 0 {
            return Vec::new();
        }
        let pos: HashMap<&Graph, usize> = basis.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut dense = DMatrix::<C64>::zeros(n, n);
        for (h, g, a) in self.entries() {
            dense[(pos[&h], pos[&g])] = a;
        }
        let mut ev: Vec<f64> = dense
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }
}

impl LinearMap for OperatorMatrix {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        self.column(g)
    }
}

/// An operator restricted to a universe, indexed by graph position.
#[derive(Clone, Debug, PartialEq)]
pub struct UMatrix {
    n: usize,
    cols: Vec<Vec<(u32, C64)>>,
}

impl UMatrix {
    pub fn zero(n: usize) -> UMatrix {
        UMatrix {
            n,
            cols: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> UMatrix {
        UMatrix {
            n,
            cols: (0..n).map(|i| vec![(i as u32, real(1.0))]).collect(),
        }
    }

    /// Tabulate `op` on every graph of `u`. Fails if some image leaves `u`.
    pub fn materialize(op: &dyn LinearMap, u: &Universe) -> Result<UMatrix> {
        let cols: Result<Vec<Vec<(u32, C64)>>> = u
            .graphs()
            .par_iter()
            .map(|g| {
                let mut col = Vec::new();
                for (h, a) in op.apply_basis(g).iter() {
                    match u.index_of(h) {
                        Some(i) => col.push((i as u32, *a)),
                        None => {
                            return Err(QnetError::SupportEscape {
                                graph: h.to_string(),
                            })
                        }
                    }
                }
                col.sort_by_key(|e| e.0);
                Ok(col)
            })
            .collect();
        Ok(UMatrix {
            n: u.len(),
            cols: cols?,
        })
    }

    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> UMatrix {
        let mut acc: Vec<HashMap<u32, C64>> = vec![HashMap::new(); n];
        for (r, c, a) in entries {
            *acc[c].entry(r as u32).or_default() += a;
        }
        let cols = acc
            .into_iter()
            .map(|m| {
                let mut v: Vec<(u32, C64)> =
                    m.into_iter().filter(|(_, a)| a.norm() >= PRUNE).collect();
                v.sort_by_key(|e| e.0);
                v
            })
            .collect();
        UMatrix { n, cols }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn col(&self, c: usize) -> &[(u32, C64)] {
        &self.cols[c]
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let col = &self.cols[c];
        col.binary_search_by_key(&(r as u32), |e| e.0)
            .map(|i| col[i].1)
            .unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, a)| (r as usize, c, a)))
    }

    pub fn num_entries(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn adjoint(&self) -> UMatrix {
        UMatrix::from_entries(
            self.n,
            self.entries()
                .map(|(r, c, a)| (c, r, a.conj()))
                .collect::<Vec<_>>(),
        )
    }

    /// `self · other`.
    pub fn mul(&self, other: &UMatrix) -> UMatrix {
        assert_eq!(self.n, other.n);
        let cols = other
            .cols
            .par_iter()
            .map(|col| {
                let mut acc: HashMap<u32, C64> = HashMap::new();
                for &(k, b) in col {
                    for &(h, a) in &self.cols[k as usize] {
                        *acc.entry(h).or_default() += a * b;
                    }
                }
                let mut v: Vec<(u32, C64)> =
                    acc.into_iter().filter(|(_, a)| a.norm() >= PRUNE).collect();
                v.sort_by_key(|e| e.0);
                v
            })
            .collect();
        UMatrix { n: self.n, cols }
    }

    pub fn scale(&self, a: C64) -> UMatrix {
        UMatrix::from_entries(
            self.n,
            self.entries()
                .map(|(r, c, x)| (r, c, x * a))
                .collect::<Vec<_>>(),
        )
    }

    pub fn add(&self, other: &UMatrix) -> UMatrix {
        UMatrix::from_entries(
            self.n,
            self.entries().chain(other.entries()).collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, other: &UMatrix) -> UMatrix {
        self.add(&other.scale(real(-1.0)))
    }

    /// Largest entrywise difference and its `(row, col)`.
    pub fn max_diff(&self, other: &UMatrix) -> (f64, Option<(usize, usize)>) {
        let mut best = (0.0, None);
        for (r, c, a) in self.sub(other).entries() {
            if a.norm() > best.0 {
                best = (a.norm(), Some((r, c)));
            }
        }
        best
    }

    pub fn to_operator(&self, u: &Universe) -> OperatorMatrix {
        OperatorMatrix::from_entries(
            self.entries()
                .map(|(r, c, a)| (u.graph(r).clone(), u.graph(c).clone(), a)),
        )
    }
}

/// Witness of an operator mismatch: `⟨ket|A|bra⟩ = lhs` versus `rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub ket: Graph,
    pub bra: Graph,
    pub lhs: C64,
    pub rhs: C64,
}

/// Compare two maps column by column over the universe. Images may leave the
/// universe; they are compared by graph.
pub fn columns_equal_on(
    a: &dyn LinearMap,
    b: &dyn LinearMap,
    u: &Universe,
    tol: f64,
) -> Option<Mismatch> {
    u.graphs().par_iter().find_map_first(|g| {
        let (x, y) = (a.apply_basis(g), b.apply_basis(g));
        let (d, at) = x.max_diff(&y);
        (d > tol).then(|| {
            let h = at.unwrap();
            Mismatch {
                lhs: x.get(&h),
                rhs: y.get(&h),
                ket: h,
                bra: g.clone(),
            }
        })
    })
}

/// Strict comparison: both sides must stay within the universe.
pub fn operator_equal_on(
    a: &dyn LinearMap,
    b: &dyn LinearMap,
    u: &Universe,
    tol: f64,
) -> Result<Option<Mismatch>> {
    let ma = UMatrix::materialize(a, u)?;
    let mb = UMatrix::materialize(b, u)?;
    let (d, at) = ma.max_diff(&mb);
    Ok((d > tol).then(|| {
        let (r, c) = at.unwrap();
        Mismatch {
            ket: u.graph(r).clone(),
            bra: u.graph(c).clone(),
            lhs: ma.get(r, c),
            rhs: mb.get(r, c),
        }
    }))
}

/// `U†U = UU† = I` on the universe.
pub fn is_unitary_on(op: &dyn LinearMap, u: &Universe) -> Result<Option<Mismatch>> {
    let m = UMatrix::materialize(op, u)?;
    Ok(unitary_witness(&m, u))
}

pub fn unitary_witness(m: &UMatrix, u: &Universe) -> Option<Mismatch> {
    let id = UMatrix::identity(m.dim());
    let adj = m.adjoint();
    for p in [adj.mul(m), m.mul(&adj)] {
        let (d, at) = p.max_diff(&id);
        if d > TOL {
            let (r, c) = at.unwrap();
            let expect = if r == c { real(1.0) } else { real(0.0) };
            return Some(Mismatch {
                ket: u.graph(r).clone(),
                bra: u.graph(c).clone(),
                lhs: p.get(r, c),
                rhs: expect,
            });
        }
    }
    None
}

/// First nonzero entry `(H, G)` with `V(G)` and `V(H)` not corresponding.
pub fn is_name_preserving(a: &OperatorMatrix) -> Option<(Graph, Graph)> {
    a.entries()
        .into_iter()
        .find(|(h, g, _)| !corresponds(&g.vertices(), &h.vertices()))
        .map(|(h, g, _)| (h, g))
}

pub fn is_name_preserving_on(op: &dyn LinearMap, u: &Universe) -> Option<(Graph, Graph)> {
    u.graphs().par_iter().find_map_first(|g| {
        let vg = g.vertices();
        op.apply_basis(g)
            .sorted_terms()
            .into_iter()
            .find(|(h, _)| !corresponds(&vg, &h.vertices()))
            .map(|(h, _)| (h, g.clone()))
    })
}

/// A name-indexed operator family `v ↦ A_v`.
pub trait OperatorFamily: Sync {
    fn at(&self, v: &Name) -> Box<dyn LinearMap + '_>;
    fn label(&self) -> String;
}

/// Transpositions of the universe keys, then `extra` random permutations of
/// the keys plus two fresh ones.
pub fn sample_renamings(u: &Universe, extra: usize, seed: u64) -> Vec<Renaming> {
    let keys: Vec<u64> = u.keys().into_iter().collect();
    let mut out = Vec::new();
    for (i, &a) in keys.iter().enumerate() {
        for &b in &keys[i + 1..] {
            out.push(Renaming::swap(a, b));
        }
    }
    let top = keys.last().copied().unwrap_or(0);
    let pool: Vec<u64> = keys.iter().copied().chain([top + 1, top + 2]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let mut img = pool.clone();
        img.shuffle(&mut rng);
        out.push(
            Renaming::from_pairs(pool.iter().copied().zip(img)).expect("shuffle is a permutation"),
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceFailure {
    pub renaming: String,
    pub vertex: Name,
    pub graph: Graph,
    pub detail: String,
}

/// `R A_v |G⟩ = A_{R v} R |G⟩` for sampled renamings `R`, every vertex name
/// `v` of the universe and every `G`.
pub fn is_renaming_invariant(
    fam: &dyn OperatorFamily,
    u: &Universe,
    seed: u64,
) -> Option<InvarianceFailure> {
    let names = u.vertex_names();
    for r in sample_renamings(u, 20, seed) {
        for v in &names {
            let a = fam.at(v);
            let rv = r.apply(v);
            let b = fam.at(&rv);
            let hit = u.graphs().par_iter().find_map_first(|g| {
                let lhs = a.apply_basis(g).map_graphs(|h| h.rename(&r));
                let rhs = b.apply_basis(&g.rename(&r));
                let (d, at) = lhs.max_diff(&rhs);
                (d > TOL).then(|| (g.clone(), at))
            });
            if let Some((g, at)) = hit {
                return Some(InvarianceFailure {
                    renaming: r.to_string(),
                    vertex: v.clone(),
                    graph: g,
                    detail: format!(
                        "coefficients differ at {}",
                        at.map(|h| h.to_string()).unwrap_or_default()
                    ),
                });
            }
        }
    }
    None
}
