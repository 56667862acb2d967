//! Particle dynamics on named networks and the block decompositions of
//! causal unitaries into commuting local gates.
//!
//! States: `e` empty node, `R`/`L` right/left mover, `LR` both, `D` a
//! splittable wall. Ancilla universes prefix every state with a bit, so
//! `0R` is a right mover with ancilla bit 0.

use std::f64::consts::PI;

use serde::Serialize;

use crate::checks::{causal_witness, is_strictly_local, CausalitySpec, CheckReport, CheckStatus};
use crate::error::{QnetError, Result};
use crate::graphs::{enumerate_pool, Graph, System, Universe, DEFAULT_UNIVERSE_CAP};
use crate::hilbert::{
    c, is_renaming_invariant, real, unitary_witness, LinearMap, OperatorFamily, OperatorMatrix,
    StateVector, UMatrix, C64, TOL,
};
use crate::names::{Dir, Key, Name, Renaming, Suffix, MAX_SUFFIX_LEN};
use crate::restrict::{name_classes, Predicate, Restriction, SplitTable};
use crate::tensor_trace::{BasisOperator, Operator};

pub const EMPTY: &str = "e";
pub const RIGHT: &str = "R";
pub const LEFT: &str = "L";
pub const BOTH: &str = "LR";
pub const WALL: &str = "D";

/// States used on chains when the decomposition has to stay small.
pub const MOVERS: [&str; 4] = [EMPTY, RIGHT, LEFT, BOTH];
pub const ALL_STATES: [&str; 5] = [EMPTY, RIGHT, LEFT, BOTH, WALL];

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DynamicsParams {
    pub theta: f64,
    pub phi: f64,
    pub n: usize,
    pub ancilla: bool,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            theta: PI / 5.0,
            phi: PI / 3.0,
            n: 3,
            ancilla: false,
        }
    }
}

fn movers(state: &str) -> Option<(bool, bool)> {
    match state {
        EMPTY => Some((false, false)),
        RIGHT => Some((true, false)),
        LEFT => Some((false, true)),
        BOTH => Some((true, true)),
        _ => None,
    }
}

fn mover_state(r: bool, l: bool) -> &'static str {
    match (r, l) {
        (false, false) => EMPTY,
        (true, false) => RIGHT,
        (false, true) => LEFT,
        (true, true) => BOTH,
    }
}

fn with_state(s: &System, state: &str) -> System {
    System::new(state, s.vertex.clone())
}

/// Every system replaced independently by a superposition of systems.
fn expand(g: &Graph, choices: impl Fn(&System) -> Vec<(Vec<System>, C64)>) -> StateVector {
    let mut partial: Vec<(Vec<System>, C64)> = vec![(Vec::new(), real(1.0))];
    for s in g.systems() {
        let opts = choices(s);
        let mut next = Vec::with_capacity(partial.len() * opts.len());
        for (acc, a) in &partial {
            for (add, b) in &opts {
                let mut v = acc.clone();
                v.extend(add.iter().cloned());
                next.push((v, a * b));
            }
        }
        partial = next;
    }
    StateVector::from_terms(partial.into_iter().map(|(v, a)| (Graph::from_valid(v), a)))
}

/// Unique successor and predecessor of each system along the edges.
fn neighbours(g: &Graph) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let n = g.len();
    let (mut out, mut inc) = (vec![Vec::new(); n], vec![Vec::new(); n]);
    for (i, j) in g.edge_indices() {
        out[i].push(j);
        inc[j].push(i);
    }
    let one = |v: &Vec<usize>| if v.len() == 1 { Some(v[0]) } else { None };
    (out.iter().map(one).collect(), inc.iter().map(one).collect())
}

fn is_chain_graph(g: &Graph) -> bool {
    let n = g.len();
    let (mut out, mut inc) = (vec![0; n], vec![0; n]);
    for (i, j) in g.edge_indices() {
        out[i] += 1;
        inc[j] += 1;
    }
    out.iter().chain(&inc).all(|&d| d <= 1)
}

/// `M`: movers hop along edges and bounce at borders and walls.
#[derive(Clone, Copy, Debug)]
pub struct Step;

impl BasisOperator for Step {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let sys = g.systems();
        let (succ, pred) = neighbours(g);
        let live: Vec<Option<(bool, bool)>> =
            sys.iter().map(|s| movers(s.state.as_str())).collect();
        let n = sys.len();
        let (mut r_in, mut l_in) = (vec![false; n], vec![false; n]);
        for i in 0..n {
            let Some((r, l)) = live[i] else { continue };
            if r {
                match succ[i] {
                    Some(j) if live[j].is_some() => r_in[j] = true,
                    _ => l_in[i] = true,
                }
            }
            if l {
                match pred[i] {
                    Some(j) if live[j].is_some() => l_in[j] = true,
                    _ => r_in[i] = true,
                }
            }
        }
        let out = sys.iter().enumerate().map(|(i, s)| match live[i] {
            Some(_) => with_state(s, mover_state(r_in[i], l_in[i])),
            None => s.clone(),
        });
        StateVector::basis(Graph::from_valid(out))
    }

    fn adjoint(&self) -> Operator {
        let p = Operator::basis(Mirror);
        Operator::Product(vec![p.clone(), Operator::basis(Step), p])
    }

    fn label(&self) -> String {
        "M".into()
    }
}

/// Swaps right and left movers.
#[derive(Clone, Copy, Debug)]
pub struct Mirror;

impl BasisOperator for Mirror {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let out = g.systems().iter().map(|s| match movers(s.state.as_str()) {
            Some((r, l)) => with_state(s, mover_state(l, r)),
            None => s.clone(),
        });
        StateVector::basis(Graph::from_valid(out))
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(Mirror)
    }

    fn label(&self) -> String {
        "P".into()
    }
}

/// `C(θ)`: a rotation between the two mover directions at every node.
#[derive(Clone, Copy, Debug)]
pub struct Coin {
    pub theta: f64,
}

impl BasisOperator for Coin {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let (cs, sn) = (self.theta.cos(), self.theta.sin());
        expand(g, |s| match s.state.as_str() {
            RIGHT => vec![
                (vec![s.clone()], real(cs)),
                (vec![with_state(s, LEFT)], real(sn)),
            ],
            LEFT => vec![
                (vec![s.clone()], real(cs)),
                (vec![with_state(s, RIGHT)], real(-sn)),
            ],
            _ => vec![(vec![s.clone()], real(1.0))],
        })
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(Coin { theta: -self.theta })
    }

    fn label(&self) -> String {
        format!("C(theta={})", self.theta)
    }
}

/// One merge/split site of a graph.
enum Site {
    /// `D.w` with `w` a leaf.
    Merged(usize),
    /// `R.(w.l)` and `L.(w.r)`.
    Split(usize, usize),
}

fn leaf_of(n: &Name) -> Option<(Key, Suffix)> {
    if !n.is_leaf() {
        return None;
    }
    let r = n.leaves()[0];
    Some((r.key, r.suffix))
}

fn sites(g: &Graph) -> Vec<Site> {
    let sys = g.systems();
    let mut out = Vec::new();
    for (i, s) in sys.iter().enumerate() {
        let Some((k, t)) = leaf_of(&s.vertex) else {
            continue;
        };
        if s.state.as_str() == WALL && t.len() < MAX_SUFFIX_LEN {
            out.push(Site::Merged(i));
        }
        if s.state.as_str() == RIGHT && t.last() == Some(Dir::L) {
            let twin = Name::leaf(k, t.parent().expect("nonempty").push(Dir::R));
            if let Some(j) = sys
                .iter()
                .position(|x| x.vertex == twin && x.state.as_str() == LEFT)
            {
                out.push(Site::Split(i, j));
            }
        }
    }
    out
}

fn split_pair(s: &System) -> Vec<System> {
    vec![
        System::new(RIGHT, s.vertex.descend(Suffix::from_dirs(&[Dir::L]))),
        System::new(LEFT, s.vertex.descend(Suffix::from_dirs(&[Dir::R]))),
    ]
}

fn merged(s: &System) -> System {
    let (k, t) = leaf_of(&s.vertex).expect("leaf");
    System::new(WALL, Name::leaf(k, t.parent().expect("child")))
}

/// Rotation by `phi` on every site; `phi = π/2` with signs dropped is `H`.
fn merge_split(g: &Graph, cs: f64, sn_split: f64, sn_merge: f64) -> StateVector {
    let sys = g.systems();
    let found = sites(g);
    let mut used = vec![false; sys.len()];
    let mut partial: Vec<(Vec<System>, C64)> = vec![(Vec::new(), real(1.0))];
    let push = |opts: Vec<(Vec<System>, C64)>, partial: &mut Vec<(Vec<System>, C64)>| {
        let mut next = Vec::new();
        for (acc, a) in partial.iter() {
            for (add, b) in &opts {
                if b.norm() == 0.0 {
                    continue;
                }
                let mut v = acc.clone();
                v.extend(add.iter().cloned());
                next.push((v, a * b));
            }
        }
        *partial = next;
    };
    for site in &found {
        match *site {
            Site::Merged(i) => {
                used[i] = true;
                push(
                    vec![
                        (vec![sys[i].clone()], real(cs)),
                        (split_pair(&sys[i]), real(sn_split)),
                    ],
                    &mut partial,
                );
            }
            Site::Split(i, j) => {
                used[i] = true;
                used[j] = true;
                push(
                    vec![
                        (vec![sys[i].clone(), sys[j].clone()], real(cs)),
                        (vec![merged(&sys[i])], real(sn_merge)),
                    ],
                    &mut partial,
                );
            }
        }
    }
    let rest: Vec<System> = sys
        .iter()
        .enumerate()
        .filter(|(i, _)| !used[*i])
        .map(|(_, s)| s.clone())
        .collect();
    StateVector::from_terms(partial.into_iter().map(|(mut v, a)| {
        v.extend(rest.iter().cloned());
        (Graph::from_valid(v), a)
    }))
}

/// `H`: synchronous merge of sibling mover pairs and split of leaf walls.
#[derive(Clone, Copy, Debug)]
pub struct MergeSplit;

impl BasisOperator for MergeSplit {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        merge_split(g, 0.0, 1.0, 1.0)
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(MergeSplit)
    }

    fn label(&self) -> String {
        "H".into()
    }
}

/// `Hq(φ)`: each site rotates between its merged and split forms.
#[derive(Clone, Copy, Debug)]
pub struct QuantumMergeSplit {
    pub phi: f64,
}

impl BasisOperator for QuantumMergeSplit {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        merge_split(g, self.phi.cos(), self.phi.sin(), -self.phi.sin())
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(QuantumMergeSplit { phi: -self.phi })
    }

    fn label(&self) -> String {
        format!("Hq(phi={})", self.phi)
    }
}

fn split_bit(state: &str) -> Option<(char, &str)> {
    let mut it = state.chars();
    match it.next() {
        Some(b @ ('0' | '1')) => Some((b, it.as_str())),
        _ => None,
    }
}

/// `τ`: flips the ancilla bit of every system.
#[derive(Clone, Copy, Debug)]
pub struct Toggle;

impl BasisOperator for Toggle {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let out = g
            .systems()
            .iter()
            .map(|s| match split_bit(s.state.as_str()) {
                Some((b, rest)) => {
                    with_state(s, &format!("{}{rest}", if b == '0' { '1' } else { '0' }))
                }
                None => s.clone(),
            });
        StateVector::basis(Graph::from_valid(out))
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(Toggle)
    }

    fn label(&self) -> String {
        "tau".into()
    }
}

/// `τ_v = τ ⊗_{ζ_v} I`.
pub fn toggle_tau(v: &Name) -> Operator {
    Operator::localized(Operator::basis(Toggle), Restriction::zeta(v.clone()))
}

/// Runs a plain operator on graphs whose states all carry the bit `0`.
#[derive(Clone, Debug)]
pub struct OnBitZero(pub Operator);

impl BasisOperator for OnBitZero {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let stripped =
            Graph::from_valid(
                g.systems()
                    .iter()
                    .map(|s| match split_bit(s.state.as_str()) {
                        Some(('0', rest)) => with_state(s, rest),
                        _ => s.clone(),
                    }),
            );
        self.0.apply_basis(&stripped).map_graphs(|h| {
            Graph::from_valid(
                h.systems()
                    .iter()
                    .map(|s| with_state(s, &format!("0{}", s.state))),
            )
        })
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(OnBitZero(self.0.adjoint()))
    }

    fn label(&self) -> String {
        format!("0:{}", self.0)
    }
}

/// Relabels keys of every vertex.
#[derive(Clone, Debug)]
pub struct Rename(pub Renaming);

impl BasisOperator for Rename {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        StateVector::basis(g.rename(&self.0))
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(Rename(self.0.inverse()))
    }

    fn label(&self) -> String {
        format!("rename{}", self.0)
    }
}

pub fn step_m() -> Operator {
    Operator::basis(Step)
}

pub fn coin_c(theta: f64) -> Operator {
    Operator::basis(Coin { theta })
}

pub fn merge_split_h() -> Operator {
    Operator::basis(MergeSplit)
}

pub fn quantum_merge_split_hq(phi: f64) -> Operator {
    Operator::basis(QuantumMergeSplit { phi })
}

/// The chain names `(k1|-k2), (k2|-k3), ..., km`.
pub fn chain_names(keys: &[u64]) -> Vec<Name> {
    let m = keys.len();
    (0..m)
        .map(|i| {
            if i + 1 < m {
                Name::join(
                    Name::atom(keys[i] as i64),
                    Name::atom(-(keys[i + 1] as i64)),
                )
            } else {
                Name::atom(keys[i] as i64)
            }
        })
        .collect()
}

/// All subgraphs of the `n`-chain over keys `1..=n` with the given states.
pub fn chain_universe(n: usize, states: &[&str]) -> Result<Universe> {
    let keys: Vec<u64> = (1..=n as u64).collect();
    let pool = pool_of(&chain_names(&keys), states);
    Universe::from_pool(format!("chain(n={n},states={})", states.join("|")), &pool)
}

fn pool_of(names: &[Name], states: &[&str]) -> Vec<System> {
    names
        .iter()
        .flat_map(|v| states.iter().map(move |s| System::new(*s, v.clone())))
        .collect()
}

/// The universe over the same systems with every state prefixed by a bit.
pub fn ancilla_universe(u: &Universe) -> Result<Universe> {
    let mut pool: Vec<System> = u
        .graphs()
        .iter()
        .flat_map(|g| g.systems().iter().cloned())
        .collect();
    pool.sort_by_key(|s| s.to_string());
    pool.dedup();
    let pool: Vec<System> = pool
        .iter()
        .flat_map(|s| ["0", "1"].map(|b| with_state(s, &format!("{b}{}", s.state))))
        .collect();
    let max = u.graphs().iter().map(|g| g.len()).max().unwrap_or(0);
    Ok(Universe::new(
        format!("ancilla({})", u.label()),
        enumerate_pool(&pool, Some(max), DEFAULT_UNIVERSE_CAP)?,
    ))
}

/// Every name obtained by replacing each key `k` by `k` or `k + 1`.
fn key_versions(n: &Name) -> Vec<Name> {
    let keys: Vec<u64> = n.keys().into_iter().collect();
    (0..1u64 << keys.len())
        .map(|mask| {
            let pairs = keys
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .flat_map(|(_, &k)| [(k, k + 1), (k + 1, k)]);
            n.rename(&Renaming::from_pairs(pairs).expect("disjoint swaps"))
        })
        .collect()
}

/// Even-keyed chain `(2|-4), (4|-6), ..., 2n` and its universe of key
/// versions, in which any key `2x` may appear as `2x + 1`.
pub fn versioned_chain(n: usize, states: &[&str]) -> Result<(Universe, Universe)> {
    let keys: Vec<u64> = (1..=n as u64).map(|k| 2 * k).collect();
    let names = chain_names(&keys);
    let plain = Universe::from_pool(format!("chain(n={n},even)"), &pool_of(&names, states))?;
    let mut all: Vec<Name> = names.iter().flat_map(key_versions).collect();
    all.sort();
    all.dedup();
    let versioned = Universe::from_pool(
        format!("versions(chain(n={n},even))"),
        &pool_of(&all, states),
    )?;
    Ok((plain, versioned))
}

/// `M` tabulated on a chain universe.
pub fn particle_step_m(u: &Universe) -> Result<OperatorMatrix> {
    if let Some(g) = u.graphs().iter().find(|g| !is_chain_graph(g)) {
        return Err(QnetError::UniverseMismatch(format!("{g} is not a chain")));
    }
    Ok(step_m().to_matrix_on(u))
}

#[derive(Serialize, Clone, Debug)]
pub struct DecompositionResult {
    pub variant: String,
    pub universe: String,
    pub dimension: usize,
    pub operator: String,
    pub taus: Vec<String>,
    pub gates: Vec<String>,
    pub residual: f64,
    pub max_commutator_k: f64,
    pub max_commutator_tau: f64,
    pub certificates: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub renaming_invariant: Option<bool>,
    pub note: String,
    #[serde(skip)]
    pub tau_matrices: Vec<UMatrix>,
    #[serde(skip)]
    pub k_matrices: Vec<UMatrix>,
}

impl DecompositionResult {
    pub fn passed(&self, tol: f64) -> bool {
        self.residual <= tol
            && self.max_commutator_k <= 1e-12
            && self.max_commutator_tau <= 1e-12
            && self.certificates.iter().all(|c| c.passed())
    }
}

fn max_commutator(ms: &[UMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in ms.iter().enumerate() {
        for b in &ms[i + 1..] {
            worst = worst.max(a.mul(b).max_diff(&b.mul(a)).0);
        }
    }
    worst
}

fn product(ms: &[UMatrix], n: usize) -> UMatrix {
    ms.iter().fold(UMatrix::identity(n), |acc, m| m.mul(&acc))
}

/// `max |(∏τ)(∏K)|G⟩ − U′|G⟩|` over the basis graphs accepted by `keep`.
fn residual(
    taus: &[UMatrix],
    ks: &[UMatrix],
    target: &UMatrix,
    u: &Universe,
    keep: impl Fn(&Graph) -> bool,
) -> f64 {
    let n = u.len();
    let lhs = product(taus, n).mul(&product(ks, n));
    let mut worst: f64 = 0.0;
    for (i, g) in u.graphs().iter().enumerate() {
        if !keep(g) {
            continue;
        }
        let mut diff: std::collections::HashMap<u32, C64> = std::collections::HashMap::new();
        for &(r, a) in lhs.col(i) {
            *diff.entry(r).or_default() += a;
        }
        for &(r, a) in target.col(i) {
            *diff.entry(r).or_default() -= a;
        }
        worst = diff.values().fold(worst, |w, d| w.max(d.norm()));
    }
    worst
}

struct Constant<'a>(&'a Operator);

impl OperatorFamily for Constant<'_> {
    fn at(&self, _v: &Name) -> Box<dyn LinearMap + '_> {
        Box::new(self.0.clone())
    }

    fn label(&self) -> String {
        self.0.to_string()
    }
}

struct Gates {
    ext: Operator,
    local: fn(&Name) -> Operator,
}

impl OperatorFamily for Gates {
    fn at(&self, v: &Name) -> Box<dyn LinearMap + '_> {
        Box::new(Operator::Product(vec![
            self.ext.adjoint(),
            (self.local)(v),
            self.ext.clone(),
        ]))
    }

    fn label(&self) -> String {
        "K".into()
    }
}

fn precondition_unitary_np(m: &UMatrix, u: &Universe, np: bool) -> Result<()> {
    if let Some(w) = unitary_witness(m, u) {
        return Err(QnetError::precondition(
            "unitarity",
            format!("at ({}, {})", w.ket, w.bra),
        ));
    }
    if np {
        let classes = name_classes(u);
        if let Some((r, c, _)) = m.entries().find(|(r, c, _)| classes[*r] != classes[*c]) {
            return Err(QnetError::precondition(
                "np",
                format!("entry ({}, {}) changes the names", u.graph(r), u.graph(c)),
            ));
        }
    }
    Ok(())
}

/// Decomposition with one ancilla bit per system. `u` is a plain universe,
/// `cover` lists its vertex names, and `chi_of(v)` is the cause region of
/// the output at `v`.
pub fn block_decompose(
    op: &Operator,
    u: &Universe,
    cover: &[Name],
    chi_of: &dyn Fn(&Name) -> Restriction,
    seed: u64,
) -> Result<DecompositionResult> {
    if let Some(v) = u.vertex_names().into_iter().find(|v| !cover.contains(v)) {
        return Err(QnetError::precondition(
            "cover-incomplete",
            format!("{v} is not covered"),
        ));
    }
    let m = UMatrix::materialize(op, u)
        .map_err(|e| QnetError::precondition("unitarity", e.to_string()))?;
    precondition_unitary_np(&m, u, true)?;
    for v in cover {
        let spec = CausalitySpec::new(chi_of(v), Restriction::zeta(v.clone()), false);
        if let Some(w) = causal_witness(&m, &spec, u)? {
            return Err(QnetError::precondition(
                "causality",
                format!("at {v}: G = {}, H = {}: {}", w.g, w.h, w.detail),
            ));
        }
    }

    let up = ancilla_universe(u)?;
    let mu = Restriction::bit(false);
    let not_mu = Restriction::Pointwise(Predicate::Not(Box::new(Predicate::Bit(false))));
    let ext = Operator::localized(Operator::basis(OnBitZero(op.clone())), mu.clone());
    let em = UMatrix::materialize(&ext, &up)?;
    let ed = em.adjoint();
    let mut taus = Vec::new();
    let mut ks = Vec::new();
    let mut certificates = Vec::new();
    for v in cover {
        let zeta = Restriction::zeta(v.clone());
        let tau = toggle_tau(v);
        let tm = UMatrix::materialize(&tau, &up)?;
        let k = ed.mul(&tm).mul(&em);
        let xi = Restriction::union(
            Restriction::compose(mu.clone(), chi_of(v)),
            Restriction::compose(not_mu.clone(), zeta.clone()),
        );
        let mut rep = is_strictly_local(&k.to_operator(&up), &xi, &up)?;
        rep.check = format!("K[{v}] strictly local on {xi}");
        certificates.push(rep);
        let mut rep = is_strictly_local(&tm.to_operator(&up), &zeta, &up)?;
        rep.check = format!("tau[{v}] strictly local on {zeta}");
        certificates.push(rep);
        taus.push(tm);
        ks.push(k);
    }
    let res = residual(&taus, &ks, &em, &up, |g| &mu.apply(g) == g);
    let invariant = is_renaming_invariant(&Constant(op), u, seed).is_none();
    let renaming_invariant = invariant.then(|| {
        let fam = Gates {
            ext: ext.clone(),
            local: toggle_tau,
        };
        is_renaming_invariant(&fam, &up, seed).is_none()
    });
    Ok(DecompositionResult {
        variant: "ancilla".into(),
        universe: up.label().to_string(),
        dimension: up.len(),
        operator: op.to_string(),
        taus: cover.iter().map(|v| format!("tau[{v}]")).collect(),
        gates: cover.iter().map(|v| format!("K[{v}]")).collect(),
        residual: res,
        max_commutator_k: max_commutator(&ks),
        max_commutator_tau: max_commutator(&taus),
        certificates,
        renaming_invariant,
        note: "representative dynamics".into(),
        tau_matrices: taus,
        k_matrices: ks,
    })
}

/// Systems whose names share a signed key with `v`. On a chain these are
/// `v` and its two neighbours, selected whether or not `v` is present, so
/// the identity is causal for it in every sector (unlike a disk).
pub fn name_neighbourhood(v: &Name) -> Restriction {
    Restriction::Namewise(vec![v.clone()])
        .pointwise_complement()
        .expect("namewise is pointwise")
}

/// Systems overlapping any of `2x`, `2x+1` or their negations.
pub fn zeta_key_pair(x: u64) -> Restriction {
    let sel = |k: i64| Restriction::zeta_overlap(Name::atom(k));
    let (a, b) = ((2 * x) as i64, (2 * x + 1) as i64);
    Restriction::union(
        Restriction::union(sel(a), sel(-a)),
        Restriction::union(sel(b), sel(-b)),
    )
}

/// `ζ_x` together with its chain neighbours `ζ_{x-1}` and `ζ_{x+1}`.
pub fn key_pair_neighbourhood(x: u64) -> Restriction {
    let r = Restriction::union(zeta_key_pair(x), zeta_key_pair(x + 1));
    if x > 1 {
        Restriction::union(r, zeta_key_pair(x - 1))
    } else {
        r
    }
}

/// Decomposition without ancilla: the toggles rename `2x ↔ 2x+1`. `plain`
/// holds the even-keyed graphs and `versioned` every key version of them.
pub fn block_decompose_no_ancilla(
    op: &Operator,
    plain: &Universe,
    versioned: &Universe,
    chi_of: &dyn Fn(u64) -> Restriction,
    seed: u64,
) -> Result<DecompositionResult> {
    let keys = plain.keys();
    if let Some(k) = keys.iter().find(|k| *k % 2 == 1) {
        return Err(QnetError::precondition(
            "key-format",
            format!("key {k} is odd"),
        ));
    }
    let closed = versioned.graphs().iter().all(|g| {
        keys.iter()
            .all(|&k| versioned.contains(&g.rename(&Renaming::swap(k, k + 1))))
    });
    if !closed || !plain.graphs().iter().all(|g| versioned.contains(g)) {
        return Err(QnetError::precondition(
            "key-format",
            "versioned universe is not closed under the toggles",
        ));
    }
    if let Some(f) = is_renaming_invariant(&Constant(op), plain, seed) {
        return Err(QnetError::precondition(
            "renaming-invariance",
            format!(
                "{} at {} on {}: {}",
                f.renaming, f.vertex, f.graph, f.detail
            ),
        ));
    }
    let m = UMatrix::materialize(op, plain)
        .map_err(|e| QnetError::precondition("unitarity", e.to_string()))?;
    precondition_unitary_np(&m, plain, false)?;
    let xs: Vec<u64> = keys.iter().map(|k| k / 2).collect();
    for &x in &xs {
        let spec = CausalitySpec::new(chi_of(x), zeta_key_pair(x), false);
        if let Some(w) = causal_witness(&m, &spec, plain)? {
            return Err(QnetError::precondition(
                "causality",
                format!("at {x}: G = {}, H = {}: {}", w.g, w.h, w.detail),
            ));
        }
    }

    let odd: Vec<Name> = keys.iter().map(|k| Name::atom(*k as i64 + 1)).collect();
    let mu = Restriction::Namewise(odd);
    let not_mu = mu.pointwise_complement().expect("namewise is pointwise");
    let ext = Operator::localized(op.clone(), mu.clone());
    let em = UMatrix::materialize(&ext, versioned)?;
    let ed = em.adjoint();
    let mut taus = Vec::new();
    let mut ks = Vec::new();
    let mut certificates = Vec::new();
    for &x in &xs {
        let zeta = zeta_key_pair(x);
        let tau = Operator::basis(Rename(Renaming::swap(2 * x, 2 * x + 1)));
        let tm = UMatrix::materialize(&tau, versioned)?;
        let status = if unitary_witness(&tm, versioned).is_none() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        let mut rep = is_strictly_local(&tm.to_operator(versioned), &zeta, versioned)?;
        rep.check = format!("tau[{x}] unitary renaming, strictly local on {zeta}");
        if status == CheckStatus::Fail {
            rep.status = CheckStatus::Fail;
        }
        certificates.push(rep);
        let k = ed.mul(&tm).mul(&em);
        let xi = Restriction::union(
            Restriction::compose(mu.clone(), chi_of(x)),
            Restriction::compose(not_mu.clone(), zeta.clone()),
        );
        let mut rep = is_strictly_local(&k.to_operator(versioned), &xi, versioned)?;
        rep.check = format!("K[{x}] strictly local on {xi}");
        certificates.push(rep);
        taus.push(tm);
        ks.push(k);
    }
    let res = residual(&taus, &ks, &em, versioned, |g| &mu.apply(g) == g);
    Ok(DecompositionResult {
        variant: "no-ancilla".into(),
        universe: versioned.label().to_string(),
        dimension: versioned.len(),
        operator: op.to_string(),
        taus: xs
            .iter()
            .map(|x| format!("tau[{}<->{}]", 2 * x, 2 * x + 1))
            .collect(),
        gates: xs.iter().map(|x| format!("K[{x}]")).collect(),
        residual: res,
        max_commutator_k: max_commutator(&ks),
        max_commutator_tau: max_commutator(&taus),
        certificates,
        renaming_invariant: None,
        note: "representative dynamics".into(),
        tau_matrices: taus,
        k_matrices: ks,
    })
}

/// Families `v ↦ A_v` used to exercise renaming invariance.
pub struct Family {
    pub name: String,
    build: Box<dyn Fn(&Name) -> Operator + Send + Sync>,
}

impl Family {
    pub fn new(name: &str, build: impl Fn(&Name) -> Operator + Send + Sync + 'static) -> Family {
        Family {
            name: name.to_string(),
            build: Box::new(build),
        }
    }
}

impl OperatorFamily for Family {
    fn at(&self, v: &Name) -> Box<dyn LinearMap + '_> {
        Box::new((self.build)(v))
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Flips `0 ↔ 1` on every system.
#[derive(Clone, Copy, Debug)]
pub struct BitFlip;

impl BasisOperator for BitFlip {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let out = g.systems().iter().map(|s| match s.state.as_str() {
            "0" => with_state(s, "1"),
            "1" => with_state(s, "0"),
            _ => s.clone(),
        });
        StateVector::basis(Graph::from_valid(out))
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(BitFlip)
    }

    fn label(&self) -> String {
        "X".into()
    }
}

/// A rotation of the `0`/`1` states at every system.
#[derive(Clone, Copy, Debug)]
pub struct BitRotation {
    pub theta: f64,
}

impl BasisOperator for BitRotation {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let (cs, sn) = (self.theta.cos(), self.theta.sin());
        expand(g, |s| match s.state.as_str() {
            "0" => vec![
                (vec![s.clone()], real(cs)),
                (vec![with_state(s, "1")], real(sn)),
            ],
            "1" => vec![
                (vec![s.clone()], real(cs)),
                (vec![with_state(s, "0")], real(-sn)),
            ],
            _ => vec![(vec![s.clone()], real(1.0))],
        })
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(BitRotation { theta: -self.theta })
    }

    fn label(&self) -> String {
        format!("rot({})", self.theta)
    }
}

/// `|∅⟩⟨{0.v}|`, valid for any `v`.
#[derive(Clone, Debug)]
pub struct Destroy {
    pub v: Name,
    pub adjoint: bool,
}

impl BasisOperator for Destroy {
    fn apply_basis(&self, g: &Graph) -> StateVector {
        let one = Graph::from_valid([System::new("0", self.v.clone())]);
        let (from, to) = if self.adjoint {
            (Graph::empty(), one)
        } else {
            (one, Graph::empty())
        };
        if g == &from {
            StateVector::basis(to)
        } else {
            StateVector::zero()
        }
    }

    fn adjoint(&self) -> Operator {
        Operator::basis(Destroy {
            v: self.v.clone(),
            adjoint: !self.adjoint,
        })
    }

    fn label(&self) -> String {
        format!(
            "destroy[{}]{}",
            self.v,
            if self.adjoint { "^dagger" } else { "" }
        )
    }
}

/// Renaming-invariant families over the `0`/`1` alphabet.
pub fn invariant_families() -> Vec<Family> {
    vec![
        Family::new("identity", |_| Operator::Identity),
        Family::new("flip", |_| Operator::basis(BitFlip)),
        Family::new("flip_at", |v| {
            Operator::localized(Operator::basis(BitFlip), Restriction::zeta(v.clone()))
        }),
        Family::new("destroy", |v| {
            Operator::basis(Destroy {
                v: v.clone(),
                adjoint: false,
            })
        }),
        Family::new("create", |v| {
            Operator::basis(Destroy {
                v: v.clone(),
                adjoint: true,
            })
        }),
        Family::new("rotation", |_| Operator::basis(BitRotation { theta: 0.7 })),
        Family::new("rotation_at", |v| {
            Operator::localized(
                Operator::basis(BitRotation { theta: 0.3 }),
                Restriction::zeta(v.clone()),
            )
        }),
    ]
}

#[derive(Serialize, Clone, Debug)]
pub struct SupportViolation {
    pub family: String,
    pub vertex: String,
    pub ket: String,
    pub bra: String,
}

/// `⟨H|A_v|G⟩ ≠ 0` entails `V±(G) ∪ {v, -v} ≏ V±(H) ∪ {v, -v}`. Returns
/// the number of nonzero entries examined and the violations.
pub fn pm_support_check(fam: &dyn OperatorFamily, u: &Universe) -> (usize, Vec<SupportViolation>) {
    let mut seen = 0;
    let mut bad = Vec::new();
    for v in u.vertex_names() {
        let a = fam.at(&v);
        for g in u.graphs() {
            for (h, x) in a.apply_basis(g).sorted_terms() {
                if x.norm() <= TOL {
                    continue;
                }
                seen += 1;
                let side = |k: &Graph| {
                    let mut names = k.signed_support();
                    names.push(v.clone());
                    names.push(v.negate());
                    crate::names::regions(&names)
                };
                if side(g) != side(&h) {
                    bad.push(SupportViolation {
                        family: fam.label(),
                        vertex: v.to_string(),
                        ket: h.to_string(),
                        bra: g.to_string(),
                    });
                }
            }
        }
    }
    (seen, bad)
}

/// The operators exercised by the checkers: `I, M, C, H, Hq` and `Hq·M·C`.
pub fn catalog(p: &DynamicsParams) -> Vec<(String, Operator)> {
    let hmc = Operator::Product(vec![
        quantum_merge_split_hq(p.phi),
        step_m(),
        coin_c(p.theta),
    ]);
    vec![
        ("I".into(), Operator::Identity),
        ("M".into(), step_m()),
        (format!("C({})", p.theta), coin_c(p.theta)),
        ("H".into(), merge_split_h()),
        (format!("Hq({})", p.phi), quantum_merge_split_hq(p.phi)),
        ("Hq*M*C".into(), hmc),
    ]
}

/// Overlap variant of the vertex selector, as used without ancilla.
pub fn zeta_overlap_of(v: &Name) -> Restriction {
    Restriction::zeta_overlap(v.clone())
}

/// `C(θ)` tabulated on a universe; convenience for callers holding
/// matrices.
pub fn coin_matrix(theta: f64, u: &Universe) -> OperatorMatrix {
    coin_c(theta).to_matrix_on(u)
}

pub fn split_table(r: &Restriction, u: &Universe) -> Result<SplitTable> {
    SplitTable::build(r, u)
}

pub fn phase(theta: f64) -> C64 {
    c(theta.cos(), theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::is_causal;
    use crate::hilbert::{is_unitary_on, operator_equal_on};

    fn chain(states: &[&str]) -> Graph {
        let keys: Vec<u64> = (1..=states.len() as u64).collect();
        Graph::from_valid(
            chain_names(&keys)
                .into_iter()
                .zip(states)
                .map(|(v, s)| System::new(*s, v)),
        )
    }

    #[test]
    fn step_moves_and_bounces() {
        let g = chain(&["R", "e", "e"]);
        assert_eq!(
            step_m().apply_basis(&g),
            StateVector::basis(chain(&["e", "R", "e"]))
        );
        let g = chain(&["e", "R"]);
        assert_eq!(
            step_m().apply_basis(&g),
            StateVector::basis(chain(&["e", "L"]))
        );
        let g = chain(&["R", "L"]);
        assert_eq!(
            step_m().apply_basis(&g),
            StateVector::basis(chain(&["L", "R"]))
        );
        let g = chain(&["R", "e", "L"]);
        assert_eq!(
            step_m().apply_basis(&g),
            StateVector::basis(chain(&["e", "LR", "e"]))
        );
    }

    #[test]
    fn step_is_a_causal_permutation() {
        for n in 2..=3 {
            let u = chain_universe(n, &ALL_STATES).unwrap();
            let m = particle_step_m(&u).unwrap();
            assert!(is_unitary_on(&m, &u).unwrap().is_none());
            assert!(
                operator_equal_on(&step_m().adjoint(), &m.adjoint(), &u, TOL)
                    .unwrap()
                    .is_none()
            );
            for v in u.vertex_names() {
                let z = Restriction::zeta(v.clone());
                let spec =
                    CausalitySpec::new(Restriction::disk(z.clone(), 1, false), z.clone(), true);
                assert!(is_causal(&m, &spec, &u).unwrap().is_none(), "{v}");
            }
        }
        let u = chain_universe(3, &MOVERS).unwrap();
        let z = Restriction::zeta(chain_names(&[1, 2, 3])[1].clone());
        assert!(
            is_causal(&step_m(), &CausalitySpec::new(z.clone(), z, false), &u)
                .unwrap()
                .is_some()
        );
    }

    #[test]
    fn split_and_merge() {
        let d = Graph::from_valid([System::new(WALL, Name::atom(2))]);
        let out = merge_split_h().apply_basis(&d);
        let l = Name::atom(2).descend(Suffix::from_dirs(&[Dir::L]));
        let r = Name::atom(2).descend(Suffix::from_dirs(&[Dir::R]));
        let pair = Graph::from_valid([System::new(RIGHT, l), System::new(LEFT, r)]);
        assert_eq!(out, StateVector::basis(pair.clone()));
        assert_eq!(
            merge_split_h().apply_basis(&pair),
            StateVector::basis(d.clone())
        );
        let q = quantum_merge_split_hq(PI / 2.0);
        assert!((q.apply_basis(&d).get(&pair) - real(1.0)).norm() < TOL);
        assert!((q.apply_basis(&pair).get(&d) - real(-1.0)).norm() < TOL);
    }

    #[test]
    fn toggle_flips_only_at_v() {
        let v = Name::atom(1);
        let g = Graph::from_valid([
            System::new("0R", v.clone()),
            System::new("0e", Name::atom(2)),
        ]);
        let out = toggle_tau(&v).apply_basis(&g);
        let want = Graph::from_valid([System::new("1R", v), System::new("0e", Name::atom(2))]);
        assert_eq!(out, StateVector::basis(want));
    }

    #[test]
    fn identity_decomposes_exactly() {
        let u = chain_universe(2, &MOVERS).unwrap();
        let cover = u.vertex_names();
        let r = block_decompose(
            &Operator::Identity,
            &u,
            &cover,
            &|v| Restriction::zeta(v.clone()),
            1,
        )
        .unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.passed(1e-9), "{:?}", r.certificates);
    }

    #[test]
    fn versions_of_a_chain() {
        let (plain, versioned) = versioned_chain(2, &[EMPTY, RIGHT]).unwrap();
        assert_eq!(plain.len(), 9);
        assert!(versioned.len() > plain.len());
        assert!(versioned.is_subset_closed());
    }
}
