//! Helpers shared by the integration suites: random terms, an independent
//! rewriter, a closure oracle for generated algebras and small models.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qnet_core::cli_formats::parse_graph;
use qnet_core::graphs::{Graph, Universe};
use qnet_core::hilbert::UMatrix;
use qnet_core::names::{Dir, Key, Name, Suffix, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    qnet_core::tensor_trace::gen::rng(seed)
}

pub fn suffix(w: &str) -> Suffix {
    Suffix::from_dirs(
        &w.chars()
            .map(|c| if c == 'l' { Dir::L } else { Dir::R })
            .collect::<Vec<_>>(),
    )
}

pub fn leaf(id: i64, w: &str) -> Name {
    Name::atom(id).descend(suffix(w))
}

pub fn graph(text: &str) -> Graph {
    parse_graph(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn random_key(rng: &mut ChaCha8Rng, keys: u64) -> Key {
    let k = Key::pos(rng.gen_range(1..=keys));
    if rng.gen_bool(0.3) {
        k.negated()
    } else {
        k
    }
}

fn random_suffix(rng: &mut ChaCha8Rng, max: usize) -> Suffix {
    let n = rng.gen_range(1..=max);
    let dirs: Vec<Dir> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Dir::L } else { Dir::R })
        .collect();
    Suffix::from_dirs(&dirs)
}

/// A raw term of at most `budget` grammar nodes over keys `1..=keys`.
/// Sibling pairs `x.t.l ∨ x.t.r` are planted often so that collapses fire.
pub fn random_term(rng: &mut ChaCha8Rng, budget: usize, keys: u64, depth: usize) -> Term {
    if budget <= 1 || rng.gen_bool(0.25) {
        return Term::Atom(random_key(rng, keys));
    }
    if budget >= 5 && rng.gen_bool(0.25) {
        let x = random_term(rng, (budget - 3) / 2, keys, depth);
        let t = if rng.gen_bool(0.5) {
            Suffix::EMPTY
        } else {
            random_suffix(rng, depth.saturating_sub(1).max(1))
        };
        return Term::Join(
            Box::new(Term::Descend(Box::new(x.clone()), t.push(Dir::L))),
            Box::new(Term::Descend(Box::new(x), t.push(Dir::R))),
        );
    }
    if budget < 3 || rng.gen_bool(0.4) {
        let t = if rng.gen_bool(0.1) {
            Suffix::EMPTY
        } else {
            random_suffix(rng, depth)
        };
        Term::Descend(Box::new(random_term(rng, budget - 1, keys, depth)), t)
    } else {
        let left = rng.gen_range(1..budget - 1);
        Term::Join(
            Box::new(random_term(rng, left, keys, depth)),
            Box::new(random_term(rng, budget - 1 - left, keys, depth)),
        )
    }
}

/// Positions where one of the equations, oriented left to right, applies.
fn redexes(t: &Term, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if rewrite_here(t).is_some() {
        out.push(path.clone());
    }
    match t {
        Term::Atom(_) => {}
        Term::Descend(x, _) => {
            path.push(0);
            redexes(x, path, out);
            path.pop();
        }
        Term::Join(a, b) => {
            path.push(1);
            redexes(a, path, out);
            path.pop();
            path.push(2);
            redexes(b, path, out);
            path.pop();
        }
    }
}

fn rewrite_here(t: &Term) -> Option<Term> {
    match t {
        Term::Descend(x, s) if s.is_empty() => Some((**x).clone()),
        Term::Descend(x, s) => match &**x {
            Term::Join(a, b) => {
                let pick = if s.first() == Some(Dir::L) { a } else { b };
                Some(Term::Descend(pick.clone(), s.rest()))
            }
            Term::Descend(y, s0) => Some(Term::Descend(y.clone(), s0.concat(*s))),
            Term::Atom(_) => None,
        },
        Term::Join(a, b) => match (&**a, &**b) {
            (Term::Descend(x, s1), Term::Descend(y, s2))
                if x == y
                    && s1.last() == Some(Dir::L)
                    && s2.last() == Some(Dir::R)
                    && s1.parent() == s2.parent() =>
            {
                Some(Term::Descend(x.clone(), s1.parent().unwrap()))
            }
            _ => None,
        },
        Term::Atom(_) => None,
    }
}

fn rewrite_at(t: &Term, path: &[u8]) -> Term {
    let Some((&step, rest)) = path.split_first() else {
        return rewrite_here(t).expect("redex");
    };
    match (t, step) {
        (Term::Descend(x, s), 0) => Term::Descend(Box::new(rewrite_at(x, rest)), *s),
        (Term::Join(a, b), 1) => Term::Join(Box::new(rewrite_at(a, rest)), b.clone()),
        (Term::Join(a, b), 2) => Term::Join(a.clone(), Box::new(rewrite_at(b, rest))),
        _ => unreachable!("bad path"),
    }
}

/// Rewrites with a uniformly random redex at every step until none is left.
pub fn rewrite_randomly(t: &Term, rng: &mut ChaCha8Rng) -> Term {
    let mut cur = t.clone();
    loop {
        let mut found = Vec::new();
        redexes(&cur, &mut Vec::new(), &mut found);
        if found.is_empty() {
            return cur;
        }
        let pick = &found[rng.gen_range(0..found.len())];
        cur = rewrite_at(&cur, pick);
    }
}

/// Leaves of the algebra generated by `names`, up to suffix length `depth`:
/// close the generators' leaves under descent and under joining sibling
/// members (the only joins that produce a new leaf), until nothing changes.
pub fn leaf_closure(names: &[Name], depth: usize) -> BTreeSet<(Key, Suffix)> {
    let mut have: BTreeSet<(Key, Suffix)> = BTreeSet::new();
    for n in names {
        for r in n.leaves() {
            have.insert((r.key, r.suffix));
        }
    }
    loop {
        let mut next = have.clone();
        for &(k, t) in &have {
            if t.len() < depth {
                next.insert((k, t.push(Dir::L)));
                next.insert((k, t.push(Dir::R)));
            }
            if t.last() == Some(Dir::L) {
                let p = t.parent().unwrap();
                if have.contains(&(k, p.push(Dir::R))) {
                    next.insert((k, p));
                }
            }
        }
        if next.len() == have.len() {
            return have;
        }
        have = next;
    }
}

/// Every leaf name over keys `±1..=keys` with suffix length at most `depth`.
pub fn all_leaves(keys: u64, depth: usize) -> Vec<Name> {
    let mut out = Vec::new();
    for id in 1..=keys as i64 {
        for sign in [1, -1] {
            for t in Suffix::all_up_to(depth) {
                out.push(Name::atom(sign * id).descend(t));
            }
        }
    }
    out
}

/// The "local but not strictly local" model. `x` is vertex `1`; `χ` is the
/// radius-2 disk around it. `|1⟩` reaches key `3` in two hops, so it cannot
/// sit next to `|2⟩ = {2.3}`, while `|0⟩` can.
pub struct StrictnessModel {
    pub universe: Universe,
    pub zero: Graph,
    pub one: Graph,
    pub two: Graph,
    pub zero_two: Graph,
}

pub fn strictness_model() -> StrictnessModel {
    let zero = graph("{0.1}");
    let one = graph("{1.1, 1.(-1|-3)}");
    let two = graph("{2.3}");
    let zero_two = graph("{0.1, 2.3}");
    let universe = Universe::new(
        "strictness-model",
        [
            Graph::empty(),
            zero.clone(),
            one.clone(),
            two.clone(),
            zero_two.clone(),
        ],
    );
    StrictnessModel {
        universe,
        zero,
        one,
        two,
        zero_two,
    }
}

/// Vertex `1` holds state `0` or `1` or is absent, next to a few bystanders.
pub fn swap_model() -> Universe {
    let pool = ["0.1", "1.1", "w.2", "v.2", "w.(-1|-2)", "w.3.l", "v.3.r"];
    let systems: Vec<_> = pool
        .iter()
        .map(|s| graph(&format!("{{{s}}}")).systems()[0].clone())
        .collect();
    Universe::from_pool("swap-model", &systems).unwrap()
}

/// Movers at `±1`, `±1.l`, `±1.r` and walls at `±1`, so that merge/split
/// stays inside the universe.
pub fn merge_split_universe() -> Universe {
    use qnet_core::dynamics::{MOVERS, WALL};
    use qnet_core::graphs::System;
    let mut pool = Vec::new();
    for k in [1i64, -1] {
        pool.push(System::new(WALL, Name::atom(k)));
        for w in ["", "l", "r"] {
            for s in MOVERS {
                pool.push(System::new(s, leaf(k, w)));
            }
        }
    }
    Universe::from_pool("merge-split", &pool).unwrap()
}

/// Outcome of one equivalence suite: how many operators were checked, how
/// many satisfied the property, and any internal disagreement.
#[derive(Debug, Default)]
pub struct Equivalence {
    pub checked: usize,
    pub holds: usize,
    pub disagreements: Vec<String>,
}

impl Equivalence {
    fn record(&mut self, status: qnet_core::checks::CheckStatus, holds: bool, what: String) {
        self.checked += 1;
        if status == qnet_core::checks::CheckStatus::InternalDisagreement {
            self.disagreements.push(what);
        } else if holds {
            self.holds += 1;
        }
    }

    pub fn ok(&self) -> bool {
        self.disagreements.is_empty() && self.holds > 0 && self.holds < self.checked
    }
}

fn locality_cases(
    samples: usize,
    seed: u64,
) -> Vec<(
    String,
    qnet_core::tensor_trace::Operator,
    qnet_core::restrict::Restriction,
    Universe,
)> {
    use qnet_core::dynamics::{catalog, chain_universe, DynamicsParams, MOVERS};
    use qnet_core::restrict::Restriction;
    use qnet_core::tensor_trace::gen::{fixed_points, matrix, np_matrix, unitary};
    use qnet_core::tensor_trace::laws::restriction_catalog;
    use qnet_core::tensor_trace::Operator;

    let u = Universe::default_small();
    let cat = restriction_catalog(&u);
    let all = u.graphs().to_vec();
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < samples {
        i += 1;
        let chi = cat[r.gen_range(0..cat.len())].clone();
        let op = match i % 3 {
            0 => Operator::localized(
                Operator::matrix(np_matrix(&mut r, &fixed_points(&chi, &u))),
                chi.clone(),
            ),
            1 => Operator::matrix(matrix(&mut r, &all, &all, 1)),
            _ => Operator::matrix(unitary(&mut r, &u, true)),
        };
        // some tensors leave the universe, e.g. by splitting a vertex in two;
        // the adjoint must stay inside too or A A^dagger is truncated
        if UMatrix::materialize(&op, &u).is_ok() && UMatrix::materialize(&op.adjoint(), &u).is_ok()
        {
            out.push((format!("random #{i}"), op, chi, u.clone()));
        }
    }
    let chain = chain_universe(3, &MOVERS).unwrap();
    let mut regions: Vec<Restriction> = vec![Restriction::Full, Restriction::Empty];
    for v in chain.vertex_names() {
        let z = Restriction::zeta(v);
        regions.push(Restriction::disk(z.clone(), 1, false));
        regions.push(z);
    }
    for (label, op) in catalog(&DynamicsParams::default()) {
        for chi in &regions {
            out.push((label.clone(), op.clone(), chi.clone(), chain.clone()));
        }
    }
    out
}

/// Pointwise tensor form, strict locality and dual locality, each compared
/// with plain locality on random operators and the dynamics catalog.
pub fn locality_equivalences(samples: usize, seed: u64) -> [Equivalence; 3] {
    use qnet_core::checks::{dual_locality_check, is_local, is_strictly_local, CheckStatus};
    use qnet_core::tensor_trace::laws::equals_localized;

    let mut tensor_form = Equivalence::default();
    let mut strict = Equivalence::default();
    let mut dual = Equivalence::default();
    for (label, op, chi, u) in locality_cases(samples, seed) {
        let what = format!("{label} on {chi}");
        let local = is_local(&op, &chi, &u).unwrap().is_none();
        let as_tensor = equals_localized(&op, &chi, &u).unwrap();
        let status = if local == as_tensor {
            CheckStatus::Pass
        } else {
            CheckStatus::InternalDisagreement
        };
        tensor_form.record(status, local, what.clone());
        let s = is_strictly_local(&op, &chi, &u).unwrap();
        strict.record(s.status, s.passed(), what.clone());
        let d = dual_locality_check(&op, &chi, &u).unwrap();
        dual.record(d.status, d.passed(), what);
    }
    [tensor_form, strict, dual]
}

/// Dual causality compared with direct causality on random unitaries,
/// unitaries localized on a vertex, and the dynamics catalog.
pub fn causality_equivalence(samples: usize, seed: u64) -> Equivalence {
    use qnet_core::checks::{dual_causality_check, CausalitySpec};
    use qnet_core::dynamics::{catalog, chain_universe, DynamicsParams, MOVERS};
    use qnet_core::restrict::Restriction;
    use qnet_core::tensor_trace::gen::{fixed_points, unitary};
    use qnet_core::tensor_trace::laws::restriction_catalog;
    use qnet_core::tensor_trace::Operator;

    // dual probes must land inside the universe, which full chains guarantee
    let u = chain_universe(2, &MOVERS).unwrap();
    let names = u.vertex_names();
    let cat = restriction_catalog(&u);
    let mut r = rng(seed);
    let mut eq = Equivalence::default();
    let mut i = 0;
    while eq.checked < samples {
        i += 1;
        let np = i % 2 == 0;
        let zeta = cat[r.gen_range(0..cat.len())].clone();
        let chi = cat[r.gen_range(0..cat.len())].clone();
        let op = if i % 4 < 2 {
            Operator::matrix(unitary(&mut r, &u, np))
        } else {
            let z = Restriction::zeta(names[r.gen_range(0..names.len())].clone());
            let slice = Universe::new("slice", fixed_points(&z, &u));
            Operator::localized(Operator::matrix(unitary(&mut r, &slice, true)), z)
        };
        if UMatrix::materialize(&op, &u).is_err() {
            continue;
        }
        let spec = CausalitySpec::new(chi.clone(), zeta.clone(), np);
        let rep = dual_causality_check(&op, &spec, &u).unwrap();
        eq.record(
            rep.status,
            rep.passed(),
            format!("random #{i} from {chi} to {zeta}"),
        );
    }
    let chain = chain_universe(3, &MOVERS).unwrap();
    for (label, op) in catalog(&DynamicsParams::default()) {
        for v in chain.vertex_names() {
            let z = Restriction::zeta(v);
            for chi in [
                z.clone(),
                Restriction::disk(z.clone(), 1, false),
                Restriction::Full,
            ] {
                for np in [false, true] {
                    let spec = CausalitySpec::new(chi.clone(), z.clone(), np);
                    let rep = dual_causality_check(&op, &spec, &chain).unwrap();
                    eq.record(
                        rep.status,
                        rep.passed(),
                        format!("{label} from {chi} to {z}"),
                    );
                }
            }
        }
    }
    eq
}

/// `A = |1⟩⟨0|` on the strictness model: local, not strictly local, with the
/// failing entry at `⟨02|A†A|02⟩`.
pub fn strictness_counterexample() -> Result<String, String> {
    use qnet_core::checks::{dual_locality_check, is_local, is_strictly_local};
    use qnet_core::hilbert::{real, OperatorMatrix};
    use qnet_core::restrict::Restriction;
    use qnet_core::tensor_trace::{consistent_preserving, Operator};

    let m = strictness_model();
    let u = &m.universe;
    let chi = Restriction::disk(Restriction::zeta(Name::atom(1)), 2, false);
    let a = OperatorMatrix::from_entries([(m.one.clone(), m.zero.clone(), real(1.0))]);
    let op = Operator::matrix(a.clone());
    if let Some(w) = is_local(&op, &chi, u).map_err(|e| e.to_string())? {
        return Err(format!(
            "A should be local, mismatch at ({}, {})",
            w.ket, w.bra
        ));
    }
    if !dual_locality_check(&op, &chi, u)
        .map_err(|e| e.to_string())?
        .passed()
    {
        return Err("dual locality should hold".into());
    }
    let r = is_strictly_local(&op, &chi, u).map_err(|e| e.to_string())?;
    let w = r.witness.clone().ok_or("strict locality should fail")?;
    if r.passed() || r.status.label() != "FAIL" {
        return Err(format!("status {}", r.status.label()));
    }
    let zt = m.zero_two.to_string();
    let want = (
        w["operator"] == "A^dagger A",
        w["ket"] == zt.as_str() && w["bra"] == zt.as_str(),
        w["lhs"][0].as_f64() == Some(0.0) && w["rhs"][0].as_f64() == Some(1.0),
    );
    if want != (true, true, true) {
        return Err(format!("unexpected witness {w}"));
    }
    let ata = a.adjoint().mul(&a);
    let direct = ata.entry(&m.zero_two, &m.zero_two);
    let two = qnet_core::hilbert::StateVector::basis(m.two.clone());
    let factored = ata.entry(&m.zero, &m.zero) * two.inner(&two);
    if direct.norm() != 0.0 || factored.re != 1.0 {
        return Err("entries of A†A differ from the expected 0 and 1".into());
    }
    match consistent_preserving(&a, &chi, u).map_err(|e| e.to_string())? {
        Some((g, h, _)) if g == m.zero_two && h == m.one => {}
        other => return Err(format!("consistency witness {other:?}")),
    }
    Ok(format!(
        "witness <{zt}|A†A|{zt}> = 0 vs <{}|A†A|{}><{}|{}> = 1",
        m.zero, m.zero, m.two, m.two
    ))
}

/// `(|0⟩⟨1| + |1⟩⟨0| + |∅⟩⟨∅|) ⊗ξ I` with `ξ` keeping systems in state 0 or 1.
pub fn swap_is_strictly_local() -> Result<String, String> {
    use qnet_core::checks::is_strictly_local;
    use qnet_core::graphs::State;
    use qnet_core::hilbert::{is_unitary_on, real, OperatorMatrix};
    use qnet_core::restrict::{Predicate, Restriction};
    use qnet_core::tensor_trace::{consistent_preserving, Operator};

    let u = swap_model();
    let xi = Restriction::Pointwise(Predicate::StateIn(vec![State::new("0"), State::new("1")]));
    let (zero, one) = (graph("{0.1}"), graph("{1.1}"));
    let core = OperatorMatrix::from_entries([
        (zero.clone(), one.clone(), real(1.0)),
        (one, zero, real(1.0)),
        (Graph::empty(), Graph::empty(), real(1.0)),
    ]);
    let op = Operator::localized(Operator::matrix(core), xi.clone());
    if let Some(w) = is_unitary_on(&op, &u).map_err(|e| e.to_string())? {
        return Err(format!("not unitary at ({}, {})", w.ket, w.bra));
    }
    let r = is_strictly_local(&op, &xi, &u).map_err(|e| e.to_string())?;
    if !r.passed() {
        return Err(format!("strict locality failed: {:?}", r.witness));
    }
    let dense = UMatrix::materialize(&op, &u).unwrap().to_operator(&u);
    if let Some(w) = consistent_preserving(&dense, &xi, &u).map_err(|e| e.to_string())? {
        return Err(format!("not consistent-preserving: {w:?}"));
    }
    Ok(format!("unitary and strictly local on {} graphs", u.len()))
}

fn mixed_dyad(g: &Graph, h: &Graph) -> qnet_core::hilbert::OperatorMatrix {
    use qnet_core::hilbert::{real, OperatorMatrix, StateVector};
    let psi =
        StateVector::from_terms([(g.clone(), real(1.0)), (h.clone(), real(1.0))]).normalized();
    OperatorMatrix::outer(&psi, &psi)
}

/// On the 3-chain, tracing out beyond the radius-2 disk first destroys an
/// off-diagonal term that tracing out beyond radius 1 keeps. The pair that
/// shows it has non-corresponding names; every corresponding pair agrees.
pub fn wider_traceout_decoheres() -> Result<(String, f64), String> {
    use qnet_core::dynamics::{chain_universe, MOVERS};
    use qnet_core::names::corresponds;
    use qnet_core::restrict::Restriction;
    use qnet_core::tensor_trace::partial_trace;

    let u = chain_universe(3, &MOVERS).map_err(|e| e.to_string())?;
    let mut best: Option<(f64, String)> = None;
    for v in u.vertex_names() {
        let z = Restriction::zeta(v.clone());
        let (z1, z2) = (
            Restriction::disk(z.clone(), 1, false),
            Restriction::disk(z, 2, false),
        );
        for g in u.graphs() {
            for h in u.graphs() {
                let np = corresponds(&g.vertices(), &h.vertices());
                if np {
                    let rho = qnet_core::hilbert::OperatorMatrix::from_entries([(
                        g.clone(),
                        h.clone(),
                        qnet_core::hilbert::real(1.0),
                    )]);
                    let d = partial_trace(&partial_trace(&rho, &z2), &z1)
                        .max_diff(&partial_trace(&rho, &z1))
                        .0;
                    if d > 1e-12 {
                        return Err(format!("n.p. dyad |{g}><{h}| differs by {d} at {v}"));
                    }
                } else if best.as_ref().map_or(true, |b| b.0 <= 0.1) {
                    let rho = mixed_dyad(g, h);
                    let d = partial_trace(&partial_trace(&rho, &z2), &z1)
                        .max_diff(&partial_trace(&rho, &z1))
                        .0;
                    if best.as_ref().map_or(true, |b| d > b.0) {
                        best = Some((d, format!("v = {v}, state (|{g}> + |{h}>)/sqrt2")));
                    }
                }
            }
        }
    }
    match best {
        Some((d, w)) if d > 0.1 => Ok((w, d)),
        Some((d, _)) => Err(format!("largest difference only {d}")),
        None => Err("no non-n.p. pair".into()),
    }
}

/// The identity is causal from the radius-2 disk to the radius-1 disk in
/// the n.p. sector, and not without it. Returns the unrestricted witness.
pub fn identity_only_np_causal() -> Result<serde_json::Value, String> {
    use qnet_core::checks::{causal_witness_json, is_causal, CausalitySpec};
    use qnet_core::dynamics::{chain_universe, MOVERS};
    use qnet_core::restrict::Restriction;
    use qnet_core::tensor_trace::Operator;

    let u = chain_universe(3, &MOVERS).map_err(|e| e.to_string())?;
    let mut witness = None;
    for v in u.vertex_names() {
        let z = Restriction::zeta(v.clone());
        let (z1, z2) = (
            Restriction::disk(z.clone(), 1, false),
            Restriction::disk(z, 2, false),
        );
        let np = CausalitySpec::new(z2.clone(), z1.clone(), true);
        if let Some(w) = is_causal(&Operator::Identity, &np, &u).map_err(|e| e.to_string())? {
            return Err(format!("n.p. causality fails at {v}: {}", w.detail));
        }
        let all = CausalitySpec::new(z2, z1, false);
        if witness.is_none() {
            if let Some(w) = is_causal(&Operator::Identity, &all, &u).map_err(|e| e.to_string())? {
                let mut j = causal_witness_json(&w);
                j["vertex"] = serde_json::json!(v.to_string());
                witness = Some(j);
            }
        }
    }
    witness.ok_or_else(|| "identity passed unrestricted causality".into())
}
