//! Locality and causality checkers over finite universes.
//!
//! Every checker works on basis dyads `|G⟩⟨H|` of a subset-closed universe.
//! Both sides of the locality and causality equations are linear in the
//! dyad, so agreement on all dyads is agreement on all operators.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{QnetError, Result};
use crate::graphs::{Graph, Universe};
use crate::hilbert::{
    is_name_preserving, unitary_witness, LinearMap, Mismatch, OperatorMatrix, UMatrix, C64, TOL,
};
use crate::restrict::{commutes, name_classes, range, Restriction, SplitTable};
use crate::tensor_trace::{consistent_preserving, partial_trace, Operator};

pub use crate::tensor_trace::LocalizedOperator;

#[derive(Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
    InternalDisagreement,
}

impl CheckStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Inconclusive => "INCONCLUSIVE",
            CheckStatus::InternalDisagreement => "INTERNAL_DISAGREEMENT",
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct CheckReport {
    pub check: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub counts: BTreeMap<String, u64>,
}

impl CheckReport {
    fn new(check: &str, status: CheckStatus, witness: Option<Value>) -> CheckReport {
        CheckReport {
            check: check.to_string(),
            status,
            witness,
            counts: BTreeMap::new(),
        }
    }

    fn count(mut self, key: &str, n: u64) -> CheckReport {
        self.counts.insert(key.to_string(), n);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

pub fn mismatch_json(m: &Mismatch) -> Value {
    json!({
        "ket": m.ket.to_string(),
        "bra": m.bra.to_string(),
        "lhs": [m.lhs.re, m.lhs.im],
        "rhs": [m.rhs.re, m.rhs.im],
    })
}

/// Cause and effect regions of a causality claim.
#[derive(Clone, Debug)]
pub struct CausalitySpec {
    pub chi: Restriction,
    pub zeta: Restriction,
    pub np_sector: bool,
}

impl CausalitySpec {
    pub fn new(chi: Restriction, zeta: Restriction, np_sector: bool) -> CausalitySpec {
        CausalitySpec {
            chi,
            zeta,
            np_sector,
        }
    }
}

/// First pair violating `⟨H|A|G⟩ = ⟨H_χ|A|G_χ⟩⟨H_χ̄|G_χ̄⟩`. Only pairs where
/// one side can be nonzero are visited.
pub fn local_witness(m: &UMatrix, t: &SplitTable, u: &Universe) -> Option<Mismatch> {
    (0..u.len()).into_par_iter().find_map_first(|i| {
        let (gi, go) = (t.inside(i), t.outside(i));
        let mut cand: Vec<usize> = m.col(i).iter().map(|e| e.0 as usize).collect();
        let outside = u.graph(go);
        for &(a, _) in m.col(gi) {
            if let Some(h) = u
                .graph(a as usize)
                .disjoint_union(outside)
                .and_then(|h| u.index_of(&h))
            {
                if t.inside(h) == a as usize && t.outside(h) == go {
                    cand.push(h);
                }
            }
        }
        cand.sort_unstable();
        cand.dedup();
        cand.into_iter().find_map(|h| {
            let lhs = m.get(h, i);
            let rhs = if t.outside(h) == go {
                m.get(t.inside(h), gi)
            } else {
                C64::default()
            };
            ((lhs - rhs).norm() > TOL).then(|| Mismatch {
                ket: u.graph(h).clone(),
                bra: u.graph(i).clone(),
                lhs,
                rhs,
            })
        })
    })
}

/// `A` is `χ`-local on the universe. `None` means local.
pub fn is_local(a: &dyn LinearMap, chi: &Restriction, u: &Universe) -> Result<Option<Mismatch>> {
    let m = UMatrix::materialize(a, u)?;
    let t = SplitTable::build(chi, u)?;
    Ok(local_witness(&m, &t, u))
}

/// Strict locality: `A`, `A†A` and `AA†` are `χ`-local. Cross-checked
/// against locality plus consistency preservation, which only agree when
/// the universe is closed under `A†` as well as `A`.
pub fn is_strictly_local(
    a: &dyn LinearMap,
    chi: &Restriction,
    u: &Universe,
) -> Result<CheckReport> {
    let m = UMatrix::materialize(a, u)?;
    let t = SplitTable::build(chi, u)?;
    let adj = m.adjoint();
    let mut first = None;
    for (which, op) in [
        ("A", m.clone()),
        ("A^dagger A", adj.mul(&m)),
        ("A A^dagger", m.mul(&adj)),
    ] {
        if let Some(w) = local_witness(&op, &t, u) {
            first = Some((which, w));
            break;
        }
    }
    let local = first.as_ref().map_or(true, |(w, _)| *w != "A");
    let cp = consistent_preserving(&m.to_operator(u), chi, u)?;
    let via_cp = local && cp.is_none();
    let strict = first.is_none();
    let status = if strict != via_cp {
        CheckStatus::InternalDisagreement
    } else if strict {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let witness = first.map(|(which, w)| {
        let mut v = mismatch_json(&w);
        v["operator"] = json!(which);
        v
    });
    let mut r = CheckReport::new("strict-locality", status, witness)
        .count("local", local as u64)
        .count("consistent_preserving", cp.is_none() as u64);
    if let Some((g, h, which)) = cp {
        r.counts.insert("cp_failures".into(), 1);
        if r.witness.is_none() {
            r.witness = Some(json!({"G": g.to_string(), "H": h.to_string(), "operator": which}));
        }
    }
    Ok(r)
}

/// `(Aρ)_{|∅} = (Aρ_{|χ})_{|∅}` on every dyad, evaluated with the partial
/// trace, then compared with [`is_local`].
pub fn dual_locality_check(
    a: &dyn LinearMap,
    chi: &Restriction,
    u: &Universe,
) -> Result<CheckReport> {
    let m = UMatrix::materialize(a, u)?.to_operator(u);
    let n = u.len();
    let hit = (0..n).into_par_iter().find_map_first(|i| {
        let g = u.graph(i);
        let ag = m.column(g);
        (0..n).find_map(|j| {
            let h = u.graph(j);
            let rho = OperatorMatrix::from_entries([(g.clone(), h.clone(), C64::new(1.0, 0.0))]);
            let lhs = ag.get(h);
            let traced = partial_trace(&rho, chi);
            let rhs = m.mul(&traced).full_trace();
            ((lhs - rhs).norm() > TOL).then(|| Mismatch {
                ket: h.clone(),
                bra: g.clone(),
                lhs,
                rhs,
            })
        })
    });
    let local = is_local(a, chi, u)?;
    let dual = hit.is_none();
    let status = if dual != local.is_none() {
        CheckStatus::InternalDisagreement
    } else if dual {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(
        CheckReport::new("dual-locality", status, hit.as_ref().map(mismatch_json))
            .count("dyads", (n * n) as u64),
    )
}

/// Rebuild `ρ_{|χ}` from the expectations `(E ρ)_{|∅}` of the probes
/// `E = |b⟩⟨a| ⊗_χ I`, `a, b` ranging over `χ`-images. With `np_only` only
/// name-preserving probes are used.
pub fn tomography_reconstruct(
    rho: &OperatorMatrix,
    chi: &Restriction,
    u: &Universe,
    np_only: bool,
) -> Result<OperatorMatrix> {
    let images = range(chi, u);
    for g in rho.support() {
        if !u.contains(&g) {
            return Err(QnetError::SupportEscape {
                graph: g.to_string(),
            });
        }
    }
    let entries = rho.entries();
    let mut out = OperatorMatrix::zero();
    for a in &images {
        for b in &images {
            if np_only && a.regions() != b.regions() {
                continue;
            }
            let probe = Operator::localized(
                Operator::matrix(OperatorMatrix::from_entries([(
                    b.clone(),
                    a.clone(),
                    C64::new(1.0, 0.0),
                )])),
                chi.clone(),
            );
            // Tr(E ρ) = Σ ⟨L|E|K⟩ ρ_{KL}
            let mut alpha = C64::default();
            for (k, l, x) in &entries {
                alpha += probe.apply_basis(k).get(l) * x;
            }
            out.add_entry(a.clone(), b.clone(), alpha);
        }
    }
    Ok(out)
}

/// `U ⊗_χ I` for a name-preserving unitary `U` over `ℋ_χ`, `χ` pointwise.
pub fn extend_unitary(
    op: &OperatorMatrix,
    chi: &Restriction,
    u: &Universe,
) -> Result<LocalizedOperator> {
    if !chi.is_pointwise() {
        return Err(QnetError::precondition(
            "pointwise",
            format!("{chi} is not pointwise"),
        ));
    }
    if let Some(g) = op.support().into_iter().find(|g| &chi.apply(g) != g) {
        return Err(QnetError::precondition(
            "support",
            format!("{g} is not a fixed point of {chi}"),
        ));
    }
    if let Some((h, g)) = is_name_preserving(op) {
        return Err(QnetError::precondition(
            "np",
            format!("entry ({h}, {g}) changes the names"),
        ));
    }
    let slice = Universe::new(
        "slice",
        u.graphs().iter().filter(|g| &chi.apply(g) == *g).cloned(),
    );
    let m = UMatrix::materialize(op, &slice)
        .map_err(|e| QnetError::precondition("unitarity", e.to_string()))?;
    if let Some(w) = unitary_witness(&m, &slice) {
        return Err(QnetError::precondition(
            "unitarity",
            format!("at ({}, {})", w.ket, w.bra),
        ));
    }
    let ext = LocalizedOperator::new(Operator::matrix(op.clone()), chi.clone());
    if let Some(w) = crate::hilbert::is_unitary_on(&ext, u)? {
        return Err(QnetError::Internal(format!(
            "extension not unitary at ({}, {})",
            w.ket, w.bra
        )));
    }
    if let Some((h, g)) = crate::hilbert::is_name_preserving_on(&ext, u) {
        return Err(QnetError::Internal(format!(
            "extension not name-preserving at ({h}, {g})"
        )));
    }
    Ok(ext)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalWitness {
    pub g: Graph,
    pub h: Graph,
    pub detail: String,
}

type DyadTerms = Vec<((u32, u32), C64)>;

/// `(|x⟩⟨y|)_{|ζ}` summed over the columns `x`, `y`.
fn traced_dyad(x: &[(u32, C64)], y: &[(u32, C64)], tz: &SplitTable) -> DyadTerms {
    let mut v: DyadTerms = Vec::new();
    for &(a, p) in x {
        for &(b, q) in y {
            if tz.outside[a as usize] == tz.outside[b as usize] {
                v.push(((tz.inside[a as usize], tz.inside[b as usize]), p * q.conj()));
            }
        }
    }
    v.sort_by_key(|e| e.0);
    let mut merged: DyadTerms = Vec::with_capacity(v.len());
    for (k, a) in v {
        match merged.last_mut() {
            Some(last) if last.0 == k => last.1 += a,
            _ => merged.push((k, a)),
        }
    }
    merged.retain(|e| e.1.norm() > TOL * 1e-2);
    merged
}

fn dyad_diff(a: &DyadTerms, b: &DyadTerms) -> Option<((u32, u32), C64, C64)> {
    let mut all: BTreeMap<(u32, u32), (C64, C64)> = BTreeMap::new();
    for (k, x) in a {
        all.entry(*k).or_default().0 += x;
    }
    for (k, x) in b {
        all.entry(*k).or_default().1 += x;
    }
    all.into_iter()
        .find(|(_, (x, y))| (x - y).norm() > TOL)
        .map(|(k, (x, y))| (k, x, y))
}

/// Checks `(UρU†)_{|ζ} = (Uρ_{|χ}U†)_{|ζ}` on every dyad `ρ = |G⟩⟨H|` (only
/// corresponding pairs in the name-preserving sector). `None` means causal.
pub fn is_causal(
    op: &dyn LinearMap,
    spec: &CausalitySpec,
    u: &Universe,
) -> Result<Option<CausalWitness>> {
    let m = UMatrix::materialize(op, u)?;
    if let Some(w) = unitary_witness(&m, u) {
        return Err(QnetError::NotUnitary {
            detail: format!("at ({}, {})", w.ket, w.bra),
        });
    }
    causal_witness(&m, spec, u)
}

pub fn causal_witness(
    m: &UMatrix,
    spec: &CausalitySpec,
    u: &Universe,
) -> Result<Option<CausalWitness>> {
    let tc = SplitTable::build(&spec.chi, u)?;
    let tz = SplitTable::build(&spec.zeta, u)?;
    let classes = name_classes(u);
    if spec.np_sector {
        if let Some((r, c, _)) = m.entries().find(|(r, c, _)| classes[*r] != classes[*c]) {
            return Ok(Some(CausalWitness {
                g: u.graph(c).clone(),
                h: u.graph(r).clone(),
                detail: "operator is not name-preserving".into(),
            }));
        }
    }
    let n = u.len();
    let hit = (0..n).into_par_iter().find_map_first(|i| {
        let (ci, cci) = (m.col(i), m.col(tc.inside(i)));
        (0..n).find_map(|j| {
            if spec.np_sector && classes[i] != classes[j] {
                return None;
            }
            let lhs = traced_dyad(ci, m.col(j), &tz);
            let rhs = if tc.outside(i) == tc.outside(j) {
                traced_dyad(cci, m.col(tc.inside(j)), &tz)
            } else {
                Vec::new()
            };
            dyad_diff(&lhs, &rhs).map(|((a, b), x, y)| CausalWitness {
                g: u.graph(i).clone(),
                h: u.graph(j).clone(),
                detail: format!(
                    "entry |{}><{}|: {:.6}{:+.6}i vs {:.6}{:+.6}i",
                    u.graph(a as usize),
                    u.graph(b as usize),
                    x.re,
                    x.im,
                    y.re,
                    y.im
                ),
            })
        })
    });
    Ok(hit)
}

pub fn causal_witness_json(w: &CausalWitness) -> Value {
    json!({"G": w.g.to_string(), "H": w.h.to_string(), "detail": w.detail})
}

/// Heisenberg-picture causality: for each probe `A = |a⟩⟨b| ⊗_ζ I`,
/// `U†AU` must be `χ`-local, and strictly so when `A` is. The verdict is
/// compared with [`is_causal`].
pub fn dual_causality_check(
    op: &dyn LinearMap,
    spec: &CausalitySpec,
    u: &Universe,
) -> Result<CheckReport> {
    let m = UMatrix::materialize(op, u)?;
    if let Some(w) = unitary_witness(&m, u) {
        return Err(QnetError::NotUnitary {
            detail: format!("at ({}, {})", w.ket, w.bra),
        });
    }
    let direct = causal_witness(&m, spec, u)?;
    let tc = SplitTable::build(&spec.chi, u)?;
    let tz = SplitTable::build(&spec.zeta, u)?;
    let adj = m.adjoint();
    let images = range(&spec.zeta, u);
    let mut probes = Vec::new();
    for a in &images {
        for b in &images {
            if !spec.np_sector || a.regions() == b.regions() {
                probes.push((a.clone(), b.clone()));
            }
        }
    }
    let np_bad = spec.np_sector && {
        let classes = name_classes(u);
        m.entries().any(|(r, c, _)| classes[r] != classes[c])
    };
    let results: Vec<Result<Option<(Value, bool)>>> = probes
        .par_iter()
        .map(|(a, b)| {
            let probe = Operator::localized(
                Operator::matrix(OperatorMatrix::from_entries([(
                    a.clone(),
                    b.clone(),
                    C64::new(1.0, 0.0),
                )])),
                spec.zeta.clone(),
            );
            let pm = UMatrix::materialize(&probe, u)?;
            let conj = adj.mul(&pm).mul(&m);
            if let Some(w) = local_witness(&conj, &tc, u) {
                return Ok(Some((
                    json!({"probe": [a.to_string(), b.to_string()], "mismatch": mismatch_json(&w)}),
                    false,
                )));
            }
            let pa = pm.adjoint();
            let strict_probe = local_witness(&pa.mul(&pm), &tz, u).is_none()
                && local_witness(&pm.mul(&pa), &tz, u).is_none();
            if strict_probe {
                let ca = conj.adjoint();
                if local_witness(&ca.mul(&conj), &tc, u).is_some()
                    || local_witness(&conj.mul(&ca), &tc, u).is_some()
                {
                    return Ok(Some((
                        json!({"probe": [a.to_string(), b.to_string()], "strictness": "lost"}),
                        true,
                    )));
                }
            }
            Ok(None)
        })
        .collect();
    let mut first = None;
    let mut strict_lost = false;
    for r in results {
        if let Some((w, strict)) = r? {
            strict_lost |= strict;
            if first.is_none() {
                first = Some(w);
            }
        }
    }
    let dual = first.is_none() && !np_bad;
    let status = if dual != direct.is_none() || (strict_lost && direct.is_none()) {
        CheckStatus::InternalDisagreement
    } else if dual {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let witness = first.or_else(|| direct.as_ref().map(causal_witness_json));
    Ok(CheckReport::new("dual-causality", status, witness).count("probes", probes.len() as u64))
}

/// Extend a causal unitary over `ℋ_μ` to the whole universe. Returns
/// `U ⊗_μ I` and the cause region `μχ ∪ μ̄ζ`.
pub fn causal_extension(
    op: &Operator,
    mu: &Restriction,
    spec: &CausalitySpec,
    u: &Universe,
) -> Result<(LocalizedOperator, Restriction)> {
    if !mu.is_pointwise() {
        return Err(QnetError::precondition(
            "pointwise",
            format!("{mu} is not pointwise"),
        ));
    }
    if let Some((g, why)) = commutes(mu, &spec.zeta, u, true) {
        return Err(QnetError::precondition(
            "commutation",
            format!("{g}: {why}"),
        ));
    }
    let slice = Universe::new(
        "slice",
        u.graphs().iter().filter(|g| &mu.apply(g) == *g).cloned(),
    );
    let m = UMatrix::materialize(op, &slice)
        .map_err(|e| QnetError::precondition("support", e.to_string()))?;
    if let Some(w) = unitary_witness(&m, &slice) {
        return Err(QnetError::precondition(
            "unitarity",
            format!("at ({}, {})", w.ket, w.bra),
        ));
    }
    let classes = name_classes(&slice);
    if m.entries().any(|(r, c, _)| classes[r] != classes[c]) {
        return Err(QnetError::precondition("np", "operator changes the names"));
    }
    if let Some(w) = causal_witness(&m, spec, &slice)? {
        return Err(QnetError::precondition(
            "causality",
            format!("G = {}, H = {}: {}", w.g, w.h, w.detail),
        ));
    }
    let not_mu = mu.pointwise_complement().expect("pointwise");
    let xi = Restriction::union(
        Restriction::compose(mu.clone(), spec.chi.clone()),
        Restriction::compose(not_mu, spec.zeta.clone()),
    );
    let ext = LocalizedOperator::new(op.clone(), mu.clone());
    let post = CausalitySpec::new(xi.clone(), spec.zeta.clone(), spec.np_sector);
    if let Some(w) = is_causal(&ext, &post, u)? {
        return Err(QnetError::Internal(format!(
            "extension not causal: G = {}, H = {}: {}",
            w.g, w.h, w.detail
        )));
    }
    Ok((ext, xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::System;
    use crate::hilbert::real;
    use crate::names::Name;

    /// The locality equation on every pair, no shortcuts.
    fn local_exhaustive(a: &dyn LinearMap, chi: &Restriction, u: &Universe) -> bool {
        let m = a_matrix(a, u);
        u.graphs().iter().all(|g| {
            let (gc, gr) = chi.split(g);
            u.graphs().iter().all(|h| {
                let (hc, hr) = chi.split(h);
                let rhs = if hr == gr {
                    m.entry(&hc, &gc)
                } else {
                    real(0.0)
                };
                (m.entry(h, g) - rhs).norm() <= TOL
            })
        })
    }

    fn a_matrix(a: &dyn LinearMap, u: &Universe) -> OperatorMatrix {
        UMatrix::materialize(a, u).unwrap().to_operator(u)
    }

    fn g(systems: &[(&str, i64)]) -> Graph {
        Graph::new(systems.iter().map(|(s, k)| System::new(*s, Name::atom(*k)))).unwrap()
    }

    #[test]
    fn swap_is_not_local_to_one_node() {
        let u = crate::graphs::Universe::default_small();
        let (a, b) = (g(&[("0", 1), ("1", 2)]), g(&[("1", 1), ("0", 2)]));
        let mut entries: Vec<(Graph, Graph, C64)> = u
            .graphs()
            .iter()
            .map(|x| (x.clone(), x.clone(), real(1.0)))
            .collect();
        entries.retain(|(x, _, _)| x != &a && x != &b);
        entries.push((a.clone(), b.clone(), real(1.0)));
        entries.push((b, a, real(1.0)));
        let swap = OperatorMatrix::from_entries(entries);
        let chi = Restriction::zeta(Name::atom(1));
        assert!(is_local(&swap, &chi, &u).unwrap().is_some());
        assert!(!local_exhaustive(&swap, &chi, &u));
        assert!(is_local(&swap, &Restriction::Full, &u).unwrap().is_none());
        assert!(is_local(&Operator::Identity, &chi, &u).unwrap().is_none());
        assert_eq!(
            dual_locality_check(&swap, &chi, &u).unwrap().status,
            CheckStatus::Fail
        );
    }

    #[test]
    fn sparse_locality_agrees_with_exhaustive() {
        let u = crate::graphs::Universe::default_small();
        let mut r = crate::tensor_trace::gen::rng(7);
        let chis = [
            Restriction::state("0"),
            Restriction::disk(Restriction::zeta(Name::atom(1)), 1, false),
            Restriction::zeta_overlap(Name::atom(2)),
        ];
        for chi in &chis {
            for k in 0..6 {
                let a = if k % 2 == 0 {
                    crate::tensor_trace::gen::matrix(&mut r, u.graphs(), u.graphs(), 1)
                } else {
                    let imgs = range(chi, &u);
                    let mut inner = crate::tensor_trace::gen::matrix(&mut r, &imgs, &imgs, 1);
                    // keep entries whose images stay inside the universe
                    let stays = |h: &Graph, g0: &Graph| {
                        u.graphs().iter().filter(|x| &chi.apply(x) == g0).all(|x| {
                            let rest = chi.complement(x);
                            crate::tensor_trace::tensor_basis(h, &rest, chi)
                                .map_or(true, |y| u.contains(&y))
                        })
                    };
                    inner = OperatorMatrix::from_entries(
                        inner
                            .entries()
                            .into_iter()
                            .filter(|(h, g0, _)| stays(h, g0)),
                    );
                    Operator::localized(Operator::matrix(inner), chi.clone()).to_matrix_on(&u)
                };
                let sparse = is_local(&a, chi, &u).unwrap().is_none();
                assert_eq!(sparse, local_exhaustive(&a, chi, &u), "{chi} sample {k}");
            }
        }
    }

    #[test]
    fn identity_is_causal_for_equal_regions() {
        let u = crate::graphs::Universe::default_small();
        let z = Restriction::zeta(Name::atom(1));
        let spec = CausalitySpec::new(z.clone(), z, false);
        assert!(is_causal(&Operator::Identity, &spec, &u).unwrap().is_none());
    }

    #[test]
    fn lossy_operator_is_rejected() {
        let u = crate::graphs::Universe::default_small();
        let z = Restriction::zeta(Name::atom(1));
        let spec = CausalitySpec::new(z.clone(), z, false);
        assert!(matches!(
            is_causal(&OperatorMatrix::zero(), &spec, &u),
            Err(QnetError::NotUnitary { .. })
        ));
    }

    #[test]
    fn extension_preconditions() {
        let u = crate::graphs::Universe::default_small();
        let chi = Restriction::zeta(Name::atom(1));
        let (e, a, b) = (Graph::empty(), g(&[("0", 1)]), g(&[("1", 1)]));
        let flip = OperatorMatrix::from_entries([
            (e.clone(), e.clone(), real(1.0)),
            (a.clone(), b.clone(), real(1.0)),
            (b.clone(), a.clone(), real(1.0)),
        ]);
        let ext = extend_unitary(&flip, &chi, &u).unwrap();
        assert!(crate::hilbert::is_unitary_on(&ext, &u).unwrap().is_none());
        let id = OperatorMatrix::from_entries([
            (e.clone(), e.clone(), real(1.0)),
            (a.clone(), a.clone(), real(1.0)),
            (b.clone(), b.clone(), real(1.0)),
        ]);
        let ext_id = extend_unitary(&id, &chi, &u).unwrap();
        assert!(
            crate::hilbert::operator_equal_on(&ext_id, &Operator::Identity, &u, TOL)
                .unwrap()
                .is_none()
        );

        let w = Restriction::state("w");
        let (x, y) = (g(&[("w", 2)]), g(&[("w", 3)]));
        let renamer =
            OperatorMatrix::from_entries([(y.clone(), x.clone(), real(1.0)), (x, y, real(1.0))]);
        let err = extend_unitary(&renamer, &w, &u).unwrap_err();
        assert!(matches!(err, QnetError::PreconditionFailed { ref kind, .. } if kind == "np"));
        let disk = Restriction::disk(chi, 1, false);
        assert!(matches!(
            extend_unitary(&flip, &disk, &u),
            Err(QnetError::PreconditionFailed { .. })
        ));
    }

    #[test]
    fn tomography_of_a_pure_graph() {
        let u = crate::graphs::Universe::default_small();
        let chi = Restriction::state("0");
        let gg = g(&[("0", 1), ("1", 2)]);
        let rho = OperatorMatrix::from_entries([(gg.clone(), gg.clone(), real(1.0))]);
        let rec = tomography_reconstruct(&rho, &chi, &u, false).unwrap();
        let gc = chi.apply(&gg);
        assert!(rec.approx_eq(
            &OperatorMatrix::from_entries([(gc.clone(), gc, real(1.0))]),
            TOL
        ));
    }
}
