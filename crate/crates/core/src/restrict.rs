//! Restrictions: maps picking a subgraph `G_χ` out of every graph `G`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{QnetError, Result};
use crate::graphs::{Graph, State, System, Universe};
use crate::names::{corresponds, Name, RegionSet};

/// A per-system test, used by pointwise restrictions.
#[derive(Clone)]
pub enum Predicate {
    StateIs(State),
    StateIn(Vec<State>),
    /// The state label starts with this ancilla bit.
    Bit(bool),
    VertexIs(Name),
    Not(Box<Predicate>),
    /// Dropped by a pointwise restriction.
    Outside(Box<Restriction>),
    Custom {
        label: String,
        f: Arc<dyn Fn(&System) -> bool + Send + Sync>,
    },
}

impl Predicate {
    pub fn holds(&self, s: &System) -> bool {
        match self {
            Predicate::StateIs(x) => &s.state == x,
            Predicate::StateIn(xs) => xs.contains(&s.state),
            Predicate::Bit(b) => s.state.as_str().starts_with(if *b { '1' } else { '0' }),
            Predicate::VertexIs(v) => &s.vertex == v,
            Predicate::Not(p) => !p.holds(s),
            Predicate::Outside(r) => !r.keeps_system(s),
            Predicate::Custom { f, .. } => f(s),
        }
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(&System) -> bool + Send + Sync + 'static,
    ) -> Predicate {
        Predicate::Custom {
            label: label.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::StateIs(x) => write!(f, "state={x}"),
            Predicate::StateIn(xs) => {
                let v: Vec<&str> = xs.iter().map(|s| s.as_str()).collect();
                write!(f, "states={{{}}}", v.join(","))
            }
            Predicate::Bit(b) => write!(f, "bit={}", *b as u8),
            Predicate::VertexIs(v) => write!(f, "vertex={v}"),
            Predicate::Not(p) => write!(f, "not({p})"),
            Predicate::Outside(r) => write!(f, "outside({r})"),
            Predicate::Custom { label, .. } => write!(f, "custom:{label}"),
        }
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SelectMode {
    Exact,
    Overlap,
}

#[derive(Clone, Debug)]
pub enum Restriction {
    Full,
    Empty,
    Pointwise(Predicate),
    /// Systems whose vertex is `v` (or overlaps `v`).
    VertexSelect {
        v: Name,
        mode: SelectMode,
    },
    /// Systems within `r` edge hops of the base selection. The oriented
    /// variant only walks edges pointing into the current set.
    Disk {
        base: Box<Restriction>,
        r: usize,
        oriented: bool,
    },
    /// Systems whose vertex avoids every region of `S` and of `-S`.
    Namewise(Vec<Name>),
    Union(Box<Restriction>, Box<Restriction>),
    /// `Compose(a, b)` maps `G` to `(G_a)_b`.
    Compose(Box<Restriction>, Box<Restriction>),
}

impl Restriction {
    pub fn zeta(v: Name) -> Restriction {
        Restriction::VertexSelect {
            v,
            mode: SelectMode::Exact,
        }
    }

    pub fn zeta_overlap(v: Name) -> Restriction {
        Restriction::VertexSelect {
            v,
            mode: SelectMode::Overlap,
        }
    }

    pub fn disk(base: Restriction, r: usize, oriented: bool) -> Restriction {
        Restriction::Disk {
            base: Box::new(base),
            r,
            oriented,
        }
    }

    pub fn state(s: &str) -> Restriction {
        Restriction::Pointwise(Predicate::StateIs(State::new(s)))
    }

    pub fn bit(b: bool) -> Restriction {
        Restriction::Pointwise(Predicate::Bit(b))
    }

    pub fn union(a: Restriction, b: Restriction) -> Restriction {
        Restriction::Union(Box::new(a), Box::new(b))
    }

    pub fn compose(a: Restriction, b: Restriction) -> Restriction {
        Restriction::Compose(Box::new(a), Box::new(b))
    }

    /// `G_χ`.
    pub fn apply(&self, g: &Graph) -> Graph {
        match self {
            Restriction::Full => g.clone(),
            Restriction::Empty => Graph::empty(),
            Restriction::Pointwise(p) => g.filter(|s| p.holds(s)),
            Restriction::VertexSelect {
                v,
                mode: SelectMode::Exact,
            } => g.filter(|s| &s.vertex == v),
            Restriction::VertexSelect {
                v,
                mode: SelectMode::Overlap,
            } => {
                let rv = v.regions();
                g.filter(|s| s.vertex.regions().overlaps(&rv))
            }
            Restriction::Namewise(names) => {
                let signed: Vec<Name> =
                    names.iter().flat_map(|n| [n.clone(), n.negate()]).collect();
                let avoid = RegionSet::of_names(&signed);
                g.filter(|s| !s.vertex.regions().overlaps(&avoid))
            }
            Restriction::Disk { base, r, oriented } => disk_of(g, &base.apply(g), *r, *oriented),
            Restriction::Union(a, b) => {
                let (ga, gb) = (a.apply(g), b.apply(g));
                g.filter(|s| ga.contains(s) || gb.contains(s))
            }
            Restriction::Compose(a, b) => b.apply(&a.apply(g)),
        }
    }

    /// `G_χ̄ = G ∖ G_χ`.
    pub fn complement(&self, g: &Graph) -> Graph {
        g.minus(&self.apply(g))
    }

    /// `(G_χ, G_χ̄)`.
    pub fn split(&self, g: &Graph) -> (Graph, Graph) {
        let inside = self.apply(g);
        let outside = g.minus(&inside);
        (inside, outside)
    }

    /// Decided system by system, independently of the rest of the graph.
    pub fn is_pointwise(&self) -> bool {
        match self {
            Restriction::Full | Restriction::Empty | Restriction::Pointwise(_) => true,
            Restriction::VertexSelect { .. } | Restriction::Namewise(_) => true,
            Restriction::Disk { .. } => false,
            Restriction::Union(a, b) | Restriction::Compose(a, b) => {
                a.is_pointwise() && b.is_pointwise()
            }
        }
    }

    /// `μ̄` as a restriction in its own right, for pointwise `μ`.
    pub fn pointwise_complement(&self) -> Option<Restriction> {
        match self {
            Restriction::Full => Some(Restriction::Empty),
            Restriction::Empty => Some(Restriction::Full),
            Restriction::Pointwise(p) => {
                Some(Restriction::Pointwise(Predicate::Not(Box::new(p.clone()))))
            }
            r if r.is_pointwise() => Some(Restriction::Pointwise(Predicate::Outside(Box::new(
                r.clone(),
            )))),
            _ => None,
        }
    }

    /// The per-system test of a pointwise restriction.
    pub fn keeps_system(&self, s: &System) -> bool {
        debug_assert!(self.is_pointwise());
        let g = Graph::from_valid([s.clone()]);
        !self.apply(&g).is_empty()
    }
}

fn disk_of(g: &Graph, base: &Graph, r: usize, oriented: bool) -> Graph {
    let sys = g.systems();
    let mut inside: Vec<bool> = sys.iter().map(|s| base.contains(s)).collect();
    if r == 0 || inside.iter().all(|b| !b) {
        return g.filter(|s| base.contains(s));
    }
    let edges = g.edge_indices();
    for _ in 0..r {
        let mut next = inside.clone();
        for &(i, j) in &edges {
            if inside[j] {
                next[i] = true;
            }
            if !oriented && inside[i] {
                next[j] = true;
            }
        }
        if next == inside {
            break;
        }
        inside = next;
    }
    let mut k = 0;
    g.filter(|_| {
        k += 1;
        inside[k - 1]
    })
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::Full => f.write_str("full"),
            Restriction::Empty => f.write_str("empty"),
            Restriction::Pointwise(p) => write!(f, "pointwise({p})"),
            Restriction::VertexSelect {
                v,
                mode: SelectMode::Exact,
            } => write!(f, "zeta(v={v})"),
            Restriction::VertexSelect {
                v,
                mode: SelectMode::Overlap,
            } => write!(f, "zeta(v={v},mode=overlap)"),
            Restriction::Disk { base, r, oriented } => {
                write!(f, "disk({base},r={r},oriented={oriented})")
            }
            Restriction::Namewise(names) => {
                let v: Vec<String> = names.iter().map(|n| n.to_string()).collect();
                write!(f, "namewise(S={{{}}})", v.join(","))
            }
            Restriction::Union(a, b) => write!(f, "union({a},{b})"),
            Restriction::Compose(a, b) => write!(f, "compose({a},{b})"),
        }
    }
}

/// Anything that claims to pick subgraphs; used to validate candidates that
/// are not built from the constructors above.
pub trait SubgraphMap: Sync {
    fn restrict(&self, g: &Graph) -> Graph;
    fn describe(&self) -> String;
}

impl SubgraphMap for Restriction {
    fn restrict(&self, g: &Graph) -> Graph {
        self.apply(g)
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

pub struct FnMap<F> {
    pub label: String,
    pub f: F,
}

impl<F: Fn(&Graph) -> Graph + Sync> SubgraphMap for FnMap<F> {
    fn restrict(&self, g: &Graph) -> Graph {
        (self.f)(g)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionViolation {
    pub graph: Graph,
    pub detail: String,
}

/// Checks that `f` is a restriction on the universe: its image is a
/// subgraph, it is idempotent, `(G_χ)_χ̄ = ∅`, and every `H` between `G_χ`
/// and `G` has `H_χ = G_χ`. Returns the number of `(G, H)` pairs examined.
pub fn validate_restriction(
    f: &dyn SubgraphMap,
    u: &Universe,
) -> std::result::Result<usize, RestrictionViolation> {
    let results: Vec<std::result::Result<usize, RestrictionViolation>> = u
        .graphs()
        .par_iter()
        .map(|g| {
            let fail = |detail: String| RestrictionViolation {
                graph: g.clone(),
                detail,
            };
            let gc = f.restrict(g);
            if !gc.is_subgraph_of(g) {
                return Err(fail(format!("image {gc} is not a subgraph")));
            }
            let again = f.restrict(&gc);
            if again != gc {
                return Err(fail(format!("not idempotent: {gc} restricts to {again}")));
            }
            let rest = g.minus(&gc);
            let mut n = 0;
            for extra in rest.subgraphs() {
                let h = Graph::from_valid(gc.systems().iter().chain(extra.systems()).cloned());
                let hc = f.restrict(&h);
                n += 1;
                if hc != gc {
                    return Err(fail(format!(
                        "intermediate {h} restricts to {hc}, expected {gc}"
                    )));
                }
            }
            Ok(n)
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(total)
}

fn select(r: &Restriction, g: &Graph, comp: bool) -> Graph {
    if comp {
        r.complement(g)
    } else {
        r.apply(g)
    }
}

/// `[a, b] = 0` as set maps, and optionally the three commutators with
/// complements. Returns the first failing graph.
pub fn commutes(
    a: &Restriction,
    b: &Restriction,
    u: &Universe,
    with_complements: bool,
) -> Option<(Graph, String)> {
    let combos: &[(bool, bool)] = if with_complements {
        &[(false, false), (true, false), (false, true), (true, true)]
    } else {
        &[(false, false)]
    };
    u.graphs().par_iter().find_map_first(|g| {
        combos.iter().find_map(|&(ca, cb)| {
            let ab = select(b, &select(a, g, ca), cb);
            let ba = select(a, &select(b, g, cb), ca);
            (ab != ba).then(|| {
                let bar = |c: bool| if c { "bar" } else { "" };
                (
                    g.clone(),
                    format!(
                        "a{} then b{} gives {ab}, reverse gives {ba}",
                        bar(ca),
                        bar(cb)
                    ),
                )
            })
        })
    })
}

/// Index-level split of every graph of a subset-closed universe.
#[derive(Clone, Debug)]
pub struct SplitTable {
    pub inside: Vec<u32>,
    pub outside: Vec<u32>,
}

impl SplitTable {
    pub fn build(r: &Restriction, u: &Universe) -> Result<SplitTable> {
        let pairs: Result<Vec<(u32, u32)>> = u
            .graphs()
            .par_iter()
            .map(|g| {
                let (a, b) = r.split(g);
                let ia = u.index_of(&a).ok_or_else(|| QnetError::SupportEscape {
                    graph: a.to_string(),
                })?;
                let ib = u.index_of(&b).ok_or_else(|| QnetError::SupportEscape {
                    graph: b.to_string(),
                })?;
                Ok((ia as u32, ib as u32))
            })
            .collect();
        let (inside, outside) = pairs?.into_iter().unzip();
        Ok(SplitTable { inside, outside })
    }

    pub fn inside(&self, i: usize) -> usize {
        self.inside[i] as usize
    }

    pub fn outside(&self, i: usize) -> usize {
        self.outside[i] as usize
    }
}

/// Interns graphs of correspondence classes so that `V(G) ≏ V(H)` becomes an
/// integer comparison.
pub fn name_classes(u: &Universe) -> Vec<u32> {
    let mut ids: HashMap<RegionSet, u32> = HashMap::new();
    u.graphs()
        .iter()
        .map(|g| {
            let n = ids.len() as u32;
            *ids.entry(g.regions()).or_insert(n)
        })
        .collect()
}

/// `ζ ⊑ χ`: `G_χζ = G_ζ`, and `δ(H_ζ̄, G_ζ̄) = δ(H_χζ̄, G_χζ̄) δ(H_χ̄, G_χ̄)`
/// for all pairs (name-preserving pairs only, if asked). Returns a witness
/// on failure.
pub fn comprehended(
    zeta: &Restriction,
    chi: &Restriction,
    u: &Universe,
    np_only: bool,
) -> Option<String> {
    let first = u.graphs().par_iter().find_map_first(|g| {
        let a = zeta.apply(&chi.apply(g));
        let b = zeta.apply(g);
        (a != b).then(|| format!("G = {g}: G_chi,zeta = {a} but G_zeta = {b}"))
    });
    if first.is_some() {
        return first;
    }
    let mut intern: HashMap<Graph, u32> = HashMap::new();
    let mut id = |g: Graph| {
        let n = intern.len() as u32;
        *intern.entry(g).or_insert(n)
    };
    let keys: Vec<(u32, u32, u32)> = u
        .graphs()
        .iter()
        .map(|g| {
            let gc = chi.apply(g);
            (
                id(zeta.complement(g)),
                id(zeta.complement(&gc)),
                id(g.minus(&gc)),
            )
        })
        .collect();
    let classes = name_classes(u);
    let n = u.len();
    (0..n).into_par_iter().find_map_first(|i| {
        (0..n).find_map(|j| {
            if np_only && classes[i] != classes[j] {
                return None;
            }
            let lhs = keys[i].0 == keys[j].0;
            let rhs = keys[i].1 == keys[j].1 && keys[i].2 == keys[j].2;
            (lhs != rhs).then(|| {
                format!(
                    "G = {}, H = {}: {} vs {}",
                    u.graph(i),
                    u.graph(j),
                    lhs as u8,
                    rhs as u8
                )
            })
        })
    })
}

/// Correspondence of two graphs' vertex sets.
pub fn name_preserving_pair(g: &Graph, h: &Graph) -> bool {
    corresponds(&g.vertices(), &h.vertices())
}

/// The set of `G_χ` over the universe, sorted.
pub fn range(r: &Restriction, u: &Universe) -> Vec<Graph> {
    let set: BTreeSet<Graph> = u.graphs().iter().map(|g| r.apply(g)).collect();
    set.into_iter().collect()
}
