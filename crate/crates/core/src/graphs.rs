//! Graphs as sets of named systems, and finite universes of graphs.
//!
//! Edges are never stored. A system holding `-x` points at the system holding
//! `x`, whenever the two leaves are nested.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{QnetError, Result};
use crate::names::{Key, Name, Region, RegionSet, Renaming, Suffix};

/// An internal state label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct State(pub String);

impl State {
    pub fn new(s: impl Into<String>) -> State {
        State(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct System {
    pub state: State,
    pub vertex: Name,
}

impl System {
    pub fn new(state: impl Into<String>, vertex: Name) -> System {
        System {
            state: State::new(state),
            vertex,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.state, self.vertex)
    }
}

/// A well-named finite set of systems. Systems are kept sorted by their
/// rendering, which makes the rendering canonical.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    systems: Vec<System>,
}

/// First pair of nested leaves among the systems, if any.
fn overlap_witness(systems: &[System]) -> Option<(usize, usize)> {
    let mut leaves: Vec<(Region, usize)> = systems
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.vertex.leaves().into_iter().map(move |r| (r, i)))
        .collect();
    leaves.sort();
    // in sorted order, a nested pair always shows up as some adjacent pair
    leaves
        .windows(2)
        .find(|w| w[0].0.comparable(&w[1].0))
        .map(|w| (w[0].1, w[1].1))
}

impl Graph {
    pub fn empty() -> Graph {
        Graph::default()
    }

    pub fn new(systems: impl IntoIterator<Item = System>) -> Result<Graph> {
        let g = Graph::from_valid(systems);
        if let Some((i, j)) = overlap_witness(&g.systems) {
            return Err(QnetError::WellNamednessViolation {
                first: g.systems[i].to_string(),
                second: g.systems[j].to_string(),
            });
        }
        Ok(g)
    }

    /// Build without checking well-namedness. Callers pass subsets or images
    /// of graphs already known to be well-named.
    pub fn from_valid(systems: impl IntoIterator<Item = System>) -> Graph {
        let mut keyed: Vec<(String, System)> =
            systems.into_iter().map(|s| (s.to_string(), s)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        Graph {
            systems: keyed.into_iter().map(|(_, s)| s).collect(),
        }
    }

    pub fn systems(&self) -> &[System] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn contains(&self, s: &System) -> bool {
        self.systems.contains(s)
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.systems.iter().all(|s| other.contains(s))
    }

    /// `V(G)`.
    pub fn vertices(&self) -> Vec<Name> {
        self.systems.iter().map(|s| s.vertex.clone()).collect()
    }

    /// `V±(G)`: vertices together with their negations.
    pub fn signed_support(&self) -> Vec<Name> {
        self.systems
            .iter()
            .flat_map(|s| [s.vertex.clone(), s.vertex.negate()])
            .collect()
    }

    pub fn regions(&self) -> RegionSet {
        RegionSet::of_names(self.systems.iter().map(|s| &s.vertex))
    }

    pub fn filter(&self, mut keep: impl FnMut(&System) -> bool) -> Graph {
        Graph {
            systems: self.systems.iter().filter(|s| keep(s)).cloned().collect(),
        }
    }

    pub fn minus(&self, sub: &Graph) -> Graph {
        self.filter(|s| !sub.contains(s))
    }

    pub fn union(&self, other: &Graph) -> Result<Graph> {
        Graph::new(self.systems.iter().chain(other.systems.iter()).cloned())
    }

    /// Union of two disjoint graphs, `None` when they share a system or the
    /// result is not well-named.
    pub fn disjoint_union(&self, other: &Graph) -> Option<Graph> {
        if self.systems.iter().any(|s| other.contains(s)) {
            return None;
        }
        self.union(other).ok()
    }

    pub fn rename(&self, r: &Renaming) -> Graph {
        Graph::from_valid(self.systems.iter().map(|s| System {
            state: s.state.clone(),
            vertex: r.apply(&s.vertex),
        }))
    }

    pub fn keys(&self) -> BTreeSet<u64> {
        self.systems.iter().flat_map(|s| s.vertex.keys()).collect()
    }

    /// Directed edges as index pairs `(i, j)`: system `i` holds some `-x`
    /// nested with an `x` held by system `j`.
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        let leaves: Vec<Vec<Region>> = self.systems.iter().map(|s| s.vertex.leaves()).collect();
        let mut out = Vec::new();
        for (i, li) in leaves.iter().enumerate() {
            for (j, lj) in leaves.iter().enumerate() {
                if i == j {
                    continue;
                }
                let linked = li.iter().filter(|r| r.key.neg).any(|r| {
                    lj.iter().any(|q| {
                        !q.key.neg && q.key.id == r.key.id && q.suffix.comparable(&r.suffix)
                    })
                });
                if linked {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All subgraphs, smallest first.
    pub fn subgraphs(&self) -> Vec<Graph> {
        let n = self.systems.len();
        assert!(n < 24, "too many systems to enumerate subgraphs");
        let mut out: Vec<Graph> = (0u32..(1 << n))
            .map(|m| Graph {
                systems: (0..n)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| self.systems[i].clone())
                    .collect(),
            })
            .collect();
        out.sort();
        out
    }
}

impl Ord for Graph {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                self.systems
                    .iter()
                    .map(|s| &s.vertex)
                    .cmp(other.systems.iter().map(|s| &s.vertex))
            })
            .then_with(|| {
                self.systems
                    .iter()
                    .map(|s| &s.state)
                    .cmp(other.systems.iter().map(|s| &s.state))
            })
    }
}

impl PartialOrd for Graph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.systems.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `(V(G), V±(G))`.
pub fn supports(g: &Graph) -> (Vec<Name>, Vec<Name>) {
    (g.vertices(), g.signed_support())
}

/// Directed edges by vertex name, from the `-x` holder to the `x` holder.
pub fn induced_edges(g: &Graph) -> Vec<(Name, Name)> {
    let s = g.systems();
    g.edge_indices()
        .into_iter()
        .map(|(i, j)| (s[i].vertex.clone(), s[j].vertex.clone()))
        .collect()
}

pub fn graph_union(a: &Graph, b: &Graph) -> Result<Graph> {
    a.union(b)
}

pub fn rename_graph(g: &Graph, r: &Renaming) -> Graph {
    g.rename(r)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NameShape {
    LeavesOnly,
    JoinsAllowed,
    /// `(1|-2), (2|-3), ..., m` over the listed keys.
    ChainNamed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniverseSpec {
    pub keys: Vec<u64>,
    pub depth: usize,
    pub sigma: Vec<State>,
    pub max_systems: Option<usize>,
    pub shape: NameShape,
}

pub const DEFAULT_UNIVERSE_CAP: usize = 1_000_000;

impl UniverseSpec {
    /// Keys `{1, 2}`, depth 1, states `{0, 1}`, at most two systems.
    pub fn default_small() -> UniverseSpec {
        UniverseSpec {
            keys: vec![1, 2],
            depth: 1,
            sigma: vec![State::new("0"), State::new("1")],
            max_systems: Some(2),
            shape: NameShape::LeavesOnly,
        }
    }

    pub fn names(&self) -> Vec<Name> {
        let mut keys = self.keys.clone();
        keys.sort_unstable();
        keys.dedup();
        let leaves: Vec<Name> = keys
            .iter()
            .flat_map(|&id| [Key::pos(id), Key::pos(id).negated()])
            .flat_map(|k| {
                Suffix::all_up_to(self.depth)
                    .into_iter()
                    .map(move |t| Name::leaf(k, t))
            })
            .collect();
        match self.shape {
            NameShape::LeavesOnly => leaves,
            NameShape::JoinsAllowed => {
                let mut out = leaves.clone();
                for a in &leaves {
                    for b in &leaves {
                        if a != b && !a.regions().overlaps(&b.regions()) {
                            let j = Name::join(a.clone(), b.clone());
                            if !j.is_leaf() {
                                out.push(j);
                            }
                        }
                    }
                }
                out
            }
            NameShape::ChainNamed => {
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
        }
    }

    pub fn label(&self) -> String {
        let shape = match self.shape {
            NameShape::LeavesOnly => "leaves",
            NameShape::JoinsAllowed => "joins",
            NameShape::ChainNamed => "chain",
        };
        let max = self
            .max_systems
            .map(|m| m.to_string())
            .unwrap_or_else(|| "all".into());
        let keys: Vec<String> = self.keys.iter().map(|k| k.to_string()).collect();
        let sigma: Vec<&str> = self.sigma.iter().map(|s| s.as_str()).collect();
        format!(
            "keys={{{}}},depth={},sigma={{{}}},maxnodes={},shape={}",
            keys.join(","),
            self.depth,
            sigma.join(","),
            max,
            shape
        )
    }
}

/// Every well-named graph over the given system pool with at most `max`
/// systems, sorted canonically. The empty graph comes first.
pub fn enumerate_pool(pool: &[System], max: Option<usize>, cap: usize) -> Result<Vec<Graph>> {
    let pool: Vec<System> = pool
        .iter()
        .filter(|s| overlap_witness(std::slice::from_ref(s)).is_none())
        .cloned()
        .collect();
    let n = pool.len();
    let regions: Vec<RegionSet> = pool.iter().map(|s| s.vertex.regions()).collect();
    let clash: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && regions[i].overlaps(&regions[j]))
                .collect()
        })
        .collect();
    let max = max.unwrap_or(n);
    let mut out = Vec::new();
    let mut chosen = Vec::new();

    fn go(
        start: usize,
        chosen: &mut Vec<usize>,
        pool: &[System],
        clash: &[Vec<bool>],
        max: usize,
        cap: usize,
        out: &mut Vec<Graph>,
    ) -> Result<()> {
        if out.len() >= cap {
            return Err(QnetError::UniverseTooLarge { cap });
        }
        out.push(Graph::from_valid(chosen.iter().map(|&i| pool[i].clone())));
        if chosen.len() == max {
            return Ok(());
        }
        for i in start..pool.len() {
            if chosen.iter().all(|&c| !clash[c][i]) {
                chosen.push(i);
                go(i + 1, chosen, pool, clash, max, cap, out)?;
                chosen.pop();
            }
        }
        Ok(())
    }

    go(0, &mut chosen, &pool, &clash, max, cap, &mut out)?;
    out.sort();
    Ok(out)
}

pub fn enumerate_universe(spec: &UniverseSpec, cap: usize) -> Result<Vec<Graph>> {
    let pool: Vec<System> = spec
        .names()
        .into_iter()
        .flat_map(|v| {
            spec.sigma.iter().map(move |s| System {
                state: s.clone(),
                vertex: v.clone(),
            })
        })
        .collect();
    enumerate_pool(&pool, spec.max_systems, cap)
}

/// A finite, indexed set of graphs.
#[derive(Clone, Debug)]
pub struct Universe {
    label: String,
    graphs: Vec<Graph>,
    index: HashMap<Graph, usize>,
}

impl Universe {
    pub fn new(label: impl Into<String>, graphs: impl IntoIterator<Item = Graph>) -> Universe {
        let mut graphs: Vec<Graph> = graphs.into_iter().collect();
        graphs.sort();
        graphs.dedup();
        let index = graphs
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        Universe {
            label: label.into(),
            graphs,
            index,
        }
    }

    pub fn from_spec(spec: &UniverseSpec) -> Result<Universe> {
        Ok(Universe::new(
            spec.label(),
            enumerate_universe(spec, DEFAULT_UNIVERSE_CAP)?,
        ))
    }

    pub fn default_small() -> Universe {
        Universe::from_spec(&UniverseSpec::default_small()).expect("default universe is small")
    }

    /// All well-named subsets of a system pool.
    pub fn from_pool(label: impl Into<String>, pool: &[System]) -> Result<Universe> {
        Ok(Universe::new(
            label,
            enumerate_pool(pool, None, DEFAULT_UNIVERSE_CAP)?,
        ))
    }

    /// The given graphs together with all their subgraphs.
    pub fn subset_closure(
        label: impl Into<String>,
        graphs: impl IntoIterator<Item = Graph>,
    ) -> Universe {
        let all: BTreeSet<Graph> = graphs.into_iter().flat_map(|g| g.subgraphs()).collect();
        Universe::new(label, all)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn graph(&self, i: usize) -> &Graph {
        &self.graphs[i]
    }

    pub fn index_of(&self, g: &Graph) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &Graph) -> bool {
        self.index.contains_key(g)
    }

    pub fn is_subset_closed(&self) -> bool {
        self.graphs.iter().all(|g| {
            g.systems()
                .iter()
                .all(|s| self.contains(&g.filter(|t| t != s)))
        })
    }

    /// Vertex names occurring in the universe, sorted.
    pub fn vertex_names(&self) -> Vec<Name> {
        let set: BTreeSet<Name> = self.graphs.iter().flat_map(|g| g.vertices()).collect();
        set.into_iter().collect()
    }

    pub fn keys(&self) -> BTreeSet<u64> {
        self.graphs.iter().flat_map(|g| g.keys()).collect()
    }

    pub fn states(&self) -> BTreeSet<State> {
        self.graphs
            .iter()
            .flat_map(|g| g.systems().iter().map(|s| s.state.clone()))
            .collect()
    }
}
