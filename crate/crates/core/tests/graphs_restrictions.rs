mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::graph;
use qnet_core::cli_formats::parse_name;
use qnet_core::dynamics::{chain_names, chain_universe, MOVERS};
use qnet_core::graphs::{
    enumerate_universe, graph_union, induced_edges, supports, Graph, NameShape, State, System,
    Universe, UniverseSpec, DEFAULT_UNIVERSE_CAP,
};
use qnet_core::names::{Name, Renaming, Suffix};
use qnet_core::restrict::{
    commutes, comprehended, validate_restriction, FnMap, Predicate, Restriction,
};
use qnet_core::tensor_trace::laws::restriction_catalog;
use qnet_core::QnetError;

fn spec(keys: &[u64], depth: usize, sigma: &[&str], max: Option<usize>) -> UniverseSpec {
    UniverseSpec {
        keys: keys.to_vec(),
        depth,
        sigma: sigma.iter().map(|s| State::new(*s)).collect(),
        max_systems: max,
        shape: NameShape::LeavesOnly,
    }
}

fn count(s: &UniverseSpec) -> usize {
    enumerate_universe(s, DEFAULT_UNIVERSE_CAP).unwrap().len()
}

fn name(text: &str) -> Name {
    parse_name(text).unwrap()
}

#[test]
fn smallest_enumerations() {
    let shown: Vec<String> = enumerate_universe(&spec(&[1], 0, &["0", "1"], Some(1)), 100)
        .unwrap()
        .iter()
        .map(|g| g.to_string())
        .collect();
    assert_eq!(shown, ["{}", "{0.1}", "{1.1}", "{0.-1}", "{1.-1}"]);
    let none = enumerate_universe(&spec(&[1, 2], 1, &["0"], Some(0)), 100).unwrap();
    assert_eq!(none, vec![Graph::empty()]);
    assert!(matches!(
        enumerate_universe(&spec(&[1, 2], 1, &["0", "1"], None), 100),
        Err(QnetError::UniverseTooLarge { .. })
    ));
}

#[test]
fn counts_grow_with_every_parameter() {
    let base = count(&spec(&[1], 0, &["0"], Some(1)));
    assert!(count(&spec(&[1, 2], 0, &["0"], Some(1))) > base);
    assert!(count(&spec(&[1], 1, &["0"], Some(1))) > base);
    assert!(count(&spec(&[1], 0, &["0", "1"], Some(1))) > base);
    assert!(count(&spec(&[1], 0, &["0"], Some(2))) > base);
    assert!(
        count(&spec(&[1, 2], 1, &["0", "1"], Some(2)))
            > count(&spec(&[1, 2], 1, &["0", "1"], Some(1)))
    );
}

#[test]
fn enumerated_graphs_rebuild_to_themselves() {
    for g in Universe::default_small().graphs() {
        assert_eq!(&Graph::new(g.systems().to_vec()).unwrap(), g);
    }
}

#[test]
fn graph_examples() {
    let fig = graph("{white.((3.l|8.rl)|-2), black.(2|4)}");
    let (u, v) = (name("((3.l|8.rl)|-2)"), name("(2|4)"));
    assert_eq!(induced_edges(&fig), vec![(u.clone(), v.clone())]);
    let (vs, pm) = supports(&fig);
    assert_eq!(vs.len(), 2);
    let want: BTreeSet<Name> = [u.clone(), u.negate(), v.clone(), v.negate()].into();
    assert_eq!(pm.into_iter().collect::<BTreeSet<_>>(), want);
    assert_eq!(
        supports(&graph("{w.2}")).1,
        vec![Name::atom(2), Name::atom(-2)]
    );
    assert!(induced_edges(&graph("{w.5}")).is_empty());

    assert!(matches!(
        parse_graph_err("{a.2, b.2.l}"),
        QnetError::WellNamednessViolation { .. }
    ));
    assert_eq!(
        graph_union(&graph("{w.1}"), &graph("{b.2}")).unwrap(),
        graph("{w.1, b.2}")
    );
    assert!(graph_union(&graph("{w.1}"), &graph("{b.1.l}")).is_err());
    assert_eq!(graph_union(&fig, &Graph::empty()).unwrap(), fig);
    assert_eq!(
        graph("{w.1, b.-2}").rename(&Renaming::swap(1, 2)),
        graph("{w.2, b.-1}")
    );
}

fn parse_graph_err(text: &str) -> QnetError {
    qnet_core::cli_formats::parse_graph(text).unwrap_err()
}

#[test]
fn chain_edges_point_right() {
    let names = chain_names(&[1, 2, 3]);
    let g = Graph::new(names.iter().map(|v| System::new("e", v.clone()))).unwrap();
    let edges: BTreeSet<(Name, Name)> = induced_edges(&g).into_iter().collect();
    let want: BTreeSet<(Name, Name)> = [
        (names[0].clone(), names[1].clone()),
        (names[1].clone(), names[2].clone()),
    ]
    .into();
    assert_eq!(edges, want);
}

/// Brute force over descendants: two distinct positions `(system, t)` that
/// reach the same name break well-namedness.
fn well_named_by_descent(systems: &[System]) -> bool {
    let words = Suffix::all_up_to(4);
    let mut seen: Vec<(usize, Suffix, Name)> = Vec::new();
    for (i, s) in systems.iter().enumerate() {
        for t in &words {
            seen.push((i, *t, s.vertex.descend(*t)));
        }
    }
    for a in 0..seen.len() {
        for b in a + 1..seen.len() {
            let (i, t, x) = &seen[a];
            let (j, t2, y) = &seen[b];
            if x == y && (i != j || t != t2) && !(systems[*i] == systems[*j] && t == t2) {
                return false;
            }
        }
    }
    true
}

#[test]
fn well_namedness_agrees_with_descent() {
    let mut leaves = Vec::new();
    for id in [1i64, 2] {
        for sign in [1, -1] {
            for t in Suffix::all_up_to(1) {
                leaves.push(Name::atom(sign * id).descend(t));
            }
        }
    }
    let mut names = leaves.clone();
    for a in &leaves {
        for b in &leaves {
            if a != b {
                names.push(Name::join(a.clone(), b.clone()));
            }
        }
    }
    names.sort();
    names.dedup();
    let pool: Vec<System> = names
        .iter()
        .flat_map(|v| ["0", "1"].map(|s| System::new(s, v.clone())))
        .collect();
    let mut checked = 0;
    for (i, a) in pool.iter().enumerate() {
        let single = [a.clone()];
        assert_eq!(
            Graph::new(single.clone()).is_ok(),
            well_named_by_descent(&single),
            "{a}"
        );
        for b in &pool[i + 1..] {
            let pair = [a.clone(), b.clone()];
            assert_eq!(
                Graph::new(pair.clone()).is_ok(),
                well_named_by_descent(&pair),
                "{a}, {b}"
            );
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

fn vertex_set(g: &Graph) -> BTreeSet<Name> {
    g.vertices().into_iter().collect()
}

#[test]
fn unoriented_disks_symmetrize_oriented_edges() {
    for u in [
        Universe::default_small(),
        chain_universe(3, &MOVERS).unwrap(),
    ] {
        for g in u.graphs() {
            let edges = induced_edges(g);
            for v in g.vertices() {
                let z = Restriction::zeta(v.clone());
                let mut both: BTreeSet<Name> = [v.clone()].into();
                let mut into: BTreeSet<Name> = [v.clone()].into();
                for (a, b) in &edges {
                    if b == &v {
                        both.insert(a.clone());
                        into.insert(a.clone());
                    }
                    if a == &v {
                        both.insert(b.clone());
                    }
                }
                let plain = Restriction::disk(z.clone(), 1, false).apply(g);
                let oriented = Restriction::disk(z, 1, true).apply(g);
                assert_eq!(vertex_set(&plain), both, "{g} at {v}");
                assert_eq!(vertex_set(&oriented), into, "{g} at {v}");
            }
        }
    }
}

fn universes() -> Vec<Universe> {
    vec![
        Universe::default_small(),
        chain_universe(3, &MOVERS).unwrap(),
    ]
}

#[test]
fn catalog_restrictions_are_valid_and_idempotent() {
    for u in universes() {
        for chi in restriction_catalog(&u) {
            let n = validate_restriction(&chi, &u).unwrap_or_else(|v| panic!("{chi}: {v:?}"));
            assert!(n >= u.len());
            for g in u.graphs() {
                let gc = chi.apply(g);
                assert_eq!(chi.apply(&gc), gc, "{chi} on {g}");
                assert!(chi.apply(&chi.complement(g)).is_empty(), "{chi} on {g}");
                assert_eq!(Restriction::union(chi.clone(), chi.clone()).apply(g), gc);
                assert_eq!(
                    Restriction::union(Restriction::Full, chi.clone()).apply(g),
                    *g
                );
            }
        }
    }
}

#[test]
fn a_size_dependent_selection_is_rejected() {
    let u = Universe::default_small();
    let v = Name::atom(1);
    let broken = FnMap {
        label: "v when even".into(),
        f: move |g: &Graph| {
            if g.len() % 2 == 0 {
                g.filter(|s| s.vertex == v)
            } else {
                Graph::empty()
            }
        },
    };
    let err = validate_restriction(&broken, &u).unwrap_err();
    assert!(!err.detail.is_empty());
}

#[test]
fn pointwise_combinations_commute_with_their_parts() {
    for u in universes() {
        let cat = restriction_catalog(&u);
        let states: Vec<String> = u
            .states()
            .into_iter()
            .map(|s| s.as_str().to_string())
            .collect();
        let mu = Restriction::state(&states[0]);
        let not_mu = mu.pointwise_complement().unwrap();
        for chi in &cat {
            for zeta in &cat {
                let xi = Restriction::union(
                    Restriction::compose(mu.clone(), chi.clone()),
                    Restriction::compose(not_mu.clone(), zeta.clone()),
                );
                validate_restriction(&xi, &u).unwrap_or_else(|v| panic!("{xi}: {v:?}"));
                assert_eq!(commutes(&mu, &xi, &u, true), None, "{xi}");
            }
        }
        let other = Restriction::Pointwise(Predicate::StateIn(vec![State::new(&states[1])]));
        assert_eq!(commutes(&mu, &other, &u, true), None);
    }
}

#[test]
fn disks_contain_their_centre_selection() {
    for u in universes() {
        for v in u.vertex_names() {
            let z = Restriction::zeta(v.clone());
            for r in 1..=2 {
                for oriented in [false, true] {
                    let chi = Restriction::disk(z.clone(), r, oriented);
                    for g in u.graphs() {
                        assert_eq!(
                            Restriction::compose(chi.clone(), z.clone()).apply(g),
                            z.apply(g)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn restriction_examples_on_a_chain() {
    let u = chain_universe(3, &MOVERS).unwrap();
    let names = chain_names(&[1, 2, 3]);
    let full = Graph::new(names.iter().map(|v| System::new("e", v.clone()))).unwrap();
    let mid = Restriction::zeta(names[1].clone());
    assert_eq!(Restriction::disk(mid.clone(), 1, false).apply(&full), full);
    assert_eq!(
        Restriction::Full.split(&full),
        (full.clone(), Graph::empty())
    );
    assert_eq!(
        Restriction::Empty.split(&full),
        (Graph::empty(), full.clone())
    );

    let fig = graph("{white.((3.l|8.rl)|-2), black.(2|4)}");
    let (inside, outside) = Restriction::zeta(name("(2|4)")).split(&fig);
    assert_eq!(inside, graph("{black.(2|4)}"));
    assert_eq!(outside, graph("{white.((3.l|8.rl)|-2)}"));

    let first = Restriction::zeta(names[0].clone());
    assert!(commutes(&mid, &mid, &u, true).is_none());
    assert!(commutes(&first, &Restriction::disk(mid.clone(), 1, false), &u, false).is_some());

    let d1 = Restriction::disk(mid.clone(), 1, false);
    let d2 = Restriction::disk(mid.clone(), 2, false);
    assert!(comprehended(&mid, &mid, &u, false).is_none());
    assert!(comprehended(&mid, &d1, &u, true).is_none());
    let end = Restriction::zeta(names[0].clone());
    let e1 = Restriction::disk(end.clone(), 1, false);
    let e2 = Restriction::disk(end, 2, false);
    assert!(comprehended(&e1, &e2, &u, false).is_some());
    assert!(comprehended(&e1, &e2, &u, true).is_none());
    assert!(comprehended(&d1, &d2, &u, true).is_none());
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    let graphs = Universe::default_small().graphs().to_vec();
    (0..graphs.len()).prop_map(move |i| graphs[i].clone())
}

proptest! {
    #[test]
    fn renaming_carries_edges(g in arb_graph(), a in 1u64..5, b in 1u64..5) {
        let r = Renaming::swap(a, b);
        let h = g.rename(&r);
        prop_assert!(Graph::new(h.systems().to_vec()).is_ok());
        let moved: BTreeSet<(Name, Name)> =
            induced_edges(&g).into_iter().map(|(x, y)| (r.apply(&x), r.apply(&y))).collect();
        let direct: BTreeSet<(Name, Name)> = induced_edges(&h).into_iter().collect();
        prop_assert_eq!(moved, direct);
    }

    #[test]
    fn complement_names_correspond(i in 0usize..1000, j in 0usize..1000, k in 0usize..11) {
        let u = Universe::default_small();
        let (g, h) = (u.graph(i % u.len()), u.graph(j % u.len()));
        let cat = restriction_catalog(&u);
        let chi = &cat[k % cat.len()];
        let (gc, hc) = (chi.apply(g), chi.apply(h));
        let c = qnet_core::names::corresponds;
        if c(&g.vertices(), &h.vertices()) && c(&gc.vertices(), &hc.vertices()) {
            prop_assert!(c(&chi.complement(g).vertices(), &chi.complement(h).vertices()));
        }
    }
}
