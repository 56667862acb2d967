//! Seeded random states, densities and operators for law and checker runs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graphs::{Graph, Universe};
use crate::hilbert::{c, real, OperatorMatrix, StateVector, C64};
use crate::names::RegionSet;
use crate::restrict::{range, Restriction};
use crate::tensor_trace::tensor_basis;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn amplitude(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A normalized vector on `k` graphs drawn from `pool`.
pub fn state(rng: &mut ChaCha8Rng, pool: &[Graph], k: usize) -> StateVector {
    let picks: Vec<&Graph> = pool.choose_multiple(rng, k.min(pool.len())).collect();
    StateVector::from_terms(picks.into_iter().map(|g| (g.clone(), amplitude(rng)))).normalized()
}

/// `Σ_i |ψ_i⟩⟨ψ_i|` over `k ≤ 4` random vectors with support in `pool`,
/// normalized to unit trace.
pub fn density(rng: &mut ChaCha8Rng, pool: &[Graph], support: usize) -> OperatorMatrix {
    let k = rng.gen_range(1..=4);
    let sub: Vec<Graph> = pool
        .choose_multiple(rng, support.min(pool.len()))
        .cloned()
        .collect();
    let mut rho = OperatorMatrix::zero();
    for _ in 0..k {
        let psi = state(rng, &sub, sub.len().max(1));
        rho = rho.add(&OperatorMatrix::outer(&psi, &psi));
    }
    let t = rho.full_trace();
    if t.norm() > 0.0 {
        rho.scale(real(1.0) / t)
    } else {
        rho
    }
}

/// Random sparse matrix: a diagonal on `cols` plus a few off-diagonal terms
/// landing in `rows`.
pub fn matrix(rng: &mut ChaCha8Rng, cols: &[Graph], rows: &[Graph], off: usize) -> OperatorMatrix {
    let mut m = OperatorMatrix::zero();
    for g in cols {
        if rng.gen_bool(0.8) {
            m.add_entry(g.clone(), g.clone(), amplitude(rng));
        }
        for _ in 0..off {
            if let Some(h) = rows.choose(rng) {
                m.add_entry(h.clone(), g.clone(), amplitude(rng));
            }
        }
    }
    m
}

/// Groups graphs by the regions their vertices cover.
pub fn name_classes<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> Vec<Vec<Graph>> {
    let mut by: BTreeMap<RegionSet, Vec<Graph>> = BTreeMap::new();
    for g in graphs {
        by.entry(g.regions()).or_default().push(g.clone());
    }
    by.into_values().collect()
}

/// A random name-preserving matrix acting on `graphs` (typically the
/// fixed points of a pointwise restriction).
pub fn np_matrix(rng: &mut ChaCha8Rng, graphs: &[Graph]) -> OperatorMatrix {
    let mut m = OperatorMatrix::zero();
    for class in name_classes(graphs) {
        for g in &class {
            for h in &class {
                if g == h || rng.gen_bool(0.5) {
                    m.add_entry(h.clone(), g.clone(), amplitude(rng));
                }
            }
        }
    }
    m
}

/// Graphs of the universe left unchanged by `chi`.
pub fn fixed_points(chi: &Restriction, u: &Universe) -> Vec<Graph> {
    u.graphs()
        .iter()
        .filter(|g| &chi.apply(g) == *g)
        .cloned()
        .collect()
}

/// A pair `(ρ, σ)` of unit-trace densities that is `χ`-consistent by
/// construction: every ket/bra of `ρ` tensors with every ket/bra of `σ`,
/// landing inside the universe.
pub fn consistent_pair(
    rng: &mut ChaCha8Rng,
    chi: &Restriction,
    u: &Universe,
) -> Option<(OperatorMatrix, OperatorMatrix)> {
    let inside = range(chi, u);
    let outside: Vec<Graph> = {
        let mut v: Vec<Graph> = u.graphs().iter().map(|g| chi.complement(g)).collect();
        v.sort();
        v.dedup();
        v
    };
    for _ in 0..20 {
        let seed = u.graphs().choose(rng)?;
        let (a, b) = chi.split(seed);
        let joins = |x: &Graph, y: &Graph| tensor_basis(x, y, chi).is_some_and(|g| u.contains(&g));
        let xs: Vec<Graph> = inside.iter().filter(|x| joins(x, &b)).cloned().collect();
        let mut sx: Vec<Graph> = xs.choose_multiple(rng, 3).cloned().collect();
        if !sx.contains(&a) {
            sx.push(a.clone());
        }
        let sy: Vec<Graph> = outside
            .iter()
            .filter(|y| sx.iter().all(|x| joins(x, y)))
            .cloned()
            .collect();
        if sy.is_empty() {
            continue;
        }
        let rho = density(rng, &sx, sx.len());
        let sigma = density(rng, &sy, 3);
        return Some((rho, sigma));
    }
    None
}

/// A random unitary on the universe: a permutation with phases, and a few
/// plane rotations mixing pairs. With `np`, graphs only move within their
/// correspondence class.
pub fn unitary(rng: &mut ChaCha8Rng, u: &Universe, np: bool) -> OperatorMatrix {
    let classes = if np {
        name_classes(u.graphs())
    } else {
        vec![u.graphs().to_vec()]
    };
    let mut m = OperatorMatrix::zero();
    for class in classes {
        let mut img = class.clone();
        img.shuffle(rng);
        let mut i = 0;
        while i < class.len() {
            let phase = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            if i + 1 < class.len() && rng.gen_bool(0.3) {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                let (g0, g1) = (&class[i], &class[i + 1]);
                let (h0, h1) = (&img[i], &img[i + 1]);
                m.add_entry(h0.clone(), g0.clone(), phase * t.cos());
                m.add_entry(h1.clone(), g0.clone(), phase * t.sin());
                m.add_entry(h0.clone(), g1.clone(), -phase * t.sin());
                m.add_entry(h1.clone(), g1.clone(), phase * t.cos());
                i += 2;
            } else {
                m.add_entry(img[i].clone(), class[i].clone(), phase);
                i += 1;
            }
        }
    }
    m
}
