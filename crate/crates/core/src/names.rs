//! Vertex names.
//!
//! A name is a tree of signed keys decorated with `l`/`r` suffixes. Each leaf
//! `k.t` denotes a region: the set of names obtainable from the key `k` by
//! descending along `t`. Two names correspond when they cover the same
//! regions, and overlap when some pair of their regions is nested.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{QnetError, Result};

/// A signed key. `id` is a positive integer; its binary expansion is
/// available through ordinary bit operations.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Key {
    pub id: u64,
    pub neg: bool,
}

impl Key {
    pub fn pos(id: u64) -> Key {
        Key { id, neg: false }
    }

    pub fn negated(self) -> Key {
        Key {
            id: self.id,
            neg: !self.neg,
        }
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "-{}", self.id)
        } else {
            write!(f, "{}", self.id)
        }
    }
}

/// Left or right descent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Dir {
    L,
    R,
}

/// A word over `{l, r}`, packed into a `u64` with the first letter in the
/// most significant used bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Suffix {
    bits: u64,
    len: u8,
}

pub const MAX_SUFFIX_LEN: usize = 63;

impl Suffix {
    pub const EMPTY: Suffix = Suffix { bits: 0, len: 0 };

    pub fn from_dirs(dirs: &[Dir]) -> Suffix {
        dirs.iter().fold(Suffix::EMPTY, |s, &d| s.push(d))
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(self, d: Dir) -> Suffix {
        assert!(
            self.len() < MAX_SUFFIX_LEN,
            "suffix longer than {MAX_SUFFIX_LEN} letters"
        );
        Suffix {
            bits: (self.bits << 1) | (d == Dir::R) as u64,
            len: self.len + 1,
        }
    }

    pub fn concat(self, other: Suffix) -> Suffix {
        assert!(
            self.len() + other.len() <= MAX_SUFFIX_LEN,
            "suffix longer than {MAX_SUFFIX_LEN} letters"
        );
        Suffix {
            bits: (self.bits << other.len) | other.bits,
            len: self.len + other.len,
        }
    }

    pub fn first(&self) -> Option<Dir> {
        (self.len > 0).then(|| self.at(0))
    }

    /// The suffix without its first letter.
    pub fn rest(&self) -> Suffix {
        if self.len == 0 {
            return *self;
        }
        let len = self.len - 1;
        Suffix {
            bits: self.bits & mask(len),
            len,
        }
    }

    /// The suffix without its last letter.
    pub fn parent(&self) -> Option<Suffix> {
        (self.len > 0).then(|| Suffix {
            bits: self.bits >> 1,
            len: self.len - 1,
        })
    }

    pub fn last(&self) -> Option<Dir> {
        (self.len > 0).then(|| self.at(self.len() - 1))
    }

    pub fn at(&self, i: usize) -> Dir {
        debug_assert!(i < self.len());
        if (self.bits >> (self.len() - 1 - i)) & 1 == 1 {
            Dir::R
        } else {
            Dir::L
        }
    }

    pub fn dirs(&self) -> impl Iterator<Item = Dir> + '_ {
        (0..self.len()).map(|i| self.at(i))
    }

    pub fn prefix(&self, n: usize) -> Suffix {
        debug_assert!(n <= self.len());
        Suffix {
            bits: self.bits >> (self.len() - n),
            len: n as u8,
        }
    }

    pub fn is_prefix_of(&self, other: &Suffix) -> bool {
        self.len <= other.len && other.prefix(self.len()).bits == self.bits
    }

    pub fn comparable(&self, other: &Suffix) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// All suffixes of length at most `depth`, in lexicographic order.
    pub fn all_up_to(depth: usize) -> Vec<Suffix> {
        let mut out = Vec::new();
        fn go(s: Suffix, depth: usize, out: &mut Vec<Suffix>) {
            out.push(s);
            if s.len() < depth {
                go(s.push(Dir::L), depth, out);
                go(s.push(Dir::R), depth, out);
            }
        }
        go(Suffix::EMPTY, depth, &mut out);
        out
    }
}

fn mask(len: u8) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl Ord for Suffix {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.len.min(other.len) as usize;
        self.prefix(n)
            .bits
            .cmp(&other.prefix(n).bits)
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Suffix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Suffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.dirs() {
            f.write_str(if d == Dir::L { "l" } else { "r" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Suffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Suffix({self})")
    }
}

/// A region `k.t`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Region {
    pub key: Key,
    pub suffix: Suffix,
}

impl Region {
    pub fn new(key: Key, suffix: Suffix) -> Region {
        Region { key, suffix }
    }

    pub fn comparable(&self, other: &Region) -> bool {
        self.key == other.key && self.suffix.comparable(&other.suffix)
    }

    pub fn negated(&self) -> Region {
        Region {
            key: self.key.negated(),
            suffix: self.suffix,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.suffix.is_empty() {
            write!(f, "{}", self.key)
        } else {
            write!(f, "{}.{}", self.key, self.suffix)
        }
    }
}

/// Raw name syntax, before normalization.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Atom(Key),
    Descend(Box<Term>, Suffix),
    Join(Box<Term>, Box<Term>),
}

impl Term {
    pub fn size(&self) -> usize {
        match self {
            Term::Atom(_) => 1,
            Term::Descend(t, _) => 1 + t.size(),
            Term::Join(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(k) => write!(f, "{k}"),
            Term::Descend(t, s) if s.is_empty() => write!(f, "{t}"),
            Term::Descend(t, s) => write!(f, "{t}.{s}"),
            Term::Join(a, b) => write!(f, "({a}|{b})"),
        }
    }
}

/// A name in canonical form: suffixes sit on leaves only and no join has two
/// sibling leaves as children.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Name {
    Leaf(Key, Suffix),
    Join(Box<Name>, Box<Name>),
}

impl Name {
    pub fn atom(id: i64) -> Name {
        assert!(id != 0, "key ids are positive");
        Name::Leaf(
            Key {
                id: id.unsigned_abs(),
                neg: id < 0,
            },
            Suffix::EMPTY,
        )
    }

    pub fn leaf(key: Key, suffix: Suffix) -> Name {
        Name::Leaf(key, suffix)
    }

    /// Canonical join: sibling leaves collapse into their parent.
    pub fn join(a: Name, b: Name) -> Name {
        if let (Name::Leaf(k1, s1), Name::Leaf(k2, s2)) = (&a, &b) {
            if k1 == k2
                && s1.last() == Some(Dir::L)
                && s2.last() == Some(Dir::R)
                && s1.parent() == s2.parent()
            {
                return Name::Leaf(*k1, s1.parent().unwrap());
            }
        }
        Name::Join(Box::new(a), Box::new(b))
    }

    pub fn descend(&self, t: Suffix) -> Name {
        if t.is_empty() {
            return self.clone();
        }
        match self {
            Name::Leaf(k, s) => Name::Leaf(*k, s.concat(t)),
            Name::Join(a, b) => match t.first().unwrap() {
                Dir::L => a.descend(t.rest()),
                Dir::R => b.descend(t.rest()),
            },
        }
    }

    pub fn negate(&self) -> Name {
        match self {
            Name::Leaf(k, s) => Name::Leaf(k.negated(), *s),
            Name::Join(a, b) => Name::Join(Box::new(a.negate()), Box::new(b.negate())),
        }
    }

    pub fn leaves(&self) -> Vec<Region> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Region>) {
        match self {
            Name::Leaf(k, s) => out.push(Region::new(*k, *s)),
            Name::Join(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    pub fn keys(&self) -> BTreeSet<u64> {
        self.leaves().into_iter().map(|r| r.key.id).collect()
    }

    pub fn regions(&self) -> RegionSet {
        RegionSet::from_regions(self.leaves())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Name::Leaf(..))
    }

    pub fn size(&self) -> usize {
        match self {
            Name::Leaf(_, s) if s.is_empty() => 1,
            Name::Leaf(..) => 2,
            Name::Join(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Name::Leaf(k, s) if s.is_empty() => Term::Atom(*k),
            Name::Leaf(k, s) => Term::Descend(Box::new(Term::Atom(*k)), *s),
            Name::Join(a, b) => Term::Join(Box::new(a.to_term()), Box::new(b.to_term())),
        }
    }

    pub fn rename(&self, r: &Renaming) -> Name {
        match self {
            Name::Leaf(k, s) => Name::Leaf(r.apply_key(*k), *s),
            Name::Join(a, b) => Name::Join(Box::new(a.rename(r)), Box::new(b.rename(r))),
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Leaf(k, s) => write!(f, "{}", Region::new(*k, *s)),
            Name::Join(a, b) => write!(f, "({a}|{b})"),
        }
    }
}

/// Reduce a raw term to canonical form.
pub fn normalize(t: &Term) -> Name {
    norm(t, Suffix::EMPTY)
}

fn norm(t: &Term, acc: Suffix) -> Name {
    match t {
        Term::Atom(k) => Name::Leaf(*k, acc),
        Term::Descend(inner, s) => norm(inner, s.concat(acc)),
        Term::Join(a, b) => match acc.first() {
            None => Name::join(norm(a, Suffix::EMPTY), norm(b, Suffix::EMPTY)),
            Some(Dir::L) => norm(a, acc.rest()),
            Some(Dir::R) => norm(b, acc.rest()),
        },
    }
}

/// A canonical antichain of regions: no region contains another and no two
/// siblings are both present.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct RegionSet {
    regions: BTreeSet<Region>,
}

impl RegionSet {
    pub fn from_regions(items: impl IntoIterator<Item = Region>) -> RegionSet {
        let mut all: Vec<Region> = items.into_iter().collect();
        all.sort();
        all.dedup();
        // sorted order puts a region right before everything it contains
        let mut kept: Vec<Region> = Vec::with_capacity(all.len());
        for r in all {
            if let Some(top) = kept.last() {
                if top.key == r.key && top.suffix.is_prefix_of(&r.suffix) {
                    continue;
                }
            }
            kept.push(r);
        }
        let mut set: BTreeSet<Region> = kept.into_iter().collect();
        loop {
            let merge = set.iter().find_map(|r| {
                if r.suffix.last() != Some(Dir::L) {
                    return None;
                }
                let parent = r.suffix.parent().unwrap();
                let sib = Region::new(r.key, parent.push(Dir::R));
                set.contains(&sib)
                    .then_some((*r, sib, Region::new(r.key, parent)))
            });
            match merge {
                Some((a, b, p)) => {
                    set.remove(&a);
                    set.remove(&b);
                    set.insert(p);
                }
                None => break,
            }
        }
        RegionSet { regions: set }
    }

    pub fn of_names<'a>(names: impl IntoIterator<Item = &'a Name>) -> RegionSet {
        RegionSet::from_regions(names.into_iter().flat_map(|n| n.leaves()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter()
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Whether the region `r` lies inside the set.
    pub fn covers(&self, r: &Region) -> bool {
        (0..=r.suffix.len()).any(|n| {
            self.regions
                .contains(&Region::new(r.key, r.suffix.prefix(n)))
        })
    }

    /// Whether some region of the set is nested with `r` (either way).
    pub fn touches(&self, r: &Region) -> bool {
        if self.covers(r) {
            return true;
        }
        self.regions
            .range(*r..)
            .next()
            .is_some_and(|n| n.key == r.key && r.suffix.is_prefix_of(&n.suffix))
    }

    pub fn overlaps(&self, other: &RegionSet) -> bool {
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().any(|r| big.touches(r))
    }

    pub fn union(&self, other: &RegionSet) -> RegionSet {
        RegionSet::from_regions(self.iter().chain(other.iter()).copied())
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.regions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

pub fn regions(names: &[Name]) -> RegionSet {
    RegionSet::of_names(names)
}

/// Name-set correspondence: both sets cover exactly the same regions.
pub fn corresponds(a: &[Name], b: &[Name]) -> bool {
    regions(a) == regions(b)
}

/// Some leaf of `a` is nested with some leaf of `b`.
pub fn overlaps(a: &[Name], b: &[Name]) -> bool {
    regions(a).overlaps(&regions(b))
}

/// A permutation of key ids with finite support. Signs are preserved.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Renaming {
    map: BTreeMap<u64, u64>,
}

impl Renaming {
    pub fn identity() -> Renaming {
        Renaming::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Renaming> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if a == 0 || b == 0 {
                return Err(QnetError::InvalidRenaming("key ids are positive".into()));
            }
            if map.insert(a, b).is_some_and(|old| old != b) {
                return Err(QnetError::InvalidRenaming(format!("key {a} mapped twice")));
            }
        }
        map.retain(|a, b| a != b);
        let dom: BTreeSet<u64> = map.keys().copied().collect();
        let img: BTreeSet<u64> = map.values().copied().collect();
        if dom != img || img.len() != map.len() {
            return Err(QnetError::InvalidRenaming(
                "not a permutation of its support".into(),
            ));
        }
        Ok(Renaming { map })
    }

    pub fn swap(a: u64, b: u64) -> Renaming {
        Renaming::from_pairs([(a, b), (b, a)]).expect("a transposition is a permutation")
    }

    /// The cycle `ids[0] -> ids[1] -> ... -> ids[0]`.
    pub fn cycle(ids: &[u64]) -> Result<Renaming> {
        let n = ids.len();
        Renaming::from_pairs((0..n).map(|i| (ids[i], ids[(i + 1) % n])))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.map.keys().copied()
    }

    pub fn apply_id(&self, id: u64) -> u64 {
        self.map.get(&id).copied().unwrap_or(id)
    }

    pub fn apply_key(&self, k: Key) -> Key {
        Key {
            id: self.apply_id(k.id),
            neg: k.neg,
        }
    }

    pub fn apply(&self, n: &Name) -> Name {
        n.rename(self)
    }

    pub fn inverse(&self) -> Renaming {
        Renaming {
            map: self.map.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Renaming) -> Renaming {
        let support: BTreeSet<u64> = self.support().chain(other.support()).collect();
        let pairs = support
            .into_iter()
            .map(|k| (k, self.apply_id(other.apply_id(k))));
        Renaming::from_pairs(pairs).expect("composition of permutations")
    }
}

impl fmt::Display for Renaming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (a, b)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("]")
    }
}
