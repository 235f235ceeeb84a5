//! Finite topological spaces stored as bitmask lattices.
//!
//! A finite topology is Alexandrov: every point `x` has a smallest open
//! neighbourhood `U_x`, and the opens are exactly the unions of these. The
//! space keeps both views. `nbhd` drives every point-set operator in O(n);
//! the sorted `opens` list is the canonical form used for equality, hashing
//! and file output.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{BitAnd, BitOr, BitOrAssign, Not, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest point count a [`PointSet`] can address.
pub const MAX_POINTS: usize = 64;

/// Spaces with more opens than this keep only their neighbourhood table.
pub const OPEN_LIST_LIMIT: usize = 1 << 16;

/// A subset of the points `0..n` of some space.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet(pub u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_POINTS);
        if n == MAX_POINTS {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_POINTS);
        PointSet(1u64 << i)
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(points: I) -> Self {
        points.into_iter().fold(Self::EMPTY, |acc, i| acc | Self::singleton(i))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_POINTS && self.0 & (1u64 << i) != 0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_subset(self, other: PointSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn meets(self, other: PointSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Lowest point index in the set.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> Points {
        Points(self.0)
    }

    /// Complement relative to the full set of an `n`-point space.
    pub fn complement(self, n: usize) -> PointSet {
        PointSet(!self.0) & PointSet::full(n)
    }

    /// All subsets of `self`, in increasing bitmask order, starting with the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets { mask: self.0, next: Some(0) }
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl BitOr for PointSet {
    type Output = PointSet;
    fn bitor(self, rhs: PointSet) -> PointSet {
        PointSet(self.0 | rhs.0)
    }
}

impl BitOrAssign for PointSet {
    fn bitor_assign(&mut self, rhs: PointSet) {
        self.0 |= rhs.0;
    }
}

impl BitAnd for PointSet {
    type Output = PointSet;
    fn bitand(self, rhs: PointSet) -> PointSet {
        PointSet(self.0 & rhs.0)
    }
}

impl Sub for PointSet {
    type Output = PointSet;
    fn sub(self, rhs: PointSet) -> PointSet {
        PointSet(self.0 & !rhs.0)
    }
}

impl Not for PointSet {
    type Output = PointSet;
    fn not(self) -> PointSet {
        PointSet(!self.0)
    }
}

/// Iterator over the point indices of a [`PointSet`], ascending.
#[derive(Clone)]
pub struct Points(u64);

impl Iterator for Points {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Points {}

/// Iterator over all sub-masks of a mask in increasing order.
#[derive(Clone)]
pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = PointSet;
    fn next(&mut self) -> Option<PointSet> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(PointSet(cur))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("open set mentions unknown label {0:?}")]
    UnknownLabel(String),
    #[error("the empty set or the whole space is missing from the opens")]
    MissingEmptyOrFull,
    #[error("opens not closed under union: {left:?} ∪ {right:?} is missing")]
    NotClosedUnderUnion { left: Vec<String>, right: Vec<String> },
    #[error("opens not closed under intersection: {left:?} ∩ {right:?} is missing")]
    NotClosedUnderIntersection { left: Vec<String>, right: Vec<String> },
    #[error("a space needs at least one point")]
    NoPoints,
    #[error("{0} points exceed the supported maximum of 64")]
    TooManyPoints(usize),
    #[error("label count {labels} does not match point count {points}")]
    LabelCount { labels: usize, points: usize },
    #[error("subspace must be non-empty")]
    EmptySubspace,
    #[error("set {0:?} uses points outside the space")]
    OutOfRange(PointSet),
    #[error("relation is not reflexive at point {0}")]
    NotReflexive(usize),
    #[error("relation is not transitive: {0} ≤ {1} ≤ {2} but not {0} ≤ {2}")]
    NotTransitive(usize, usize, usize),
    #[error("neighbourhood table is not induced by a topology at point {0}")]
    BadNeighbourhood(usize),
    #[error("space has more than {OPEN_LIST_LIMIT} opens; the open list is not materialized")]
    OpensUnavailable,
}

/// A validated finite topological space on points `0..n`.
///
/// Equality compares the topology only (point count and opens), not the
/// name or the labels.
#[derive(Clone)]
pub struct FiniteSpace {
    name: String,
    labels: Vec<String>,
    nbhd: Vec<PointSet>,
    opens: Option<Vec<PointSet>>,
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        self.nbhd == other.nbhd
    }
}

impl Eq for FiniteSpace {}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteSpace")
            .field("name", &self.name)
            .field("labels", &self.labels)
            .field("opens", &self.opens)
            .finish()
    }
}

/// Default labels: `a`..`z` for small spaces, `p<i>` beyond that.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= 26 {
                String::from(char::from(b'a' + i as u8))
            } else {
                format!("p{i}")
            }
        })
        .collect()
}

impl FiniteSpace {
    /// Builds a space from labels and label-level open sets, checking every axiom.
    pub fn validate_topology<L, O, S>(
        name: &str,
        labels: &[L],
        raw_opens: &[O],
    ) -> Result<FiniteSpace, SpaceError>
    where
        L: AsRef<str>,
        O: AsRef<[S]>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels.iter().map(|l| String::from(l.as_ref())).collect();
        check_labels(&labels)?;
        let mut opens = Vec::with_capacity(raw_opens.len());
        for raw in raw_opens {
            let mut set = PointSet::EMPTY;
            for l in raw.as_ref() {
                let l = l.as_ref();
                let i = labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| SpaceError::UnknownLabel(String::from(l)))?;
                set |= PointSet::singleton(i);
            }
            opens.push(set);
        }
        Self::from_opens_labeled(name, labels, opens)
    }

    /// Builds a space from index-level opens with default labels.
    pub fn from_opens<I>(name: &str, n: usize, opens: I) -> Result<FiniteSpace, SpaceError>
    where
        I: IntoIterator<Item = PointSet>,
    {
        if n > MAX_POINTS {
            return Err(SpaceError::TooManyPoints(n));
        }
        Self::from_opens_labeled(name, default_labels(n), opens)
    }

    /// Builds a space from index-level opens with the given labels.
    pub fn from_opens_labeled<I>(
        name: &str,
        labels: Vec<String>,
        opens: I,
    ) -> Result<FiniteSpace, SpaceError>
    where
        I: IntoIterator<Item = PointSet>,
    {
        check_labels(&labels)?;
        let n = labels.len();
        let full = PointSet::full(n);
        let mut list: Vec<PointSet> = opens.into_iter().collect();
        for &o in &list {
            if !o.is_subset(full) {
                return Err(SpaceError::OutOfRange(o));
            }
        }
        list.sort_unstable();
        list.dedup();
        if list.binary_search(&PointSet::EMPTY).is_err() || list.binary_search(&full).is_err() {
            return Err(SpaceError::MissingEmptyOrFull);
        }
        let named = |s: PointSet| -> Vec<String> { s.iter().map(|i| labels[i].clone()).collect() };
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                if list.binary_search(&(a | b)).is_err() {
                    return Err(SpaceError::NotClosedUnderUnion { left: named(a), right: named(b) });
                }
            }
        }
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                if list.binary_search(&(a & b)).is_err() {
                    return Err(SpaceError::NotClosedUnderIntersection {
                        left: named(a),
                        right: named(b),
                    });
                }
            }
        }
        let nbhd = (0..n)
            .map(|x| {
                list.iter()
                    .filter(|o| o.contains(x))
                    .fold(full, |acc, &o| acc & o)
            })
            .collect();
        Ok(FiniteSpace { name: String::from(name), labels, nbhd, opens: Some(list) })
    }

    /// Builds a space from its minimal-neighbourhood table.
    ///
    /// `nbhd[x]` must contain `x`, and `y ∈ nbhd[x]` must imply
    /// `nbhd[y] ⊆ nbhd[x]`.
    pub fn from_neighbourhoods(
        name: &str,
        labels: Vec<String>,
        nbhd: Vec<PointSet>,
    ) -> Result<FiniteSpace, SpaceError> {
        check_labels(&labels)?;
        let n = labels.len();
        if nbhd.len() != n {
            return Err(SpaceError::LabelCount { labels: n, points: nbhd.len() });
        }
        let full = PointSet::full(n);
        for (x, &u) in nbhd.iter().enumerate() {
            if !u.contains(x) || !u.is_subset(full) || u.iter().any(|y| !nbhd[y].is_subset(u)) {
                return Err(SpaceError::BadNeighbourhood(x));
            }
        }
        let opens = opens_from_neighbourhoods(&nbhd, OPEN_LIST_LIMIT);
        Ok(FiniteSpace { name: String::from(name), labels, nbhd, opens })
    }

    pub fn discrete(n: usize) -> FiniteSpace {
        let nbhd = (0..n).map(PointSet::singleton).collect();
        Self::from_neighbourhoods(&format!("discrete{n}"), default_labels(n), nbhd)
            .expect("discrete topology")
    }

    pub fn indiscrete(n: usize) -> FiniteSpace {
        let nbhd = alloc::vec![PointSet::full(n); n];
        Self::from_neighbourhoods(&format!("indiscrete{n}"), default_labels(n), nbhd)
            .expect("indiscrete topology")
    }

    /// Points `a`, `b` with opens `∅, {b}, {a, b}`.
    pub fn sierpinski() -> FiniteSpace {
        let nbhd = alloc::vec![PointSet::full(2), PointSet::singleton(1)];
        Self::from_neighbourhoods("sierpinski", default_labels(2), nbhd).expect("sierpinski")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> FiniteSpace {
        self.name = String::from(name);
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<FiniteSpace, SpaceError> {
        check_labels(&labels)?;
        if labels.len() != self.len() {
            return Err(SpaceError::LabelCount { labels: labels.len(), points: self.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Point count.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn point_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn set_labels(&self, s: PointSet) -> Vec<String> {
        s.iter().map(|i| self.labels[i].clone()).collect()
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.len())
    }

    /// Minimal open neighbourhood table, indexed by point.
    pub fn neighbourhoods(&self) -> &[PointSet] {
        &self.nbhd
    }

    pub fn neighbourhood(&self, x: usize) -> PointSet {
        self.nbhd[x]
    }

    /// The sorted open list, if it was small enough to materialize.
    pub fn opens(&self) -> Option<&[PointSet]> {
        self.opens.as_deref()
    }

    pub fn try_opens(&self) -> Result<&[PointSet], SpaceError> {
        self.opens().ok_or(SpaceError::OpensUnavailable)
    }

    pub fn is_open(&self, s: PointSet) -> bool {
        s.is_subset(self.full()) && self.interior(s) == s
    }

    pub fn is_closed(&self, s: PointSet) -> bool {
        self.is_open(s.complement(self.len()))
    }

    /// Largest open set inside `s`.
    pub fn interior(&self, s: PointSet) -> PointSet {
        PointSet::from_points((0..self.len()).filter(|&x| self.nbhd[x].is_subset(s)))
    }

    /// Smallest closed set containing `s`: the complement of the largest
    /// open inside the complement of `s`.
    pub fn closure(&self, s: PointSet) -> PointSet {
        PointSet::from_points((0..self.len()).filter(|&x| self.nbhd[x].meets(s)))
    }

    pub fn is_dense(&self, a: PointSet) -> bool {
        self.closure(a) == self.full()
    }

    /// Inclusion-minimal non-empty opens, sorted by bitmask.
    pub fn minimal_opens(&self) -> Vec<PointSet> {
        let mut out: Vec<PointSet> = (0..self.len())
            .map(|x| self.nbhd[x])
            .filter(|&u| u.iter().all(|y| self.nbhd[y] == u))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The subspace topology on `s`, re-indexed to `0..|s|` in point order.
    pub fn subspace(&self, s: PointSet) -> Result<FiniteSpace, SpaceError> {
        if s.is_empty() {
            return Err(SpaceError::EmptySubspace);
        }
        if !s.is_subset(self.full()) {
            return Err(SpaceError::OutOfRange(s));
        }
        let labels = s.iter().map(|i| self.labels[i].clone()).collect();
        let nbhd = s.iter().map(|x| compress(self.nbhd[x] & s, s)).collect();
        Self::from_neighbourhoods(&format!("{}|{}", self.name, s.0), labels, nbhd)
    }

    /// True when distinct points have distinct neighbourhoods.
    pub fn is_t0(&self) -> bool {
        let mut seen: Vec<PointSet> = self.nbhd.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == self.len()
    }

    /// For finite spaces T1 means discrete.
    pub fn is_t1(&self) -> bool {
        self.nbhd.iter().enumerate().all(|(x, &u)| u == PointSet::singleton(x))
    }

    /// Relabels points by `perm` (old index `i` becomes `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> FiniteSpace {
        let n = self.len();
        debug_assert_eq!(perm.len(), n);
        let mut nbhd = alloc::vec![PointSet::EMPTY; n];
        let mut labels = alloc::vec![String::new(); n];
        for x in 0..n {
            nbhd[perm[x]] = permute_set(self.nbhd[x], perm);
            labels[perm[x]] = self.labels[x].clone();
        }
        let mut out = Self::from_neighbourhoods(&self.name, labels, nbhd)
            .expect("permutation preserves the topology axioms");
        out.name = self.name.clone();
        out
    }
}

fn check_labels(labels: &[String]) -> Result<(), SpaceError> {
    if labels.is_empty() {
        return Err(SpaceError::NoPoints);
    }
    if labels.len() > MAX_POINTS {
        return Err(SpaceError::TooManyPoints(labels.len()));
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(SpaceError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// Maps `set ⊆ within` onto indices `0..|within|` preserving order.
pub fn compress(set: PointSet, within: PointSet) -> PointSet {
    PointSet::from_points(within.iter().enumerate().filter(|&(_, p)| set.contains(p)).map(|(i, _)| i))
}

/// Image of `set` under the point map `perm`.
pub fn permute_set(set: PointSet, perm: &[usize]) -> PointSet {
    PointSet::from_points(set.iter().map(|i| perm[i]))
}

/// All unions of the neighbourhoods, sorted; `None` once `limit` is exceeded.
pub fn opens_from_neighbourhoods(nbhd: &[PointSet], limit: usize) -> Option<Vec<PointSet>> {
    let mut generators: Vec<PointSet> = nbhd.to_vec();
    generators.sort_unstable();
    generators.dedup();
    let mut found: BTreeSet<PointSet> = BTreeSet::new();
    found.insert(PointSet::EMPTY);
    for g in generators {
        let fresh: Vec<PointSet> = found.iter().map(|&o| o | g).filter(|o| !found.contains(o)).collect();
        found.extend(fresh);
        if found.len() > limit {
            return None;
        }
    }
    Some(found.into_iter().collect())
}

/// The specialization preorder: `leq(x, y)` iff `x` lies in the closure of `{y}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preorder {
    n: usize,
    leq: Vec<bool>,
}

impl Preorder {
    /// Checks reflexivity and transitivity of a row-major `n × n` matrix.
    pub fn new(n: usize, leq: Vec<bool>) -> Result<Preorder, SpaceError> {
        if n == 0 {
            return Err(SpaceError::NoPoints);
        }
        if n > MAX_POINTS {
            return Err(SpaceError::TooManyPoints(n));
        }
        if leq.len() != n * n {
            return Err(SpaceError::LabelCount { labels: n * n, points: leq.len() });
        }
        for x in 0..n {
            if !leq[x * n + x] {
                return Err(SpaceError::NotReflexive(x));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if !leq[x * n + y] {
                    continue;
                }
                for z in 0..n {
                    if leq[y * n + z] && !leq[x * n + z] {
                        return Err(SpaceError::NotTransitive(x, y, z));
                    }
                }
            }
        }
        Ok(Preorder { n, leq })
    }

    pub fn of_space(space: &FiniteSpace) -> Preorder {
        let n = space.len();
        let mut leq = alloc::vec![false; n * n];
        for x in 0..n {
            for y in space.neighbourhood(x).iter() {
                leq[x * n + y] = true;
            }
        }
        Preorder { n, leq }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    /// Opens are the up-sets: `x ∈ U` and `x ≤ y` force `y ∈ U`.
    pub fn to_space(&self, name: &str) -> FiniteSpace {
        let nbhd = (0..self.n)
            .map(|x| PointSet::from_points((0..self.n).filter(|&y| self.leq(x, y))))
            .collect();
        FiniteSpace::from_neighbourhoods(name, default_labels(self.n), nbhd)
            .expect("preorder up-sets form a topology")
    }
}
