//! Exhaustive generation of all topologies on a few points, labeled or up
//! to homeomorphism.
//!
//! Two unrelated generators exist so each can check the other: one filters
//! subset families for closure under `∪` and `∩`, the other filters boolean
//! matrices for reflexivity and transitivity.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{default_labels, permute_set, FiniteSpace, PointSet, Preorder};

pub const FAMILY_CLOSURE_LIMIT: usize = 4;
pub const PREORDER_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FamilyClosure,
    Preorder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Labeled,
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("{method:?} enumeration supports 1..={limit} points, got {n}")]
    TooLarge { n: usize, method: Method, limit: usize },
    #[error("the generators disagree at n = {0}")]
    GeneratorMismatch(usize),
}

/// Sorted opens, the key both generators and canonical forms are ordered by.
pub type OpenKey = Vec<PointSet>;

fn key_of(space: &FiniteSpace) -> OpenKey {
    let mut opens = space.opens().expect("small spaces materialize their opens").to_vec();
    opens.sort_unstable();
    opens
}

fn limit_for(method: Method) -> usize {
    match method {
        Method::FamilyClosure => FAMILY_CLOSURE_LIMIT,
        Method::Preorder => PREORDER_LIMIT,
    }
}

fn check_size(n: usize, method: Method) -> Result<(), EnumerationError> {
    let limit = limit_for(method);
    if n == 0 || n > limit {
        return Err(EnumerationError::TooLarge { n, method, limit });
    }
    Ok(())
}

fn family_closure_keys(n: usize) -> Vec<OpenKey> {
    let full = PointSet::full(n);
    let inner: Vec<PointSet> = (1..full.0).map(PointSet).collect();
    let mut out = Vec::new();
    for pick in 0u64..(1u64 << inner.len()) {
        let mut family: Vec<PointSet> = PointSet(pick).iter().map(|i| inner[i]).collect();
        family.push(PointSet::EMPTY);
        family.push(full);
        let member = |s: PointSet| s == PointSet::EMPTY || s == full || pick >> (s.0 - 1) & 1 == 1;
        let closed = family.iter().all(|&a| family.iter().all(|&b| member(a | b) && member(a & b)));
        if closed {
            family.sort_unstable();
            out.push(family);
        }
    }
    out.sort_unstable();
    out
}

fn preorder_keys(n: usize) -> Vec<OpenKey> {
    // Row x of the relation is U_x = {y : x ≤ y}; reflexivity is built in.
    let free: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y))).collect();
    let mut out = Vec::new();
    for pick in 0u64..(1u64 << free.len()) {
        let mut rows: Vec<PointSet> = (0..n).map(PointSet::singleton).collect();
        for i in PointSet(pick).iter() {
            let (x, y) = free[i];
            rows[x] |= PointSet::singleton(y);
        }
        let transitive = (0..n).all(|x| rows[x].iter().all(|y| rows[y].is_subset(rows[x])));
        if !transitive {
            continue;
        }
        let leq = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| rows[x].contains(y)).collect();
        let order = Preorder::new(n, leq).expect("filtered for reflexivity and transitivity");
        out.push(key_of(&order.to_space("")));
    }
    out.sort_unstable();
    out
}

fn keys(n: usize, method: Method) -> Result<Vec<OpenKey>, EnumerationError> {
    check_size(n, method)?;
    Ok(match method {
        Method::FamilyClosure => family_closure_keys(n),
        Method::Preorder => preorder_keys(n),
    })
}

fn build(n: usize, name: &str, key: &[PointSet]) -> FiniteSpace {
    FiniteSpace::from_opens_labeled(name, default_labels(n), key.iter().copied()).expect("generated families are topologies")
}

/// Every topology on `n` labeled points, ordered by sorted opens and named
/// `L{n}-{index}`.
pub fn enumerate_labeled(n: usize, method: Method) -> Result<Vec<FiniteSpace>, EnumerationError> {
    let keys = keys(n, method)?;
    Ok(keys.iter().enumerate().map(|(i, k)| build(n, &format!("L{n}-{i:03}"), k)).collect())
}

/// Labeled enumeration with both generators, failing if they disagree.
/// Above the family-closure limit only the preorder generator runs.
pub fn enumerate_labeled_checked(n: usize) -> Result<Vec<FiniteSpace>, EnumerationError> {
    if n <= FAMILY_CLOSURE_LIMIT && n > 0 && keys(n, Method::FamilyClosure)? != keys(n, Method::Preorder)? {
        return Err(EnumerationError::GeneratorMismatch(n));
    }
    enumerate_labeled(n, Method::Preorder)
}

/// Visits every permutation of `0..n` in lexicographic order.
pub fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        f(&p);
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("a larger element follows");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// The lexicographically least sorted-opens key over all relabelings,
/// with a permutation attaining it (`perm[old] = new`).
pub fn canonical_form(space: &FiniteSpace) -> (OpenKey, Vec<usize>) {
    let opens = space.opens().expect("small spaces materialize their opens");
    let mut best: Option<(OpenKey, Vec<usize>)> = None;
    for_each_permutation(space.len(), |perm| {
        let mut key: OpenKey = opens.iter().map(|&o| permute_set(o, perm)).collect();
        key.sort_unstable();
        if best.as_ref().is_none_or(|(b, _)| key < *b) {
            best = Some((key, perm.to_vec()));
        }
    });
    best.expect("at least the identity permutation")
}

/// The space relabeled into canonical form.
pub fn canonicalize(space: &FiniteSpace) -> FiniteSpace {
    let (_, perm) = canonical_form(space);
    space.permuted(&perm).with_labels(default_labels(space.len())).expect("label count matches")
}

/// Whether two spaces are homeomorphic.
pub fn homeomorphic(a: &FiniteSpace, b: &FiniteSpace) -> bool {
    a.len() == b.len() && canonical_form(a).0 == canonical_form(b).0
}

/// One canonical representative per homeomorphism class, ordered by
/// canonical key and named `U{n}-{index}`.
pub fn enumerate_unlabeled(n: usize) -> Result<Vec<FiniteSpace>, EnumerationError> {
    let mut reps: Vec<OpenKey> = keys(n, Method::Preorder)?
        .iter()
        .map(|k| canonical_form(&build(n, "", k)).0)
        .collect();
    reps.sort_unstable();
    reps.dedup();
    Ok(reps.iter().enumerate().map(|(i, k)| build(n, &format!("U{n}-{i:02}"), k)).collect())
}

/// The enumeration as an iterator, for consumers that stream.
#[derive(Debug)]
pub struct EnumerationStream {
    pub n: usize,
    pub mode: Mode,
    pub method: Method,
    inner: alloc::vec::IntoIter<FiniteSpace>,
}

impl EnumerationStream {
    pub fn new(n: usize, mode: Mode, method: Method) -> Result<Self, EnumerationError> {
        let spaces = match mode {
            Mode::Labeled => enumerate_labeled(n, method)?,
            Mode::Unlabeled => {
                check_size(n, method)?;
                enumerate_unlabeled(n)?
            }
        };
        Ok(EnumerationStream { n, mode, method, inner: spaces.into_iter() })
    }
}

impl Iterator for EnumerationStream {
    type Item = FiniteSpace;

    fn next(&mut self) -> Option<FiniteSpace> {
        self.inner.next()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.inner.size_hint()
    }
}

impl ExactSizeIterator for EnumerationStream {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_counts() {
        for (n, count) in [(1, 1), (2, 4), (3, 29), (4, 355)] {
            assert_eq!(enumerate_labeled(n, Method::FamilyClosure).unwrap().len(), count);
            assert_eq!(enumerate_labeled_checked(n).unwrap().len(), count);
        }
    }

    #[test]
    fn unlabeled_counts() {
        for (n, count) in [(1, 1), (2, 3), (3, 9), (4, 33)] {
            assert_eq!(enumerate_unlabeled(n).unwrap().len(), count);
        }
    }

    #[test]
    fn two_point_classes() {
        let spaces = enumerate_unlabeled(2).unwrap();
        assert!(spaces.iter().any(|s| homeomorphic(s, &FiniteSpace::discrete(2))));
        assert!(spaces.iter().any(|s| homeomorphic(s, &FiniteSpace::indiscrete(2))));
        assert!(spaces.iter().any(|s| homeomorphic(s, &FiniteSpace::sierpinski())));
    }

    #[test]
    fn size_limits() {
        assert!(matches!(enumerate_labeled(5, Method::FamilyClosure), Err(EnumerationError::TooLarge { .. })));
        assert!(matches!(enumerate_labeled(0, Method::Preorder), Err(EnumerationError::TooLarge { .. })));
        assert!(matches!(enumerate_unlabeled(6), Err(EnumerationError::TooLarge { .. })));
    }

    #[test]
    fn permutations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 6);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        let mut count = 0;
        for_each_permutation(1, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn canonical_form_is_idempotent() {
        for s in enumerate_labeled(3, Method::Preorder).unwrap() {
            let c = canonicalize(&s);
            assert_eq!(canonical_form(&c).0, key_of(&c));
        }
    }
}
