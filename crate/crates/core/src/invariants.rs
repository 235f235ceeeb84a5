//! Cardinal invariants of finite spaces: density, δ, π-weight, weight, tightness.
//!
//! Each invariant has a structural formula and a brute-force counterpart in
//! [`brute`]. The two share nothing beyond the space's closure operator, so
//! comparing them is a genuine cross-check.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{self, GameError, GameVariant};
use crate::space::{FiniteSpace, PointSet};

/// Point-count ceiling for the `2^n` searches.
pub const SUBSET_SEARCH_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("{n} points exceed the subset-search limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("space has too many opens to search subfamilies")]
    OpensUnavailable,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The invariant chain of one space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub d: usize,
    pub delta: usize,
    pub gd: usize,
    pub pi: usize,
    pub w: usize,
    pub t: usize,
}

impl InvariantReport {
    /// Computes every invariant; `gd` comes from solving the restricted game.
    pub fn compute(space: &FiniteSpace) -> Result<InvariantReport, InvariantError> {
        let table = game::solve_game(space, GameVariant::Restricted)?;
        Ok(InvariantReport {
            d: density(space),
            delta: delta(space)?,
            gd: table.gd(),
            pi: pi_weight(space),
            w: weight(space),
            t: tightness(space)?,
        })
    }

    /// `d ≤ δ ≤ gd ≤ π ≤ w`.
    pub fn chain_holds(&self) -> bool {
        self.d <= self.delta && self.delta <= self.gd && self.gd <= self.pi && self.pi <= self.w
    }
}

fn guard(space: &FiniteSpace) -> Result<(), InvariantError> {
    if space.len() > SUBSET_SEARCH_LIMIT {
        Err(InvariantError::TooLarge { n: space.len(), limit: SUBSET_SEARCH_LIMIT })
    } else {
        Ok(())
    }
}

/// Least size of a dense subset. A set is dense iff it meets every minimal
/// open, and minimal opens are disjoint, so this is their count.
pub fn density(space: &FiniteSpace) -> usize {
    space.minimal_opens().len()
}

/// Least size of a π-base; the minimal opens form the unique smallest one.
pub fn pi_weight(space: &FiniteSpace) -> usize {
    space.minimal_opens().len()
}

/// Least size of a base: every minimal neighbourhood `U_x` is
/// join-irreducible, so each distinct one must be present.
pub fn weight(space: &FiniteSpace) -> usize {
    let mut u: Vec<PointSet> = space.neighbourhoods().to_vec();
    u.sort_unstable();
    u.dedup();
    u.len()
}

/// Smallest dense subset of `space` contained in `within`, by size.
fn least_dense_inside(space: &FiniteSpace, within: PointSet) -> usize {
    within
        .subsets()
        .filter(|&d| space.is_dense(d))
        .map(PointSet::len)
        .min()
        .unwrap_or(usize::MAX)
}

/// Supremum of `d(A)` over dense `A`.
///
/// A subset of a dense `A` that is dense in `A` is dense in the whole space,
/// so `d(A)` is the least size of a subset of `A` dense in the space; no
/// subspace is built in this loop.
pub fn delta(space: &FiniteSpace) -> Result<usize, InvariantError> {
    guard(space)?;
    Ok(space
        .full()
        .subsets()
        .filter(|&a| space.is_dense(a))
        .map(|a| least_dense_inside(space, a))
        .max()
        .unwrap_or(0))
}

/// Tightness by exhaustive search over `(x, Y)` with `x ∈ cl(Y)`.
pub fn tightness(space: &FiniteSpace) -> Result<usize, InvariantError> {
    guard(space)?;
    let mut worst = 0;
    for y in space.full().subsets() {
        let cl = space.closure(y);
        for x in cl.iter() {
            let need = y
                .subsets()
                .filter(|&z| space.closure(z).contains(x))
                .map(PointSet::len)
                .min()
                .expect("Y itself qualifies");
            worst = worst.max(need);
        }
    }
    Ok(worst)
}

/// Independent brute-force reference computations.
pub mod brute {
    use super::*;
    use crate::combinations::any_combination;

    /// Least `|A|` with `cl(A) = X`, by enumerating subsets.
    pub fn density(space: &FiniteSpace) -> Result<usize, InvariantError> {
        guard(space)?;
        Ok(least_dense_inside(space, space.full()))
    }

    fn nonempty_opens(space: &FiniteSpace) -> Result<Vec<PointSet>, InvariantError> {
        let opens = space.opens().ok_or(InvariantError::OpensUnavailable)?;
        Ok(opens.iter().copied().filter(|o| !o.is_empty()).collect())
    }

    /// Smallest subfamily of non-empty opens forming a π-base.
    pub fn pi_weight(space: &FiniteSpace) -> Result<usize, InvariantError> {
        guard(space)?;
        let opens = nonempty_opens(space)?;
        for k in 1..=opens.len() {
            let found = any_combination(opens.len(), k, |idx| {
                opens.iter().all(|&u| idx.iter().any(|&i| opens[i].is_subset(u)))
            });
            if found {
                return Ok(k);
            }
        }
        Ok(opens.len())
    }

    /// Smallest subfamily of opens whose unions give every open.
    pub fn weight(space: &FiniteSpace) -> Result<usize, InvariantError> {
        guard(space)?;
        let opens = nonempty_opens(space)?;
        for k in 1..=opens.len() {
            let found = any_combination(opens.len(), k, |idx| {
                opens.iter().all(|&u| {
                    idx.iter()
                        .map(|&i| opens[i])
                        .filter(|b| b.is_subset(u))
                        .fold(PointSet::EMPTY, |acc, b| acc | b)
                        == u
                })
            });
            if found {
                return Ok(k);
            }
        }
        Ok(opens.len())
    }

    /// δ through explicit subspace topologies.
    pub fn delta(space: &FiniteSpace) -> Result<usize, InvariantError> {
        guard(space)?;
        let mut best = 0;
        for a in space.full().subsets().filter(|&a| space.is_dense(a)) {
            let sub = space.subspace(a).expect("dense sets are non-empty");
            best = best.max(density(&sub)?);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::default_labels;
    use alloc::vec;

    fn two_sierpinski() -> FiniteSpace {
        FiniteSpace::from_neighbourhoods(
            "ss",
            default_labels(4),
            vec![PointSet(0b0011), PointSet(0b0010), PointSet(0b1100), PointSet(0b1000)],
        )
        .unwrap()
    }

    fn chain_space() -> FiniteSpace {
        FiniteSpace::from_opens("t", 3, [PointSet(0), PointSet(0b011), PointSet(0b111)]).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&FiniteSpace::sierpinski()), 1);
        assert_eq!(density(&FiniteSpace::discrete(3)), 3);
        assert_eq!(density(&two_sierpinski()), 2);
        assert_eq!(brute::density(&two_sierpinski()).unwrap(), 2);
    }

    #[test]
    fn pi_weight_examples() {
        assert_eq!(pi_weight(&FiniteSpace::sierpinski()), 1);
        assert_eq!(pi_weight(&FiniteSpace::indiscrete(5)), 1);
        assert_eq!(pi_weight(&FiniteSpace::discrete(4)), 4);
        assert_eq!(brute::pi_weight(&FiniteSpace::discrete(4)).unwrap(), 4);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&FiniteSpace::sierpinski()), 2);
        assert_eq!(brute::weight(&FiniteSpace::sierpinski()).unwrap(), 2);
        assert_eq!(weight(&chain_space()), 2);
        assert_eq!(brute::weight(&chain_space()).unwrap(), 2);
        assert_eq!(weight(&FiniteSpace::discrete(3)), 3);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&FiniteSpace::sierpinski()).unwrap(), 1);
        assert_eq!(delta(&two_sierpinski()).unwrap(), 2);
        assert_eq!(brute::delta(&two_sierpinski()).unwrap(), 2);
        assert_eq!(delta(&FiniteSpace::discrete(4)).unwrap(), 4);
    }

    #[test]
    fn tightness_examples() {
        assert_eq!(tightness(&FiniteSpace::sierpinski()).unwrap(), 1);
        assert_eq!(tightness(&FiniteSpace::discrete(4)).unwrap(), 1);
        assert_eq!(tightness(&FiniteSpace::indiscrete(5)).unwrap(), 1);
    }

    #[test]
    fn sierpinski_report() {
        let r = InvariantReport::compute(&FiniteSpace::sierpinski()).unwrap();
        assert_eq!(r, InvariantReport { d: 1, delta: 1, gd: 1, pi: 1, w: 2, t: 1 });
        assert!(r.chain_holds());
    }

    #[test]
    fn large_spaces_are_refused() {
        let big = FiniteSpace::discrete(21);
        assert!(matches!(delta(&big), Err(InvariantError::TooLarge { .. })));
        assert_eq!(density(&big), 21);
    }
}
