//! Finite product spaces and the fan tightness condition on their finite
//! subproducts.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinations::any_combination;
use crate::invariants::pi_weight;
use crate::space::{FiniteSpace, PointSet, SpaceError, MAX_POINTS};

/// Subproducts searched by the fan tightness check have at most this many points.
pub const FAN_POINT_LIMIT: usize = 16;

/// Family candidates tried per `(Γ, U)` cell before giving up on it.
pub const FAN_SEARCH_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("product needs at least one factor")]
    NoFactors,
    #[error("product of {points} points exceeds the limit of {limit}")]
    TooLarge { points: usize, limit: usize },
    #[error("factor index {0} out of range")]
    BadFactor(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A product of finite spaces together with its coordinate maps.
///
/// Product points are numbered in mixed radix with the first factor most
/// significant, so `(c_0, …, c_{k-1})` has index `Σ c_i · stride_i`.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    factors: Vec<FiniteSpace>,
    space: FiniteSpace,
    strides: Vec<usize>,
}

/// Builds the product topology: the minimal neighbourhood of a tuple is the
/// box of the factors' minimal neighbourhoods.
pub fn product(factors: &[FiniteSpace]) -> Result<ProductSpace, ProductError> {
    if factors.is_empty() {
        return Err(ProductError::NoFactors);
    }
    let points = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()));
    let points = match points {
        Some(p) if p <= MAX_POINTS => p,
        Some(p) => return Err(ProductError::TooLarge { points: p, limit: MAX_POINTS }),
        None => return Err(ProductError::TooLarge { points: usize::MAX, limit: MAX_POINTS }),
    };
    let k = factors.len();
    let mut strides = alloc::vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * factors[i + 1].len();
    }
    let coords_of = |p: usize| -> Vec<usize> {
        (0..k).map(|i| (p / strides[i]) % factors[i].len()).collect()
    };
    let mut labels = Vec::with_capacity(points);
    let mut nbhd = Vec::with_capacity(points);
    for p in 0..points {
        let c = coords_of(p);
        let parts: Vec<&str> = c.iter().enumerate().map(|(i, &ci)| factors[i].label(ci)).collect();
        labels.push(format!("({})", parts.join(",")));
        let comps: Vec<PointSet> = c.iter().enumerate().map(|(i, &ci)| factors[i].neighbourhood(ci)).collect();
        nbhd.push(box_of(factors, &strides, &comps));
    }
    let name: Vec<&str> = factors.iter().map(|f| f.name()).collect();
    let space = FiniteSpace::from_neighbourhoods(&name.join("×"), labels, nbhd)?;
    Ok(ProductSpace { factors: factors.to_vec(), space, strides })
}

fn box_of(factors: &[FiniteSpace], strides: &[usize], comps: &[PointSet]) -> PointSet {
    let mut acc = alloc::vec![0usize];
    for (i, comp) in comps.iter().enumerate() {
        debug_assert!(comp.is_subset(factors[i].full()));
        let mut next = Vec::with_capacity(acc.len() * comp.len());
        for &base in &acc {
            for c in comp.iter() {
                next.push(base + c * strides[i]);
            }
        }
        acc = next;
    }
    PointSet::from_points(acc)
}

impl ProductSpace {
    pub fn factors(&self) -> &[FiniteSpace] {
        &self.factors
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn into_space(self) -> FiniteSpace {
        self.space
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn coord(&self, point: usize, factor: usize) -> usize {
        (point / self.strides[factor]) % self.factors[factor].len()
    }

    pub fn coords(&self, point: usize) -> Vec<usize> {
        (0..self.arity()).map(|i| self.coord(point, i)).collect()
    }

    pub fn point(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Image of `set` under the projection to one factor.
    pub fn project(&self, factor: usize, set: PointSet) -> PointSet {
        PointSet::from_points(set.iter().map(|p| self.coord(p, factor)))
    }

    /// The box `∏ comps[i]`.
    pub fn boxed(&self, comps: &[PointSet]) -> PointSet {
        box_of(&self.factors, &self.strides, comps)
    }

    /// Preimage of `set ⊆ X_factor` under the projection.
    pub fn cylinder(&self, factor: usize, set: PointSet) -> PointSet {
        PointSet::from_points((0..self.space.len()).filter(|&p| set.contains(self.coord(p, factor))))
    }

    /// Boxes of minimal opens, each with its per-factor components, in
    /// lexicographic order of the component lists.
    pub fn minimal_boxes(&self) -> Vec<(PointSet, Vec<PointSet>)> {
        let per_factor: Vec<Vec<PointSet>> = self.factors.iter().map(|f| f.minimal_opens()).collect();
        let mut out: Vec<Vec<PointSet>> = alloc::vec![Vec::new()];
        for options in &per_factor {
            let mut next = Vec::with_capacity(out.len() * options.len());
            for prefix in &out {
                for &m in options {
                    let mut v = prefix.clone();
                    v.push(m);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(|comps| (self.boxed(&comps), comps)).collect()
    }

    /// The subproduct over the factors in `gamma` (ascending indices).
    pub fn subproduct(&self, gamma: &[usize]) -> Result<ProductSpace, ProductError> {
        let mut chosen = Vec::with_capacity(gamma.len());
        for &g in gamma {
            chosen.push(self.factors.get(g).cloned().ok_or(ProductError::BadFactor(g))?);
        }
        product(&chosen)
    }

    /// Projection of `set` onto the subproduct `sub` over `gamma`.
    pub fn project_onto(&self, gamma: &[usize], sub: &ProductSpace, set: PointSet) -> PointSet {
        PointSet::from_points(set.iter().map(|p| {
            let c: Vec<usize> = gamma.iter().map(|&g| self.coord(p, g)).collect();
            sub.point(&c)
        }))
    }
}

/// Which opens may serve as the family `{V_β}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidatePool {
    /// Boxes of minimal opens of the subproduct.
    Boxes,
    /// Every non-empty open of the subproduct.
    All,
}

/// What the closure in the shrinkage condition is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureReading {
    /// The closure of the constrained set `A` itself.
    Whole,
    /// The closure of the union of the traces `A ∩ V_β`.
    Traces,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FanStatus {
    Holds,
    HoldsViaSufficientCondition,
    Unknown,
}

/// Outcome of the family search for one `(Γ, U)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellOutcome {
    Found,
    /// Every family of at most κ pool members was tried and none works.
    Exhausted,
    /// The search budget ran out first.
    Budget,
}

/// One `(Γ, U)` cell: `open` and the family are point sets of the Γ-subproduct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCell {
    pub gamma: Vec<usize>,
    pub open: PointSet,
    pub outcome: CellOutcome,
    pub family: Option<Vec<PointSet>>,
}

/// Result of the sufficient-condition test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SufficientCondition {
    pub holds: bool,
    /// Factors with π above κ, which must pass the open-refinement clause.
    pub designated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanTightnessVerdict {
    pub kappa: usize,
    pub pool: CandidatePool,
    pub reading: ClosureReading,
    pub status: FanStatus,
    pub sufficient: SufficientCondition,
    pub cells: Vec<WitnessCell>,
}

impl FanTightnessVerdict {
    /// The witness family for `(gamma, open)`, if one was found.
    pub fn family(&self, gamma: &[usize], open: PointSet) -> Option<&[PointSet]> {
        self.cells
            .iter()
            .find(|c| c.gamma == gamma && c.open == open)
            .and_then(|c| c.family.as_deref())
    }

    pub fn holds(&self) -> bool {
        self.status != FanStatus::Unknown
    }
}

/// Every designated factor (π above κ) must have each non-empty open
/// contain a non-empty open `W` with `π(W) ≤ κ`; there must be at most κ
/// factors.
pub fn sufficient_condition_check(
    factors: &[FiniteSpace],
    kappa: usize,
) -> Result<SufficientCondition, ProductError> {
    let designated: Vec<usize> = (0..factors.len()).filter(|&i| pi_weight(&factors[i]) > kappa).collect();
    let mut holds = factors.len() <= kappa;
    for &i in &designated {
        let f = &factors[i];
        let opens = f.try_opens()?;
        let refinable = opens.iter().filter(|v| !v.is_empty()).all(|&v| {
            opens
                .iter()
                .filter(|w| !w.is_empty() && w.is_subset(v))
                .any(|&w| f.subspace(w).map(|s| pi_weight(&s) <= kappa).unwrap_or(false))
        });
        holds &= refinable;
    }
    Ok(SufficientCondition { holds, designated })
}

/// Per-subproduct tables shared by every cell of one Γ.
struct SubTables<'a> {
    sub: &'a ProductSpace,
    /// `fibers[γ][c]`: points of the subproduct whose γ-th coordinate is `c`.
    fibers: Vec<Vec<PointSet>>,
}

impl<'a> SubTables<'a> {
    fn new(sub: &'a ProductSpace) -> Self {
        let fibers = (0..sub.arity())
            .map(|g| (0..sub.factors()[g].len()).map(|c| sub.cylinder(g, PointSet::singleton(c))).collect())
            .collect();
        SubTables { sub, fibers }
    }

    fn project(&self, g: usize, set: PointSet) -> PointSet {
        PointSet::from_points(self.fibers[g].iter().enumerate().filter(|(_, f)| f.meets(set)).map(|(c, _)| c))
    }

    /// `cl(π_γ(A ∩ V)) = cl(π_γ(V))` for every coordinate.
    fn traces_fill(&self, a: PointSet, v: PointSet) -> bool {
        let trace = a & v;
        (0..self.sub.arity()).all(|g| {
            let f = &self.sub.factors()[g];
            f.closure(self.project(g, trace)) == f.closure(self.project(g, v))
        })
    }

    /// Some coordinate `γ` has `π_γ(U ∖ cl(A)) ⊊ π_γ(U)`.
    fn shrinks(&self, u: PointSet, a: PointSet) -> bool {
        let rest = u - self.sub.space().closure(a);
        (0..self.sub.arity()).any(|g| self.project(g, rest) != self.project(g, u))
    }
}

fn subsets_of_indices(k: usize) -> Vec<Vec<usize>> {
    (1u64..(1u64 << k)).map(|m| PointSet(m).iter().collect()).collect()
}

/// Searches, for every non-empty `Γ` and every non-empty open `U` of the
/// Γ-subproduct, for at most κ pool members `{V_β}` such that every `A`
/// filling each trace `A ∩ V_β` shrinks some coordinate projection of `U`.
///
/// The search is sound for `Holds` only: a missing witness within the pool
/// and budget is reported, not taken as a refutation.
pub fn fan_tightness_check(
    factors: &[FiniteSpace],
    kappa: usize,
    pool: CandidatePool,
    reading: ClosureReading,
) -> Result<FanTightnessVerdict, ProductError> {
    let full = product(factors)?;
    let mut cells = Vec::new();
    for gamma in subsets_of_indices(factors.len()) {
        let sub = full.subproduct(&gamma)?;
        let n = sub.space().len();
        if n > FAN_POINT_LIMIT {
            return Err(ProductError::TooLarge { points: n, limit: FAN_POINT_LIMIT });
        }
        let opens = sub.space().try_opens()?.to_vec();
        let candidates: Vec<PointSet> = match pool {
            CandidatePool::Boxes => sub.minimal_boxes().into_iter().map(|(b, _)| b).collect(),
            CandidatePool::All => opens.iter().copied().filter(|o| !o.is_empty()).collect(),
        };
        let tables = SubTables::new(&sub);
        let all_sets: Vec<PointSet> = sub.space().full().subsets().collect();
        // sat[a][j]: A = all_sets[a] fills the trace on candidates[j].
        let sat: Vec<Vec<bool>> = all_sets
            .iter()
            .map(|&a| candidates.iter().map(|&v| tables.traces_fill(a, v)).collect())
            .collect();
        for &u in opens.iter().filter(|o| !o.is_empty()) {
            let (outcome, family) = match reading {
                ClosureReading::Whole => {
                    let bad: Vec<usize> =
                        (0..all_sets.len()).filter(|&a| !tables.shrinks(u, all_sets[a])).collect();
                    search_family(candidates.len(), kappa, |fam| {
                        bad.iter().all(|&a| fam.iter().any(|&j| !sat[a][j]))
                    })
                }
                ClosureReading::Traces => search_family(candidates.len(), kappa, |fam| {
                    let union = fam.iter().fold(PointSet::EMPTY, |acc, &j| acc | candidates[j]);
                    (0..all_sets.len()).all(|a| {
                        !fam.iter().all(|&j| sat[a][j]) || tables.shrinks(u, all_sets[a] & union)
                    })
                }),
            };
            cells.push(WitnessCell {
                gamma: gamma.clone(),
                open: u,
                outcome,
                family: family.map(|f| f.iter().map(|&j| candidates[j]).collect()),
            });
        }
    }
    let sufficient = sufficient_condition_check(factors, kappa)?;
    let status = if cells.iter().all(|c| c.outcome == CellOutcome::Found) {
        FanStatus::Holds
    } else if sufficient.holds {
        FanStatus::HoldsViaSufficientCondition
    } else {
        FanStatus::Unknown
    };
    Ok(FanTightnessVerdict { kappa, pool, reading, status, sufficient, cells })
}

fn search_family<F: FnMut(&[usize]) -> bool>(
    m: usize,
    kappa: usize,
    mut works: F,
) -> (CellOutcome, Option<Vec<usize>>) {
    let mut tried = 0usize;
    let mut out_of_budget = false;
    for k in 1..=kappa.min(m) {
        let mut found = None;
        any_combination(m, k, |idx| {
            tried += 1;
            if tried > FAN_SEARCH_BUDGET {
                out_of_budget = true;
                return true;
            }
            if works(idx) {
                found = Some(idx.to_vec());
                true
            } else {
                false
            }
        });
        if out_of_budget {
            return (CellOutcome::Budget, None);
        }
        if found.is_some() {
            return (CellOutcome::Found, found);
        }
    }
    (CellOutcome::Exhausted, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve_game, GameVariant};
    use alloc::vec;

    #[test]
    fn sierpinski_square() {
        let s = FiniteSpace::sierpinski();
        let p = product(&[s.clone(), s]).unwrap();
        assert_eq!(p.space().len(), 4);
        assert_eq!(pi_weight(p.space()), 1);
        assert_eq!(p.space().minimal_opens(), vec![PointSet::singleton(3)]);
        assert_eq!(solve_game(p.space(), GameVariant::Restricted).unwrap().gd(), 1);
        assert_eq!(p.space().label(3), "(b,b)");
    }

    #[test]
    fn discrete_times_sierpinski() {
        let p = product(&[FiniteSpace::discrete(2), FiniteSpace::sierpinski()]).unwrap();
        assert_eq!(pi_weight(p.space()), 2);
        let boxes = p.minimal_boxes();
        assert_eq!(boxes.len(), 2);
        assert_eq!(boxes[0].0, PointSet::singleton(p.point(&[0, 1])));
    }

    #[test]
    fn times_point_is_identity_up_to_labels() {
        let x = FiniteSpace::from_opens("t", 3, [PointSet(0), PointSet(0b011), PointSet(0b111)]).unwrap();
        let p = product(&[x.clone(), FiniteSpace::discrete(1)]).unwrap();
        assert_eq!(p.space(), &x);
    }

    #[test]
    fn too_large() {
        let d = FiniteSpace::discrete(5);
        assert!(matches!(
            product(&[d.clone(), d.clone(), d]),
            Err(ProductError::TooLarge { points: 125, .. })
        ));
        assert_eq!(product(&[]).unwrap_err(), ProductError::NoFactors);
    }

    #[test]
    fn projections_and_subproducts() {
        let p = product(&[FiniteSpace::discrete(2), FiniteSpace::sierpinski(), FiniteSpace::indiscrete(2)])
            .unwrap();
        assert_eq!(p.space().len(), 8);
        let z = p.point(&[1, 0, 1]);
        assert_eq!(p.coords(z), vec![1, 0, 1]);
        let sub = p.subproduct(&[0, 2]).unwrap();
        let img = p.project_onto(&[0, 2], &sub, PointSet::singleton(z));
        assert_eq!(img, PointSet::singleton(sub.point(&[1, 1])));
        assert_eq!(p.project(1, PointSet::singleton(z)), PointSet::singleton(0));
    }

    #[test]
    fn sufficient_condition_examples() {
        let s = FiniteSpace::sierpinski();
        assert!(sufficient_condition_check(&[s.clone(), s.clone()], 2).unwrap().holds);
        let r = sufficient_condition_check(&[FiniteSpace::discrete(3), s], 2).unwrap();
        assert!(r.holds);
        assert_eq!(r.designated, vec![0]);
        assert!(sufficient_condition_check(&[FiniteSpace::discrete(1)], 1).unwrap().holds);
        assert!(!sufficient_condition_check(&[FiniteSpace::discrete(1), FiniteSpace::discrete(1)], 1)
            .unwrap()
            .holds);
    }

    /// Checks a witness family against every subset `A` directly.
    fn witness_is_valid(factors: &[FiniteSpace], cell: &WitnessCell) -> bool {
        let full = product(factors).unwrap();
        let sub = full.subproduct(&cell.gamma).unwrap();
        let fam = cell.family.as_ref().unwrap();
        sub.space().full().subsets().all(|a| {
            let fills = fam.iter().all(|&v| {
                (0..sub.arity()).all(|g| {
                    let f = &sub.factors()[g];
                    f.closure(sub.project(g, a & v)) == f.closure(sub.project(g, v))
                })
            });
            if !fills {
                return true;
            }
            let rest = cell.open - sub.space().closure(a);
            (0..sub.arity()).any(|g| sub.project(g, rest) != sub.project(g, cell.open))
        })
    }

    #[test]
    fn fan_examples() {
        let s = FiniteSpace::sierpinski();
        let v = fan_tightness_check(&[s.clone(), s.clone()], 2, CandidatePool::Boxes, ClosureReading::Whole)
            .unwrap();
        assert_eq!(v.status, FanStatus::Holds);
        for c in &v.cells {
            assert!(witness_is_valid(&[s.clone(), s.clone()], c));
        }
        let i = [FiniteSpace::indiscrete(2)];
        let v = fan_tightness_check(&i, 1, CandidatePool::Boxes, ClosureReading::Whole).unwrap();
        assert_eq!(v.status, FanStatus::Holds);
        assert_eq!(v.family(&[0], PointSet::full(2)), Some(&[PointSet::full(2)][..]));
        let d = [FiniteSpace::discrete(2), FiniteSpace::discrete(2)];
        let v = fan_tightness_check(&d, 4, CandidatePool::Boxes, ClosureReading::Whole).unwrap();
        assert_eq!(v.status, FanStatus::Holds);
        for c in &v.cells {
            assert!(witness_is_valid(&d, c));
        }
    }

    #[test]
    fn kappa_zero_finds_nothing() {
        let s = [FiniteSpace::sierpinski()];
        let v = fan_tightness_check(&s, 0, CandidatePool::All, ClosureReading::Whole).unwrap();
        assert_eq!(v.status, FanStatus::Unknown);
        assert!(v.cells.iter().all(|c| c.outcome == CellOutcome::Exhausted));
    }
}
