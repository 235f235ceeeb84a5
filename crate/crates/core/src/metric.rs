//! Finite pseudometric spaces, their partition topologies, and the greedy
//! dense-sequence algorithm.
//!
//! Distances are exact rationals; no comparison ever goes through floats.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{default_labels, FiniteSpace, PointSet, SpaceError, MAX_POINTS};

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricAxiom {
    /// The matrix is not `n × n`.
    Shape,
    /// `dist[i][i] ≠ 0`.
    Identity,
    NonNegative,
    Symmetry,
    /// `dist[i][k] > dist[i][j] + dist[j][k]`.
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("{axiom:?} fails at {triple:?}")]
    InvalidMetric { axiom: MetricAxiom, triple: (usize, usize, usize) },
    #[error("{0} labels for {1} points")]
    LabelCount(usize, usize),
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("start point {0} out of range")]
    BadStart(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A validated finite pseudometric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudometricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

impl PseudometricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        let n = dist.len();
        if labels.len() != n {
            return Err(MetricError::LabelCount(labels.len(), n));
        }
        if n == 0 {
            return Err(SpaceError::NoPoints.into());
        }
        if n > MAX_POINTS {
            return Err(SpaceError::TooManyPoints(n).into());
        }
        let bad = |axiom, i, j, k| Err(MetricError::InvalidMetric { axiom, triple: (i, j, k) });
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return bad(MetricAxiom::Shape, i, row.len(), 0);
            }
        }
        for (i, row) in dist.iter().enumerate() {
            if !row[i].is_zero() {
                return bad(MetricAxiom::Identity, i, i, i);
            }
            for (j, &v) in row.iter().enumerate() {
                if v < Rational::zero() {
                    return bad(MetricAxiom::NonNegative, i, j, j);
                }
                if v != dist[j][i] {
                    return bad(MetricAxiom::Symmetry, i, j, i);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return bad(MetricAxiom::Triangle, i, j, k);
                    }
                }
            }
        }
        Ok(PseudometricSpace { labels, dist })
    }

    pub fn unlabeled(dist: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        Self::new(default_labels(dist.len()), dist)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> Rational {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    /// The zero-distance class of `x`.
    pub fn class_of(&self, x: usize) -> PointSet {
        PointSet::from_points((0..self.len()).filter(|&y| self.dist[x][y].is_zero()))
    }

    /// Number of zero-distance classes.
    pub fn class_count(&self) -> usize {
        let mut seen = PointSet::EMPTY;
        let mut count = 0;
        for x in 0..self.len() {
            if !seen.contains(x) {
                seen |= self.class_of(x);
                count += 1;
            }
        }
        count
    }
}

/// The topology induced by the pseudometric: the union-closure of its
/// zero-distance classes.
pub fn topology_from_pseudometric(m: &PseudometricSpace) -> Result<FiniteSpace, MetricError> {
    let nbhd = (0..m.len()).map(|x| m.class_of(x)).collect();
    Ok(FiniteSpace::from_neighbourhoods("metric", m.labels.clone(), nbhd)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyRun {
    /// Picked points in order.
    pub order: Vec<usize>,
    /// `radii[β - 1]` is the radius `d_β` used for the β-th pick (β ≥ 1).
    pub radii: Vec<Rational>,
}

/// Greedy dense sequence from `start`.
///
/// At each stage `d` is the largest candidate radius `r` (a distance value
/// or `max dist + 1`) for which some open ball `B(x, r)` misses the closure
/// of the picks so far; the next pick is the lowest `x` whose ball of
/// radius `d / 2` misses it.
pub fn greedy_dense_sequence(m: &PseudometricSpace, start: usize) -> Result<GreedyRun, MetricError> {
    let n = m.len();
    if start >= n {
        return Err(MetricError::BadStart(start));
    }
    let mut candidates: Vec<Rational> = m.dist.iter().flatten().copied().filter(|r| !r.is_zero()).collect();
    let top = candidates.iter().copied().max().unwrap_or_else(Rational::zero) + Rational::from_integer(1);
    candidates.push(top);
    candidates.sort_unstable();
    candidates.dedup();

    let mut order = vec![start];
    let mut radii = Vec::new();
    let mut closed = m.class_of(start);
    let two = Rational::from_integer(2);
    while closed.len() < n {
        // B(x, r) with r > 0 misses `closed` iff r ≤ ρ(x), the distance from x.
        let rho: Vec<Option<Rational>> = (0..n)
            .map(|x| (!closed.contains(x)).then(|| closed.iter().map(|c| m.dist[x][c]).min().expect("non-empty")))
            .collect();
        let reach = rho.iter().flatten().copied().max().expect("complement is non-empty");
        let d = candidates.iter().rev().copied().find(|&r| r <= reach).expect("reach is a candidate");
        let half = d / two;
        let x = (0..n).find(|&x| rho[x].is_some_and(|r| r >= half)).expect("the farthest point qualifies");
        order.push(x);
        radii.push(d);
        closed |= m.class_of(x);
    }
    Ok(GreedyRun { order, radii })
}

/// Parses `"p/q"`, an integer, or a finite decimal like `"0.4"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, MetricError> {
    let err = || MetricError::BadRational(String::from(text));
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| err())?;
        let q: i128 = q.trim().parse().map_err(|_| err())?;
        if q == 0 {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(err());
    }
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(err());
    }
    let mut num: i128 = 0;
    let mut den: i128 = 1;
    for b in int.bytes().chain(frac.bytes()) {
        num = num.checked_mul(10).and_then(|v| v.checked_add(i128::from(b - b'0'))).ok_or_else(err)?;
    }
    for _ in 0..frac.len() {
        den = den.checked_mul(10).ok_or_else(err)?;
    }
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// A random pseudometric on `n` points: points are dropped on a small
/// integer grid (so coincidences give zero distances) and measured with the
/// L1 norm, scaled by a random denominator.
pub fn random_pseudometric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PseudometricSpace {
    let side = rng.gen_range(1..=4i128);
    let scale = rng.gen_range(1..=5i128);
    let pts: Vec<(i128, i128)> = (0..n).map(|_| (rng.gen_range(0..=side), rng.gen_range(0..=side))).collect();
    let dist = pts
        .iter()
        .map(|a| pts.iter().map(|b| Rational::new((a.0 - b.0).abs() + (a.1 - b.1).abs(), scale)).collect())
        .collect();
    PseudometricSpace::unlabeled(dist).expect("L1 distances form a pseudometric")
}
