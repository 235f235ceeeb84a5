//! Verification checks over the enumerated corpus.
//!
//! A suite is a list of [`Job`]s; each job is pure and produces one
//! [`CheckRecord`]. Failures are data. Jobs may run in any order or in
//! parallel, and reassembling records in job order gives a deterministic
//! report.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enumeration::{self, homeomorphic, EnumerationError};
use crate::game::{
    evaluate_policy, exact_force_set, explore_plays, shortest_play, solve_game, GameError, GameVariant, OpenPolicy,
};
use crate::invariants::{self, brute, InvariantReport};
use crate::metric::{self, greedy_dense_sequence, random_pseudometric, topology_from_pseudometric, Rational};
use crate::products::{fan_tightness_check, product, CandidatePool, ClosureReading, FanStatus};
use crate::space::{FiniteSpace, PointSet};
use crate::strategies::{
    aggregate_product_strategy, all_index_sets, dense_pii_strategy, greedy_policy_from_table, pi_base_strategy,
    product_strategy, AggregateStrategy, FamilySource, OrderedPiBase, OwnedTablePolicy,
};

/// Largest point count for per-space checks.
pub const SPACE_CHECK_LIMIT: usize = 4;
/// Largest factor size in the pair corpus.
pub const PAIR_FACTOR_LIMIT: usize = 3;
/// Largest factor size in the triple corpus.
pub const TRIPLE_FACTOR_LIMIT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `d ≤ δ ≤ gd ≤ π ≤ w`, fast formulas against brute force, `t = 1`.
    Chain,
    /// `d = δ = gd = π`.
    Collapse,
    /// Restricted and free values agree; multi-point never exceeds free.
    Variants,
    /// Every exactly forceable length equals `gd = δ = d`.
    ExactForce,
    /// The game value never increases as the closure grows.
    Monotone,
    /// `gd(S) ≤ gd(X)` for open or dense `S`.
    Subspace,
    /// The π-base strategy on minimal opens has worst case exactly π.
    PiBase,
    /// Picking inside a dense `A` forces at least `d(A)` stages.
    DensePii,
    /// Playing the solved table's moves achieves gd.
    TablePolicy,
    /// Product theorems on an ordered pair of factors.
    Product,
    /// Multiplicativity and the aggregate bound on triples.
    ProductTriple,
    /// Greedy dense sequences on a random pseudometric.
    Metric,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::Chain,
        Check::Collapse,
        Check::Variants,
        Check::ExactForce,
        Check::Monotone,
        Check::Subspace,
        Check::PiBase,
        Check::DensePii,
        Check::TablePolicy,
        Check::Product,
        Check::ProductTriple,
        Check::Metric,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Chain => "chain",
            Check::Collapse => "collapse",
            Check::Variants => "variants",
            Check::ExactForce => "exact_force",
            Check::Monotone => "monotone",
            Check::Subspace => "subspace",
            Check::PiBase => "pi_base",
            Check::DensePii => "dense_pii",
            Check::TablePolicy => "table_policy",
            Check::Product => "product",
            Check::ProductTriple => "product_triple",
            Check::Metric => "metric",
        }
    }

    fn per_space(self) -> bool {
        !matches!(self, Check::Product | Check::ProductTriple | Check::Metric)
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Check, String> {
        let norm = s.replace('-', "_");
        Check::ALL.into_iter().find(|c| c.as_str() == norm).ok_or_else(|| format!("unknown check {s:?}"))
    }
}

/// Parses a comma-separated selection; `all` selects every check.
pub fn parse_checks(spec: &str) -> Result<Vec<Check>, String> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(Check::ALL);
        } else {
            out.push(part.parse()?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(String::from("no checks selected"));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Per-space checks run on every labeled space with exactly `n` points;
    /// product factors have at most `min(n, 3)` points.
    pub n: usize,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub metric_cases: usize,
    pub metric_max_points: usize,
}

impl SuiteConfig {
    pub fn new(n: usize, checks: Vec<Check>, seed: u64) -> Self {
        SuiteConfig { n, checks, seed, metric_cases: 200, metric_max_points: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: Check,
    pub space: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub enum Job {
    Space { check: Check, space: FiniteSpace },
    Factors { check: Check, factors: Vec<FiniteSpace> },
    Metric { index: usize, seed: u64, points: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuiteError {
    Enumeration(EnumerationError),
    TooLarge(usize),
}

impl core::fmt::Display for SuiteError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SuiteError::Enumeration(e) => write!(f, "{e}"),
            SuiteError::TooLarge(n) => write!(f, "suite checks support n ≤ {SPACE_CHECK_LIMIT}, got {n}"),
        }
    }
}

impl From<EnumerationError> for SuiteError {
    fn from(e: EnumerationError) -> Self {
        SuiteError::Enumeration(e)
    }
}

fn unlabeled_upto(limit: usize) -> Result<Vec<FiniteSpace>, EnumerationError> {
    let mut out = Vec::new();
    for k in 1..=limit {
        out.extend(enumeration::enumerate_unlabeled(k)?);
    }
    Ok(out)
}

/// The job list of a suite, in report order.
pub fn jobs(config: &SuiteConfig) -> Result<Vec<Job>, SuiteError> {
    let n = config.n;
    if n == 0 || n > SPACE_CHECK_LIMIT {
        return Err(SuiteError::TooLarge(n));
    }
    let mut out = Vec::new();
    if config.checks.iter().any(|c| c.per_space()) {
        let spaces = enumeration::enumerate_labeled_checked(n)?;
        for &check in config.checks.iter().filter(|c| c.per_space()) {
            out.extend(spaces.iter().map(|s| Job::Space { check, space: s.clone() }));
        }
    }
    if config.checks.contains(&Check::Product) {
        let corpus = unlabeled_upto(n.min(PAIR_FACTOR_LIMIT))?;
        for x in &corpus {
            for y in &corpus {
                out.push(Job::Factors { check: Check::Product, factors: vec![x.clone(), y.clone()] });
            }
        }
    }
    if config.checks.contains(&Check::ProductTriple) {
        let corpus = unlabeled_upto(n.min(TRIPLE_FACTOR_LIMIT))?;
        for x in &corpus {
            for y in &corpus {
                for z in &corpus {
                    let factors = vec![x.clone(), y.clone(), z.clone()];
                    out.push(Job::Factors { check: Check::ProductTriple, factors });
                }
            }
        }
    }
    if config.checks.contains(&Check::Metric) {
        for index in 0..config.metric_cases {
            // Point counts cycle through 1..=max so every size is covered.
            let points = index % config.metric_max_points.max(1) + 1;
            let seed = config.seed.wrapping_add(index as u64);
            out.push(Job::Metric { index, seed, points });
        }
    }
    Ok(out)
}

/// Runs one job.
pub fn run_job(job: &Job) -> CheckRecord {
    let (check, space, outcome) = match job {
        Job::Space { check, space } => (*check, space.name().to_string(), run_space_check(*check, space)),
        Job::Factors { check, factors } => {
            let name = factors.iter().map(|f| f.name()).collect::<Vec<_>>().join("×");
            let outcome = match check {
                Check::Product => product_pair_check(&factors[0], &factors[1]),
                _ => product_triple_check(factors),
            };
            (*check, name, outcome)
        }
        Job::Metric { index, seed, points } => {
            (Check::Metric, format!("M{index:03}"), metric_check(*seed, *points))
        }
    };
    let (pass, detail) = match outcome {
        Ok(Verdict { pass, detail }) => (pass, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckRecord { check, space, pass, detail }
}

/// Runs every job sequentially.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>, SuiteError> {
    Ok(jobs(config)?.iter().map(run_job).collect())
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

#[derive(Debug)]
struct Failure(String);

impl core::fmt::Display for Failure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure(e.to_string())
            }
        })*
    };
}

failure_from!(
    GameError,
    invariants::InvariantError,
    crate::products::ProductError,
    crate::strategies::StrategyError,
    crate::space::SpaceError,
    metric::MetricError
);

type Outcome = Result<Verdict, Failure>;

fn optimal(space: &FiniteSpace) -> Result<Box<dyn OpenPolicy>, GameError> {
    Ok(Box::new(OwnedTablePolicy(solve_game(space, GameVariant::Restricted)?)))
}

fn run_space_check(check: Check, space: &FiniteSpace) -> Outcome {
    match check {
        Check::Chain => {
            let r = InvariantReport::compute(space)?;
            let b = (brute::density(space)?, brute::delta(space)?, brute::pi_weight(space)?, brute::weight(space)?);
            let brute_ok = b == (r.d, r.delta, r.pi, r.w);
            let pass = r.chain_holds() && brute_ok && r.t == 1;
            Ok(Verdict::new(
                pass,
                format!(
                    "d={} delta={} gd={} pi={} w={} t={} brute=(d={}, delta={}, pi={}, w={})",
                    r.d, r.delta, r.gd, r.pi, r.w, r.t, b.0, b.1, b.2, b.3
                ),
            ))
        }
        Check::Collapse => {
            let r = InvariantReport::compute(space)?;
            let pass = r.d == r.delta && r.delta == r.gd && r.gd == r.pi;
            Ok(Verdict::new(pass, format!("d={} delta={} gd={} pi={}", r.d, r.delta, r.gd, r.pi)))
        }
        Check::Variants => {
            let r = solve_game(space, GameVariant::Restricted)?.gd();
            let f = solve_game(space, GameVariant::Free)?.gd();
            let m = solve_game(space, GameVariant::MultiPoint)?.gd();
            Ok(Verdict::new(r == f && m <= f, format!("restricted={r} free={f} multipoint={m} multi_equal={}", m == f)))
        }
        Check::ExactForce => {
            let set = exact_force_set(space)?;
            let gd = solve_game(space, GameVariant::Restricted)?.gd();
            let d = invariants::density(space);
            let delta = invariants::delta(space)?;
            let pass = set.iter().all(|&k| k == gd && k == d && k == delta);
            Ok(Verdict::new(pass, format!("exact={set:?} gd={gd} delta={delta} d={d}")))
        }
        Check::Monotone => {
            let t = solve_game(space, GameVariant::Restricted)?;
            let entries: Vec<(PointSet, usize)> = t.entries().map(|(c, e)| (c, e.value)).collect();
            let bad = entries.iter().find_map(|&(c, v)| {
                entries.iter().find(|&&(c2, v2)| c2.is_subset(c) && v > v2).map(|&(c2, v2)| (c, v, c2, v2))
            });
            Ok(match bad {
                None => Verdict::new(true, format!("{} states", entries.len())),
                Some((c, v, c2, v2)) => Verdict::new(false, format!("V({:#b})={v} > V({:#b})={v2}", c.0, c2.0)),
            })
        }
        Check::Subspace => {
            let gd = solve_game(space, GameVariant::Restricted)?.gd();
            let mut worst = None;
            let mut count = 0;
            for s in space.full().subsets().filter(|&s| !s.is_empty()) {
                if !(space.is_open(s) || space.is_dense(s)) {
                    continue;
                }
                count += 1;
                let sub = space.subspace(s)?;
                let g = solve_game(&sub, GameVariant::Restricted)?.gd();
                if g > gd && worst.is_none() {
                    worst = Some((s, g));
                }
            }
            Ok(match worst {
                None => Verdict::new(true, format!("gd={gd} subspaces={count}")),
                Some((s, g)) => Verdict::new(false, format!("gd(S={:#b})={g} > gd={gd}", s.0)),
            })
        }
        Check::PiBase => {
            let pi = invariants::pi_weight(space);
            let p = pi_base_strategy(OrderedPiBase::minimal(space));
            let restricted = evaluate_policy(space, &p, GameVariant::Restricted)?;
            let free = evaluate_policy(space, &p, GameVariant::Free)?;
            Ok(Verdict::new(restricted == pi && free == pi, format!("pi={pi} restricted={restricted} free={free}")))
        }
        Check::DensePii => {
            let mut detail = String::new();
            let mut pass = true;
            let mut count = 0;
            for a in space.full().subsets().filter(|&a| space.is_dense(a)) {
                count += 1;
                let need = brute::density(&space.subspace(a)?)?;
                let mut picker = dense_pii_strategy(space, a)?;
                let shortest = shortest_play(space, &mut picker, GameVariant::Restricted, space.len() + 1)?;
                if shortest.is_none_or(|l| l < need) {
                    pass = false;
                    let _ = write!(detail, "A={:#b} shortest={shortest:?} d(A)={need}; ", a.0);
                }
            }
            if pass {
                detail = format!("{count} dense sets");
            }
            Ok(Verdict::new(pass, detail))
        }
        Check::TablePolicy => {
            let t = solve_game(space, GameVariant::Restricted)?;
            let e = evaluate_policy(space, &greedy_policy_from_table(&t), GameVariant::Restricted)?;
            Ok(Verdict::new(e == t.gd(), format!("gd={} evaluated={e}", t.gd())))
        }
        Check::Product | Check::ProductTriple | Check::Metric => unreachable!("not a per-space check"),
    }
}

/// Worst case of the aggregate strategy over all Player II replies, with
/// every finished play's ledger checked.
fn aggregate_worst(agg: &AggregateStrategy) -> Result<usize, GameError> {
    let limit = agg.space().len() + 1;
    explore_plays(agg.space(), agg, GameVariant::Restricted, limit, |h| {
        let ledger = agg.ledger_for(h).map_err(|e| GameError::InvariantViolation(e.to_string()))?;
        if ledger.entries.len() != h.len() {
            return Err(GameError::InvariantViolation(String::from("ledger length differs from play length")));
        }
        Ok(())
    })
}

fn aggregate_for(factors: &[FiniteSpace], family: FamilySource) -> Result<AggregateStrategy, Failure> {
    let subs = factors.iter().map(optimal).collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate_product_strategy(factors, subs, all_index_sets(factors.len()), family)?)
}

fn status_name(s: FanStatus) -> &'static str {
    match s {
        FanStatus::Holds => "holds",
        FanStatus::HoldsViaSufficientCondition => "holds_via_sufficient_condition",
        FanStatus::Unknown => "unknown",
    }
}

fn product_pair_check(x: &FiniteSpace, y: &FiniteSpace) -> Outcome {
    let factors = [x.clone(), y.clone()];
    let prod = product(&factors)?;
    let p = prod.space();
    let (pi_x, pi_y, pi_p) = (invariants::pi_weight(x), invariants::pi_weight(y), invariants::pi_weight(p));
    let mut boxes: Vec<PointSet> = prod.minimal_boxes().into_iter().map(|(b, _)| b).collect();
    boxes.sort_unstable();
    let pi_ok = pi_p == pi_x * pi_y && boxes == p.minimal_opens();

    let gd_x = solve_game(x, GameVariant::Restricted)?.gd();
    let gd_y = solve_game(y, GameVariant::Restricted)?.gd();
    let gd_p = solve_game(p, GameVariant::Restricted)?.gd();
    let bound = pi_x * gd_y;

    let mut ps_ok = true;
    let mut ps_len = Vec::new();
    for variant in [GameVariant::Restricted, GameVariant::Free] {
        let ps = product_strategy(x, y, OrderedPiBase::minimal(x), optimal(y)?, variant)?;
        let e = evaluate_policy(p, &ps, variant)?;
        ps_ok &= gd_p <= e && e <= bound;
        ps_len.push(e);
    }

    let agg_len = aggregate_worst(&aggregate_for(&factors, FamilySource::MinimalBoxes)?)?;
    let agg_ok = agg_len <= gd_x * gd_y;

    let kappa = gd_x.max(gd_y).max(factors.len());
    let whole = fan_tightness_check(&factors, kappa, CandidatePool::Boxes, ClosureReading::Whole)?;
    let traces = fan_tightness_check(&factors, kappa, CandidatePool::Boxes, ClosureReading::Traces)?;
    let whole_status = whole.status;
    let (fan_ok, fan_len) = if whole.holds() {
        let len = aggregate_worst(&aggregate_for(&factors, FamilySource::Witness(whole))?)?;
        (len <= gd_x * gd_y, Some(len))
    } else {
        (true, None)
    };

    let point = FiniteSpace::discrete(1);
    let identity_ok = homeomorphic(product(&[x.clone(), point])?.space(), x);

    let pass = pi_ok && ps_ok && agg_ok && fan_ok && identity_ok;
    Ok(Verdict::new(
        pass,
        format!(
            "pi=({pi_x},{pi_y},{pi_p}) gd=({gd_x},{gd_y},{gd_p}) gd_multiplicative={} product_strategy={ps_len:?} bound={bound} \
             aggregate={agg_len} kappa={kappa} fan_whole={} fan_traces={} aggregate_witness={fan_len:?} identity={identity_ok}",
            gd_p == gd_x * gd_y,
            status_name(whole_status),
            status_name(traces.status),
        ),
    ))
}

fn product_triple_check(factors: &[FiniteSpace]) -> Outcome {
    let prod = product(factors)?;
    let pis: Vec<usize> = factors.iter().map(invariants::pi_weight).collect();
    let pi_p = invariants::pi_weight(prod.space());
    let gds = factors
        .iter()
        .map(|f| solve_game(f, GameVariant::Restricted).map(|t| t.gd()))
        .collect::<Result<Vec<_>, _>>()?;
    let gd_p = solve_game(prod.space(), GameVariant::Restricted)?.gd();
    let agg_len = aggregate_worst(&aggregate_for(factors, FamilySource::MinimalBoxes)?)?;
    let pi_prod: usize = pis.iter().product();
    let gd_prod: usize = gds.iter().product();
    let pass = pi_p == pi_prod && gd_p == gd_prod && agg_len <= gd_prod;
    Ok(Verdict::new(pass, format!("pi={pis:?}->{pi_p} gd={gds:?}->{gd_p} aggregate={agg_len}")))
}

fn metric_check(seed: u64, points: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_pseudometric(&mut rng, points);
    let start = (seed % points as u64) as usize;
    let run = greedy_dense_sequence(&m, start)?;
    let t = topology_from_pseudometric(&m)?;
    Ok(greedy_verdict(&m, &t, &run))
}

fn greedy_verdict(m: &metric::PseudometricSpace, t: &FiniteSpace, run: &metric::GreedyRun) -> Verdict {
    let monotone = run.radii.windows(2).all(|w| w[1] <= w[0]);
    let two = Rational::from_integer(2);
    let separated = (1..run.order.len())
        .all(|b| (0..b).all(|a| m.dist(run.order[b], run.order[a]) >= run.radii[b - 1] / two));
    let dense = t.is_dense(PointSet::from_points(run.order.iter().copied()));
    let classes = m.class_count();
    let length_ok = run.order.len() == classes && classes == invariants::density(t);
    let collapse = InvariantReport::compute(t).map(|r| (r.d, r.delta, r.gd, r.pi, r.w));
    let collapse_ok = matches!(collapse, Ok((d, delta, gd, pi, w)) if d == delta && delta == gd && gd == pi && pi == w);
    Verdict::new(
        monotone && separated && dense && length_ok && collapse_ok,
        format!(
            "n={} classes={classes} order={:?} radii=[{}] monotone={monotone} separated={separated} dense={dense} invariants={collapse:?}",
            m.len(),
            run.order,
            run.radii.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        ),
    )
}

/// Checks one given pseudometric and start point like the metric suite does.
pub fn check_greedy(m: &metric::PseudometricSpace, start: usize) -> Result<(bool, String), String> {
    let run = greedy_dense_sequence(m, start).map_err(|e| e.to_string())?;
    let t = topology_from_pseudometric(m).map_err(|e| e.to_string())?;
    let v = greedy_verdict(m, &t, &run);
    Ok((v.pass, v.detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_selection() {
        assert_eq!(parse_checks("chain").unwrap(), vec![Check::Chain]);
        assert_eq!(parse_checks("all").unwrap().len(), Check::ALL.len());
        assert_eq!(parse_checks("pi-base,chain").unwrap(), vec![Check::Chain, Check::PiBase]);
        assert!(parse_checks("nope").is_err());
        assert!(parse_checks("").is_err());
    }

    #[test]
    fn small_suites_pass() {
        let records = run_suite(&SuiteConfig::new(3, vec![Check::Chain], 0)).unwrap();
        assert_eq!(records.len(), 29);
        assert!(records.iter().all(|r| r.pass));
        let records = run_suite(&SuiteConfig::new(2, vec![Check::Variants], 0)).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| r.pass));
        let mut config = SuiteConfig::new(1, Check::ALL.to_vec(), 7);
        config.metric_cases = 5;
        let records = run_suite(&config).unwrap();
        assert!(records.iter().all(|r| r.pass), "{records:?}");
    }

    #[test]
    fn bad_sizes() {
        assert_eq!(jobs(&SuiteConfig::new(5, vec![Check::Chain], 0)).unwrap_err(), SuiteError::TooLarge(5));
    }
}
