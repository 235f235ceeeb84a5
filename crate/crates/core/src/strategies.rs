//! Player strategies: the π-base strategy, the dense-set counter-strategy,
//! table-driven optimal play, and the product and aggregate constructions.
//!
//! Stateful strategies are deterministic machines that are replayed over
//! the history on every call, so each value is an ordinary history-aware
//! [`OpenPolicy`].

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{check_open, GameError, GameVariant, Inning, OpenPolicy, PointPolicy, Position, StrategyTable};
use crate::products::{product, FanTightnessVerdict, ProductError, ProductSpace};
use crate::space::{FiniteSpace, PointSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("family is not a π-base: open {uncovered:?} contains no member")]
    NotPiBase { uncovered: PointSet },
    #[error("π-base member {0:?} is not a non-empty open")]
    BadMember(PointSet),
    #[error("set {0:?} is not dense")]
    NotDense(PointSet),
    #[error("expected {expected} factor strategies, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("index sets must list every non-empty subset of the factors exactly once")]
    GammaCoverage,
    #[error("ledger entry {index} does not increase lexicographically")]
    LedgerOrderViolation { index: usize },
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Game(#[from] GameError),
}

fn violation(msg: &str) -> GameError {
    GameError::InvariantViolation(String::from(msg))
}

/// A π-base in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPiBase {
    members: Vec<PointSet>,
}

impl OrderedPiBase {
    pub fn new(space: &FiniteSpace, members: Vec<PointSet>) -> Result<Self, StrategyError> {
        for &m in &members {
            if m.is_empty() || !space.is_open(m) {
                return Err(StrategyError::BadMember(m));
            }
        }
        // Covering every minimal open covers every non-empty open.
        for u in space.minimal_opens() {
            if !members.iter().any(|m| m.is_subset(u)) {
                return Err(StrategyError::NotPiBase { uncovered: u });
            }
        }
        Ok(OrderedPiBase { members })
    }

    /// The minimal opens in bitmask order.
    pub fn minimal(space: &FiniteSpace) -> Self {
        OrderedPiBase { members: space.minimal_opens() }
    }

    pub fn members(&self) -> &[PointSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Plays the least-index base member disjoint from the current closure.
#[derive(Debug, Clone)]
pub struct PiBaseStrategy {
    base: OrderedPiBase,
}

pub fn pi_base_strategy(base: OrderedPiBase) -> PiBaseStrategy {
    PiBaseStrategy { base }
}

impl OpenPolicy for PiBaseStrategy {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        self.base
            .members
            .iter()
            .copied()
            .find(|m| !m.meets(pos.closure))
            .ok_or_else(|| violation("every π-base member meets a proper closed set"))
    }
}

/// Player II answering inside a fixed dense set.
#[derive(Debug, Clone)]
pub struct DensePicker {
    dense: PointSet,
}

pub fn dense_pii_strategy(space: &FiniteSpace, dense: PointSet) -> Result<DensePicker, StrategyError> {
    if !space.is_dense(dense) {
        return Err(StrategyError::NotDense(dense));
    }
    Ok(DensePicker { dense })
}

impl PointPolicy for DensePicker {
    fn pick(&mut self, _pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        (open & self.dense)
            .first()
            .map(PointSet::singleton)
            .ok_or_else(|| violation("a dense set misses a non-empty open"))
    }
}

/// Plays the table's best move at the current closure.
#[derive(Debug, Clone, Copy)]
pub struct TablePolicy<'t> {
    table: &'t StrategyTable,
}

pub fn greedy_policy_from_table(table: &StrategyTable) -> TablePolicy<'_> {
    TablePolicy { table }
}

impl OpenPolicy for TablePolicy<'_> {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        self.table.best_move(pos.closure).ok_or(GameError::UnknownState(pos.closure))
    }
}

/// Owned variant of [`TablePolicy`].
#[derive(Debug, Clone)]
pub struct OwnedTablePolicy(pub StrategyTable);

impl OpenPolicy for OwnedTablePolicy {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        self.0.best_move(pos.closure).ok_or(GameError::UnknownState(pos.closure))
    }
}

/// Replays `history` through a fresh machine, checking that it reproduces
/// every recorded open, then asks it for the next one.
fn replay<M>(mut machine: M, pos: &Position<'_>) -> Result<(PointSet, M), GameError>
where
    M: FnMut(PointSet, PointSet, Option<&Inning>) -> Result<PointSet, GameError>,
{
    let mut closure = PointSet::EMPTY;
    let mut picks = PointSet::EMPTY;
    for (stage, inning) in pos.history.iter().enumerate() {
        let open = machine(closure, picks, None)?;
        if open != inning.open {
            return Err(GameError::HistoryMismatch { stage });
        }
        machine(closure, picks, Some(inning))?;
        closure = inning.closure;
        picks |= inning.picked;
    }
    let open = machine(closure, picks, None)?;
    Ok((open, machine))
}

struct SubGame {
    history: Vec<Inning>,
    closure: PointSet,
}

impl SubGame {
    fn new() -> Self {
        SubGame { history: Vec::new(), closure: PointSet::EMPTY }
    }

    fn record(&mut self, space: &FiniteSpace, open: PointSet, picked: PointSet) {
        self.closure = space.closure(self.closure | picked);
        self.history.push(Inning { open, picked, closure: self.closure });
    }

    fn position<'a>(&'a self, space: &'a FiniteSpace) -> Position<'a> {
        Position { space, closure: self.closure, history: &self.history }
    }
}

/// Parallel subgames on `X × Y`, one per π-base member `U_α` of `X`.
///
/// Subgame α offers `U_α × V`, where `V` is the `Y`-strategy's answer to the
/// `Y`-projections of the points picked in that subgame; subgames are
/// interleaved round-robin. Under the free rules a subgame whose
/// projection is already dense keeps offering `U_α × Y`. Under the
/// restricted rules it is retired instead, the open is trimmed to the
/// complement of the closure, and when trimming leaves nothing, the
/// lowest point of `V` is credited to the subgame without an inning.
pub struct ProductStrategy {
    prod: ProductSpace,
    base: OrderedPiBase,
    factor_policy: Box<dyn OpenPolicy>,
    variant: GameVariant,
}

pub fn product_strategy(
    x: &FiniteSpace,
    y: &FiniteSpace,
    base_x: OrderedPiBase,
    s_y: Box<dyn OpenPolicy>,
    variant: GameVariant,
) -> Result<ProductStrategy, StrategyError> {
    let prod = product(&[x.clone(), y.clone()])?;
    OrderedPiBase::new(x, base_x.members.clone())?;
    Ok(ProductStrategy { prod, base: base_x, factor_policy: s_y, variant })
}

impl ProductStrategy {
    pub fn product(&self) -> &ProductSpace {
        &self.prod
    }

    pub fn space(&self) -> &FiniteSpace {
        self.prod.space()
    }
}

impl OpenPolicy for ProductStrategy {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        let y = &self.prod.factors()[1];
        let m = self.base.len();
        let mut games: Vec<SubGame> = (0..m).map(|_| SubGame::new()).collect();
        let mut cursor = 0usize;
        let mut pending: Option<(usize, PointSet)> = None;
        let restricted = self.variant == GameVariant::Restricted;

        let machine = |closure: PointSet, _picks: PointSet, observed: Option<&Inning>| {
            if let Some(inning) = observed {
                if let Some((alpha, v)) = pending.take() {
                    games[alpha].record(y, v, self.prod.project(1, inning.picked));
                }
                return Ok(PointSet::EMPTY);
            }
            if restricted {
                for _ in 0..m {
                    let alpha = cursor % m;
                    cursor += 1;
                    loop {
                        if games[alpha].closure == y.full() {
                            break;
                        }
                        let v = self.factor_policy.choose(&games[alpha].position(y))?;
                        check_open(y, GameVariant::Restricted, games[alpha].closure, v)?;
                        let w = self.prod.boxed(&[self.base.members[alpha], v]) - closure;
                        if !w.is_empty() {
                            pending = Some((alpha, v));
                            return Ok(w);
                        }
                        let credit = v.first().expect("legal opens are non-empty");
                        games[alpha].record(y, v, PointSet::singleton(credit));
                    }
                }
                Err(violation("all product subgames are finished but the picks are not dense"))
            } else {
                let alpha = cursor % m;
                cursor += 1;
                if games[alpha].closure == y.full() {
                    pending = None;
                    return Ok(self.prod.boxed(&[self.base.members[alpha], y.full()]));
                }
                let v = self.factor_policy.choose(&games[alpha].position(y))?;
                check_open(y, self.variant, games[alpha].closure, v)?;
                pending = Some((alpha, v));
                Ok(self.prod.boxed(&[self.base.members[alpha], v]))
            }
        };
        replay(machine, pos).map(|(open, _)| open)
    }
}

/// One stage of the aggregate strategy in phase coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: usize,
    /// Index of the coordinate set `Γ` being made dense.
    pub alpha: usize,
    /// Step of the coordinate strategies within the phase.
    pub beta: usize,
    /// Member of the open family being filled.
    pub eta: usize,
    /// Inning within that member.
    pub epsilon: usize,
}

impl LedgerEntry {
    fn phase(&self) -> (usize, usize, usize, usize) {
        (self.alpha, self.beta, self.eta, self.epsilon)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLedger {
    pub entries: Vec<LedgerEntry>,
}

impl PhaseLedger {
    /// Checks that `(alpha, beta, eta, epsilon)` strictly increases.
    pub fn check_order(&self) -> Result<(), StrategyError> {
        for (i, w) in self.entries.windows(2).enumerate() {
            if w[1].phase() <= w[0].phase() {
                return Err(StrategyError::LedgerOrderViolation { index: i + 1 });
            }
        }
        Ok(())
    }
}

/// Where the open families of the η-level come from.
#[derive(Debug, Clone)]
pub enum FamilySource {
    /// The minimal boxes of the subproduct inside the current box.
    MinimalBoxes,
    /// Witness families from a fan tightness check on the same factors;
    /// cells without a witness fall back to minimal boxes.
    Witness(FanTightnessVerdict),
}

struct Phase {
    gamma: Vec<usize>,
    sub: ProductSpace,
}

/// The aggregate strategy on a finite product.
///
/// Phase α drives the picks to be dense in the Γ_α-subproduct. Inside a
/// phase, each β-step asks every coordinate strategy for an open `V_γ`
/// given the closure of that coordinate's own game, forms the box
/// `U = ∏ V_γ`, and then fills the traces of the picks on each member
/// `V_η` of an open family for `U` (η-level), one inning at a time
/// (ε-level). Afterwards every coordinate `γ` with `π_γ(U ∖ cl A) ⊊ π_γ(U)`
/// is credited with the lowest point it gained; coordinates that gained
/// nothing stall and get no inning in their own game. If no unfinished
/// coordinate gained, the family is extended by the minimal boxes inside
/// `U` before crediting.
///
/// Every inning offered is a single minimal box of the full product
/// disjoint from the closure, so a play never exceeds the number of
/// minimal boxes.
pub struct AggregateStrategy {
    full: ProductSpace,
    full_boxes: Vec<(PointSet, Vec<PointSet>)>,
    phases: Vec<Phase>,
    coordinate: Vec<Box<dyn OpenPolicy>>,
    family: FamilySource,
}

/// Index sets in increasing bitmask order: `{0}, {1}, {0,1}, {2}, …`.
pub fn all_index_sets(k: usize) -> Vec<Vec<usize>> {
    (1u64..(1u64 << k)).map(|m| PointSet(m).iter().collect()).collect()
}

pub fn aggregate_product_strategy(
    factors: &[FiniteSpace],
    coordinate: Vec<Box<dyn OpenPolicy>>,
    gammas: Vec<Vec<usize>>,
    family: FamilySource,
) -> Result<AggregateStrategy, StrategyError> {
    if coordinate.len() != factors.len() {
        return Err(StrategyError::ArityMismatch { expected: factors.len(), got: coordinate.len() });
    }
    let k = factors.len();
    let mut masks: Vec<u64> = Vec::with_capacity(gammas.len());
    for g in &gammas {
        if g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|&i| i >= k) || g.is_empty() {
            return Err(StrategyError::GammaCoverage);
        }
        masks.push(PointSet::from_points(g.iter().copied()).0);
    }
    masks.sort_unstable();
    masks.dedup();
    if masks.len() != gammas.len() || masks.len() as u64 != (1u64 << k) - 1 {
        return Err(StrategyError::GammaCoverage);
    }
    let full = product(factors)?;
    let full_boxes = full.minimal_boxes();
    let phases = gammas
        .into_iter()
        .map(|gamma| full.subproduct(&gamma).map(|sub| Phase { gamma, sub }))
        .collect::<Result<_, _>>()?;
    Ok(AggregateStrategy { full, full_boxes, phases, coordinate, family })
}

struct AggregateRun<'s> {
    s: &'s AggregateStrategy,
    alpha: usize,
    phase_open: bool,
    beta: usize,
    eta: usize,
    epsilon: usize,
    coords: Vec<SubGame>,
    u_comps: Vec<PointSet>,
    family: Vec<PointSet>,
    extended: bool,
    ledger: PhaseLedger,
    stage: usize,
}

impl<'s> AggregateRun<'s> {
    fn new(s: &'s AggregateStrategy) -> Self {
        AggregateRun {
            s,
            alpha: 0,
            phase_open: false,
            beta: 0,
            eta: 0,
            epsilon: 0,
            coords: Vec::new(),
            u_comps: Vec::new(),
            family: Vec::new(),
            extended: false,
            ledger: PhaseLedger::default(),
            stage: 0,
        }
    }

    fn factor(&self, g: usize) -> &'s FiniteSpace {
        &self.s.phases[self.alpha].sub.factors()[g]
    }

    fn boxes_inside(sub: &ProductSpace, u: PointSet) -> Vec<PointSet> {
        sub.minimal_boxes().into_iter().map(|(b, _)| b).filter(|b| b.is_subset(u)).collect()
    }

    fn start_beta(&mut self) -> Result<(), GameError> {
        let phase = &self.s.phases[self.alpha];
        let mut comps = Vec::with_capacity(phase.gamma.len());
        for (g, &factor) in phase.gamma.iter().enumerate() {
            let x = self.factor(g);
            let game = &self.coords[g];
            if game.closure == x.full() {
                comps.push(x.full());
                continue;
            }
            let v = self.s.coordinate[factor].choose(&game.position(x))?;
            check_open(x, GameVariant::Restricted, game.closure, v)?;
            comps.push(v);
        }
        let u = phase.sub.boxed(&comps);
        self.family = match &self.s.family {
            FamilySource::MinimalBoxes => Self::boxes_inside(&phase.sub, u),
            FamilySource::Witness(verdict) => verdict
                .family(&phase.gamma, u)
                .map(|f| f.to_vec())
                .unwrap_or_else(|| Self::boxes_inside(&phase.sub, u)),
        };
        self.extended = matches!(self.s.family, FamilySource::MinimalBoxes);
        self.u_comps = comps;
        self.eta = 0;
        self.epsilon = 0;
        Ok(())
    }

    /// Next inning towards `cl π_γ(A ∩ V) = cl π_γ(V)` for every γ, or
    /// `None` when the traces on `V` are already filled.
    fn fill_inning(&self, v: PointSet, a: PointSet, closure: PointSet) -> Result<Option<PointSet>, GameError> {
        let phase = &self.s.phases[self.alpha];
        let sub = &phase.sub;
        for (g, &factor) in phase.gamma.iter().enumerate() {
            let x = self.factor(g);
            let target = x.closure(sub.project(g, v));
            let have = x.closure(sub.project(g, a & v));
            if have == target {
                continue;
            }
            let shadow = sub.project(g, v);
            let o = x
                .minimal_opens()
                .into_iter()
                .find(|o| o.is_subset(shadow) && !o.meets(have))
                .ok_or_else(|| violation("unfilled trace without a fresh minimal open"))?;
            let inning = self
                .s
                .full_boxes
                .iter()
                .find(|(b, comps)| {
                    comps[factor] == o
                        && !b.meets(closure)
                        && self.s.full.project_onto(&phase.gamma, sub, *b).is_subset(v)
                })
                .map(|(b, _)| *b)
                .ok_or_else(|| violation("no fresh minimal box inside the family member"))?;
            return Ok(Some(inning));
        }
        Ok(None)
    }

    fn next_open(&mut self, closure: PointSet, picks: PointSet) -> Result<PointSet, GameError> {
        loop {
            if closure == self.s.full.space().full() {
                return Err(violation("strategy asked to move after the picks became dense"));
            }
            let Some(phase) = self.s.phases.get(self.alpha) else {
                return Err(violation("every phase finished but the picks are not dense"));
            };
            let sub = &phase.sub;
            let a = self.s.full.project_onto(&phase.gamma, sub, picks);
            if !self.phase_open {
                if sub.space().is_dense(a) {
                    self.alpha += 1;
                    continue;
                }
                self.phase_open = true;
                self.beta = 0;
                self.coords = phase.gamma.iter().map(|_| SubGame::new()).collect();
                self.start_beta()?;
                continue;
            }
            if self.eta < self.family.len() {
                if let Some(open) = self.fill_inning(self.family[self.eta], a, closure)? {
                    self.ledger.entries.push(LedgerEntry {
                        stage: self.stage,
                        alpha: self.alpha,
                        beta: self.beta,
                        eta: self.eta,
                        epsilon: self.epsilon,
                    });
                    self.epsilon += 1;
                    self.stage += 1;
                    return Ok(open);
                }
                self.eta += 1;
                self.epsilon = 0;
                continue;
            }
            let u = sub.boxed(&self.u_comps);
            let rest = u - sub.space().closure(a);
            let gained: Vec<usize> = (0..phase.gamma.len())
                .filter(|&g| sub.project(g, rest) != self.u_comps[g])
                .filter(|&g| self.coords[g].closure != self.factor(g).full())
                .collect();
            let dense = sub.space().is_dense(a);
            if gained.is_empty() && !dense {
                if self.extended {
                    return Err(violation("β-step made no progress after the family was completed"));
                }
                self.extended = true;
                for b in Self::boxes_inside(sub, u) {
                    if !self.family.contains(&b) {
                        self.family.push(b);
                    }
                }
                continue;
            }
            for g in gained {
                let v = self.u_comps[g];
                let y = (v - sub.project(g, rest)).first().expect("gain is non-empty");
                let x = self.factor(g);
                self.coords[g].record(x, v, PointSet::singleton(y));
            }
            if dense {
                self.alpha += 1;
                self.phase_open = false;
                continue;
            }
            self.beta += 1;
            self.start_beta()?;
        }
    }
}

impl AggregateStrategy {
    pub fn product(&self) -> &ProductSpace {
        &self.full
    }

    pub fn space(&self) -> &FiniteSpace {
        self.full.space()
    }

    fn run(&self, pos: &Position<'_>) -> Result<(Option<PointSet>, PhaseLedger), GameError> {
        let mut run = AggregateRun::new(self);
        let mut closure = PointSet::EMPTY;
        let mut picks = PointSet::EMPTY;
        for (stage, inning) in pos.history.iter().enumerate() {
            if run.next_open(closure, picks)? != inning.open {
                return Err(GameError::HistoryMismatch { stage });
            }
            closure = inning.closure;
            picks |= inning.picked;
        }
        let next = if closure == self.full.space().full() { None } else { Some(run.next_open(closure, picks)?) };
        Ok((next, run.ledger))
    }

    /// The phase ledger of a (possibly finished) play of this strategy.
    pub fn ledger_for(&self, history: &[Inning]) -> Result<PhaseLedger, StrategyError> {
        let closure = history.last().map_or(PointSet::EMPTY, |i| i.closure);
        let pos = Position { space: self.full.space(), closure, history };
        let (_, mut ledger) = self.run(&pos)?;
        ledger.entries.truncate(history.len());
        ledger.check_order()?;
        Ok(ledger)
    }
}

impl OpenPolicy for AggregateStrategy {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        self.run(pos)?.0.ok_or_else(|| violation("strategy asked to move after the picks became dense"))
    }
}

/// Human-readable ledger line, used by I/O layers.
pub fn describe_entry(e: &LedgerEntry) -> String {
    format!("stage {} (α={}, β={}, η={}, ε={})", e.stage, e.alpha, e.beta, e.eta, e.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{evaluate_policy, explore_plays, shortest_play, solve_game};
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

    fn optimal(space: &FiniteSpace) -> Box<dyn OpenPolicy> {
        Box::new(OwnedTablePolicy(solve_game(space, GameVariant::Restricted).unwrap()))
    }

    #[test]
    fn pi_base_examples() {
        let s = FiniteSpace::sierpinski();
        let p = pi_base_strategy(OrderedPiBase::new(&s, vec![PointSet::singleton(1)]).unwrap());
        let pos = Position { space: &s, closure: PointSet::EMPTY, history: &[] };
        assert_eq!(p.choose(&pos).unwrap(), PointSet::singleton(1));
        assert_eq!(evaluate_policy(&s, &p, GameVariant::Restricted).unwrap(), 1);

        let ss = two_sierpinski();
        let p = pi_base_strategy(OrderedPiBase::minimal(&ss));
        assert_eq!(evaluate_policy(&ss, &p, GameVariant::Restricted).unwrap(), 2);

        let d = FiniteSpace::discrete(3);
        let rev = OrderedPiBase::new(&d, vec![PointSet(4), PointSet(1), PointSet(2)]).unwrap();
        assert_eq!(evaluate_policy(&d, &pi_base_strategy(rev), GameVariant::Restricted).unwrap(), 3);
    }

    #[test]
    fn pi_base_validation() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(
            OrderedPiBase::new(&s, vec![s.full()]).unwrap_err(),
            StrategyError::NotPiBase { uncovered: PointSet::singleton(1) }
        );
        assert_eq!(
            OrderedPiBase::new(&s, vec![PointSet::singleton(0)]).unwrap_err(),
            StrategyError::BadMember(PointSet::singleton(0))
        );
    }

    #[test]
    fn dense_picker_examples() {
        let s = FiniteSpace::sierpinski();
        let mut p = dense_pii_strategy(&s, PointSet::singleton(1)).unwrap();
        let pos = Position { space: &s, closure: PointSet::EMPTY, history: &[] };
        assert_eq!(p.pick(&pos, s.full()).unwrap(), PointSet::singleton(1));
        assert!(matches!(dense_pii_strategy(&s, PointSet::singleton(0)), Err(StrategyError::NotDense(_))));

        let ss = two_sierpinski();
        let mut p = dense_pii_strategy(&ss, PointSet::from_points([1, 3])).unwrap();
        assert_eq!(shortest_play(&ss, &mut p, GameVariant::Restricted, 8).unwrap(), Some(2));
        let d = FiniteSpace::discrete(3);
        let mut p = dense_pii_strategy(&d, d.full()).unwrap();
        assert_eq!(shortest_play(&d, &mut p, GameVariant::Restricted, 8).unwrap(), Some(3));
    }

    #[test]
    fn table_policy_examples() {
        for (space, expect) in [(FiniteSpace::sierpinski(), 1), (FiniteSpace::discrete(4), 4), (two_sierpinski(), 2)] {
            let t = solve_game(&space, GameVariant::Restricted).unwrap();
            let p = greedy_policy_from_table(&t);
            assert_eq!(evaluate_policy(&space, &p, GameVariant::Restricted).unwrap(), expect);
        }
    }

    #[test]
    fn product_strategy_examples() {
        let s = FiniteSpace::sierpinski();
        for variant in [GameVariant::Restricted, GameVariant::Free] {
            let ps = product_strategy(&s, &s, OrderedPiBase::minimal(&s), optimal(&s), variant).unwrap();
            assert_eq!(evaluate_policy(ps.space(), &ps, variant).unwrap(), 1);

            let d = FiniteSpace::discrete(2);
            let ps = product_strategy(&d, &s, OrderedPiBase::minimal(&d), optimal(&s), variant).unwrap();
            assert_eq!(evaluate_policy(ps.space(), &ps, variant).unwrap(), 2);

            let i = FiniteSpace::indiscrete(2);
            let ps = product_strategy(&i, &i, OrderedPiBase::minimal(&i), optimal(&i), variant).unwrap();
            assert_eq!(evaluate_policy(ps.space(), &ps, variant).unwrap(), 1);
        }
    }

    fn aggregate(factors: &[FiniteSpace]) -> AggregateStrategy {
        let subs = factors.iter().map(optimal).collect();
        aggregate_product_strategy(factors, subs, all_index_sets(factors.len()), FamilySource::MinimalBoxes)
            .unwrap()
    }

    fn check_aggregate(factors: &[FiniteSpace], bound: usize) {
        let agg = aggregate(factors);
        let worst = explore_plays(agg.space(), &agg, GameVariant::Restricted, 64, |h| {
            let ledger = agg.ledger_for(h).map_err(|e| GameError::InvariantViolation(format!("{e}")))?;
            assert_eq!(ledger.entries.len(), h.len());
            Ok(())
        })
        .unwrap();
        assert!(worst <= bound, "worst {worst} > {bound}");
    }

    #[test]
    fn aggregate_examples() {
        let s = FiniteSpace::sierpinski();
        check_aggregate(&[s.clone(), s.clone()], 1);
        check_aggregate(&[FiniteSpace::discrete(2), s.clone()], 2);
        check_aggregate(&[FiniteSpace::indiscrete(2)], 1);
        check_aggregate(&[FiniteSpace::discrete(2), FiniteSpace::discrete(2), s], 4);
    }

    #[test]
    fn aggregate_rejects_bad_index_sets() {
        let s = FiniteSpace::sierpinski();
        let err = aggregate_product_strategy(
            &[s.clone(), s.clone()],
            vec![optimal(&s), optimal(&s)],
            vec![vec![0], vec![1]],
            FamilySource::MinimalBoxes,
        )
        .err()
        .unwrap();
        assert_eq!(err, StrategyError::GammaCoverage);
        let err = aggregate_product_strategy(core::slice::from_ref(&s), vec![], all_index_sets(1), FamilySource::MinimalBoxes)
            .err()
            .unwrap();
        assert_eq!(err, StrategyError::ArityMismatch { expected: 1, got: 0 });
    }

    #[test]
    fn ledger_order_check() {
        let e = |alpha, beta| LedgerEntry { stage: 0, alpha, beta, eta: 0, epsilon: 0 };
        assert!(PhaseLedger { entries: vec![e(0, 0), e(0, 1), e(1, 0)] }.check_order().is_ok());
        assert_eq!(
            PhaseLedger { entries: vec![e(0, 1), e(0, 1)] }.check_order().unwrap_err(),
            StrategyError::LedgerOrderViolation { index: 1 }
        );
    }
}
