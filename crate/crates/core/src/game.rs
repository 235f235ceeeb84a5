//! The open-point game on a finite space.
//!
//! Player I offers a non-empty open set, Player II answers with a point of
//! it, and the game ends once the picked points are dense. Only the closure
//! of the picks matters for the future of a play, so positions of the
//! solver are closed sets.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{FiniteSpace, PointSet};

/// Largest open set for which every multi-point reply is enumerated.
pub const MULTI_REPLY_CAP: usize = 12;

/// Rule variant of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameVariant {
    /// Player I must offer opens disjoint from the current closure.
    Restricted,
    /// Player I may offer any non-empty open.
    Free,
    /// As `Free`, and Player II answers with any non-empty subset of the open.
    MultiPoint,
}

impl GameVariant {
    pub const ALL: [GameVariant; 3] = [GameVariant::Restricted, GameVariant::Free, GameVariant::MultiPoint];

    pub fn as_str(self) -> &'static str {
        match self {
            GameVariant::Restricted => "restricted",
            GameVariant::Free => "free",
            GameVariant::MultiPoint => "multipoint",
        }
    }
}

impl fmt::Display for GameVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllegalReason {
    EmptyOpen,
    NotOpen,
    MeetsClosure,
    EmptyPick,
    PickOutsideOpen,
    SeveralPoints,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("illegal move by player {player:?} at closure {closure:?}: offered {offered:?} ({reason:?})")]
    IllegalMove { player: Player, closure: PointSet, offered: PointSet, reason: IllegalReason },
    #[error("play exceeded {limit} innings without the picks becoming dense")]
    Unbounded { limit: usize },
    #[error("open set of {size} points exceeds the multi-point reply cap")]
    ReplyCapExceeded { size: usize },
    #[error("space has too many opens to enumerate Player I moves")]
    OpensUnavailable,
    #[error("closed set {0:?} is not in the strategy table")]
    UnknownState(PointSet),
    #[error("policy history diverges from its own play at stage {stage}")]
    HistoryMismatch { stage: usize },
    #[error("strategy invariant violated: {0}")]
    InvariantViolation(String),
}

/// One inning: the open Player I offered, what Player II picked, and the
/// closure of all picks afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inning {
    pub open: PointSet,
    pub picked: PointSet,
    pub closure: PointSet,
}

/// What a policy sees when it has to move.
#[derive(Debug, Clone, Copy)]
pub struct Position<'a> {
    pub space: &'a FiniteSpace,
    pub closure: PointSet,
    pub history: &'a [Inning],
}

impl Position<'_> {
    /// Number of innings played so far.
    pub fn stage(&self) -> usize {
        self.history.len()
    }

    /// Union of all points picked so far.
    pub fn picks(&self) -> PointSet {
        self.history.iter().fold(PointSet::EMPTY, |acc, i| acc | i.picked)
    }
}

/// A Player I strategy. May depend on the whole history.
pub trait OpenPolicy {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError>;
}

/// A Player II strategy.
pub trait PointPolicy {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError>;
}

impl<T: OpenPolicy + ?Sized> OpenPolicy for &T {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        (**self).choose(pos)
    }
}

impl<T: OpenPolicy + ?Sized> OpenPolicy for Box<T> {
    fn choose(&self, pos: &Position<'_>) -> Result<PointSet, GameError> {
        (**self).choose(pos)
    }
}

impl<T: PointPolicy + ?Sized> PointPolicy for &mut T {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        (**self).pick(pos, open)
    }
}

impl<T: PointPolicy + ?Sized> PointPolicy for Box<T> {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        (**self).pick(pos, open)
    }
}

pub fn check_open(
    space: &FiniteSpace,
    variant: GameVariant,
    closure: PointSet,
    open: PointSet,
) -> Result<(), GameError> {
    let illegal = |reason| GameError::IllegalMove { player: Player::One, closure, offered: open, reason };
    if open.is_empty() {
        return Err(illegal(IllegalReason::EmptyOpen));
    }
    if !space.is_open(open) {
        return Err(illegal(IllegalReason::NotOpen));
    }
    if variant == GameVariant::Restricted && open.meets(closure) {
        return Err(illegal(IllegalReason::MeetsClosure));
    }
    Ok(())
}

pub fn check_pick(
    variant: GameVariant,
    closure: PointSet,
    open: PointSet,
    picked: PointSet,
) -> Result<(), GameError> {
    let illegal = |reason| GameError::IllegalMove { player: Player::Two, closure, offered: picked, reason };
    if picked.is_empty() {
        return Err(illegal(IllegalReason::EmptyPick));
    }
    if !picked.is_subset(open) {
        return Err(illegal(IllegalReason::PickOutsideOpen));
    }
    if variant != GameVariant::MultiPoint && picked.len() != 1 {
        return Err(illegal(IllegalReason::SeveralPoints));
    }
    Ok(())
}

/// Every reply Player II may give to `open`.
pub fn replies(variant: GameVariant, open: PointSet) -> Result<Vec<PointSet>, GameError> {
    match variant {
        GameVariant::MultiPoint => {
            if open.len() > MULTI_REPLY_CAP {
                return Err(GameError::ReplyCapExceeded { size: open.len() });
            }
            Ok(open.subsets().skip(1).collect())
        }
        _ => Ok(open.iter().map(PointSet::singleton).collect()),
    }
}

/// Default cap on play length for policy evaluation.
pub fn default_stage_limit(space: &FiniteSpace) -> usize {
    2 * space.len() + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    /// Optimal number of remaining picks.
    pub value: usize,
    /// The lowest-bitmask open attaining the value; `None` at the full set.
    pub best_move: Option<PointSet>,
}

/// Optimal values of the game over every reachable closed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTable {
    space_name: String,
    variant: GameVariant,
    n: usize,
    entries: BTreeMap<PointSet, TableEntry>,
}

impl StrategyTable {
    pub fn space_name(&self) -> &str {
        &self.space_name
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    /// Game density: the value at the empty closure.
    pub fn gd(&self) -> usize {
        self.entries[&PointSet::EMPTY].value
    }

    pub fn value(&self, closed: PointSet) -> Option<usize> {
        self.entries.get(&closed).map(|e| e.value)
    }

    pub fn best_move(&self, closed: PointSet) -> Option<PointSet> {
        self.entries.get(&closed).and_then(|e| e.best_move)
    }

    /// Entries in increasing bitmask order of the closed set.
    pub fn entries(&self) -> impl Iterator<Item = (PointSet, TableEntry)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Solves the game exactly over all closed sets reachable from `∅`.
///
/// The restricted game is acyclic (each pick adds a point outside the
/// closure) and is solved by memoized minimax. The free variants admit
/// wasted innings, where a pick inside the current closure leaves the
/// position unchanged; they are solved as a least fixpoint by value
/// iteration, so self-loops are handled rather than assumed away.
pub fn solve_game(space: &FiniteSpace, variant: GameVariant) -> Result<StrategyTable, GameError> {
    let opens = space.opens().ok_or(GameError::OpensUnavailable)?;
    let mut entries = BTreeMap::new();
    match variant {
        GameVariant::Restricted => {
            solve_restricted(space, opens, PointSet::EMPTY, &mut entries);
        }
        GameVariant::Free | GameVariant::MultiPoint => {
            solve_free(space, opens, variant, &mut entries)?;
        }
    }
    Ok(StrategyTable { space_name: String::from(space.name()), variant, n: space.len(), entries })
}

fn solve_restricted(
    space: &FiniteSpace,
    opens: &[PointSet],
    closed: PointSet,
    memo: &mut BTreeMap<PointSet, TableEntry>,
) -> usize {
    if let Some(e) = memo.get(&closed) {
        return e.value;
    }
    if closed == space.full() {
        memo.insert(closed, TableEntry { value: 0, best_move: None });
        return 0;
    }
    let mut best = usize::MAX;
    let mut best_move = None;
    for &u in opens.iter().filter(|u| !u.is_empty() && !u.meets(closed)) {
        let mut worst = 0;
        for x in u.iter() {
            let next = space.closure(closed | PointSet::singleton(x));
            worst = worst.max(solve_restricted(space, opens, next, memo));
        }
        if worst < best {
            best = worst;
            best_move = Some(u);
        }
    }
    let value = best + 1;
    memo.insert(closed, TableEntry { value, best_move });
    value
}

fn solve_free(
    space: &FiniteSpace,
    opens: &[PointSet],
    variant: GameVariant,
    out: &mut BTreeMap<PointSet, TableEntry>,
) -> Result<(), GameError> {
    let moves: Vec<(PointSet, Vec<PointSet>)> = opens
        .iter()
        .filter(|u| !u.is_empty())
        .map(|&u| replies(variant, u).map(|r| (u, r)))
        .collect::<Result<_, _>>()?;

    // Reachable closed sets, with the successor index of every (move, reply).
    let mut index: BTreeMap<PointSet, usize> = BTreeMap::new();
    let mut states: Vec<PointSet> = Vec::new();
    let mut succ: Vec<Vec<Vec<usize>>> = Vec::new();
    index.insert(PointSet::EMPTY, 0);
    states.push(PointSet::EMPTY);
    let mut cursor = 0;
    while cursor < states.len() {
        let c = states[cursor];
        let mut per_move = Vec::with_capacity(moves.len());
        for (_, rs) in &moves {
            let mut targets = Vec::with_capacity(rs.len());
            for &r in rs {
                let next = space.closure(c | r);
                let id = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    states.len() - 1
                });
                targets.push(id);
            }
            per_move.push(targets);
        }
        succ.push(per_move);
        cursor += 1;
    }

    let full = space.full();
    let mut value: Vec<usize> = states.iter().map(|&c| if c == full { 0 } else { usize::MAX }).collect();
    loop {
        let mut changed = false;
        let snapshot = value.clone();
        for (s, &c) in states.iter().enumerate() {
            if c == full {
                continue;
            }
            let best = succ[s]
                .iter()
                .map(|ts| ts.iter().map(|&t| snapshot[t]).max().unwrap_or(usize::MAX))
                .min()
                .unwrap_or(usize::MAX);
            let candidate = best.saturating_add(1);
            if candidate < value[s] {
                value[s] = candidate;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    for (s, &c) in states.iter().enumerate() {
        let best_move = if c == full {
            None
        } else {
            let target = value[s] - 1;
            moves
                .iter()
                .zip(&succ[s])
                .find(|(_, ts)| ts.iter().all(|&t| value[t] <= target))
                .map(|((u, _), _)| *u)
        };
        out.insert(c, TableEntry { value: value[s], best_move });
    }
    Ok(())
}

/// Lengths Player I can force exactly, in increasing order, under the
/// restricted rules.
pub fn exact_force_set(space: &FiniteSpace) -> Result<Vec<usize>, GameError> {
    let opens = space.opens().ok_or(GameError::OpensUnavailable)?;
    let mut memo = BTreeMap::new();
    let mask = exact_lengths(space, opens, PointSet::EMPTY, &mut memo);
    Ok((0..128).filter(|&k| mask & (1u128 << k) != 0).collect())
}

fn exact_lengths(
    space: &FiniteSpace,
    opens: &[PointSet],
    closed: PointSet,
    memo: &mut BTreeMap<PointSet, u128>,
) -> u128 {
    if closed == space.full() {
        return 1;
    }
    if let Some(&m) = memo.get(&closed) {
        return m;
    }
    let mut any = 0u128;
    for &u in opens.iter().filter(|u| !u.is_empty() && !u.meets(closed)) {
        let mut all = u128::MAX;
        for x in u.iter() {
            let next = space.closure(closed | PointSet::singleton(x));
            all &= exact_lengths(space, opens, next, memo) << 1;
        }
        any |= all;
    }
    memo.insert(closed, any);
    any
}

/// Walks every play of `policy` against every Player II reply, calling
/// `visit` on each finished history. Returns the longest play length.
pub fn explore_plays<P, F>(
    space: &FiniteSpace,
    policy: &P,
    variant: GameVariant,
    limit: usize,
    mut visit: F,
) -> Result<usize, GameError>
where
    P: OpenPolicy + ?Sized,
    F: FnMut(&[Inning]) -> Result<(), GameError>,
{
    let mut history = Vec::new();
    explore(space, policy, variant, limit, PointSet::EMPTY, &mut history, &mut visit)
}

fn explore<P, F>(
    space: &FiniteSpace,
    policy: &P,
    variant: GameVariant,
    limit: usize,
    closure: PointSet,
    history: &mut Vec<Inning>,
    visit: &mut F,
) -> Result<usize, GameError>
where
    P: OpenPolicy + ?Sized,
    F: FnMut(&[Inning]) -> Result<(), GameError>,
{
    if closure == space.full() {
        visit(history)?;
        return Ok(history.len());
    }
    if history.len() >= limit {
        return Err(GameError::Unbounded { limit });
    }
    let open = policy.choose(&Position { space, closure, history })?;
    check_open(space, variant, closure, open)?;
    let mut worst = 0;
    for picked in replies(variant, open)? {
        let next = space.closure(closure | picked);
        history.push(Inning { open, picked, closure: next });
        let len = explore(space, policy, variant, limit, next, history, visit);
        history.pop();
        worst = worst.max(len?);
    }
    Ok(worst)
}

/// Worst-case length of `policy` against an adversarial Player II.
pub fn evaluate_policy<P: OpenPolicy + ?Sized>(
    space: &FiniteSpace,
    policy: &P,
    variant: GameVariant,
) -> Result<usize, GameError> {
    explore_plays(space, policy, variant, default_stage_limit(space), |_| Ok(()))
}

/// Shortest finished play Player I can reach against a fixed Player II,
/// trying every legal open at every stage. Plays longer than `limit` are
/// discarded; `None` if none finish.
pub fn shortest_play<Q: PointPolicy + ?Sized>(
    space: &FiniteSpace,
    picker: &mut Q,
    variant: GameVariant,
    limit: usize,
) -> Result<Option<usize>, GameError> {
    let opens = space.opens().ok_or(GameError::OpensUnavailable)?;
    let mut history = Vec::new();
    shortest(space, opens, picker, variant, limit, PointSet::EMPTY, &mut history)
}

fn shortest<Q: PointPolicy + ?Sized>(
    space: &FiniteSpace,
    opens: &[PointSet],
    picker: &mut Q,
    variant: GameVariant,
    limit: usize,
    closure: PointSet,
    history: &mut Vec<Inning>,
) -> Result<Option<usize>, GameError> {
    if closure == space.full() {
        return Ok(Some(history.len()));
    }
    if history.len() >= limit {
        return Ok(None);
    }
    let mut best: Option<usize> = None;
    for &open in opens.iter().filter(|u| !u.is_empty()) {
        if variant == GameVariant::Restricted && open.meets(closure) {
            continue;
        }
        let picked = picker.pick(&Position { space, closure, history }, open)?;
        check_pick(variant, closure, open, picked)?;
        let next = space.closure(closure | picked);
        history.push(Inning { open, picked, closure: next });
        let len = shortest(space, opens, picker, variant, limit, next, history);
        history.pop();
        if let Some(l) = len? {
            best = Some(best.map_or(l, |b| b.min(l)));
        }
    }
    Ok(best)
}

/// A finished (or abandoned) play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub innings: Vec<Inning>,
    pub terminal: bool,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.innings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.innings.is_empty()
    }
}

/// Plays one game between two policies, checking every move.
pub fn play_transcript<P, Q>(
    space: &FiniteSpace,
    one: &P,
    two: &mut Q,
    variant: GameVariant,
    limit: usize,
) -> Result<Transcript, GameError>
where
    P: OpenPolicy + ?Sized,
    Q: PointPolicy + ?Sized,
{
    let mut innings: Vec<Inning> = Vec::new();
    let mut closure = PointSet::EMPTY;
    while closure != space.full() {
        if innings.len() >= limit {
            return Err(GameError::Unbounded { limit });
        }
        let pos = Position { space, closure, history: &innings };
        let open = one.choose(&pos)?;
        check_open(space, variant, closure, open)?;
        let picked = two.pick(&pos, open)?;
        check_pick(variant, closure, open, picked)?;
        closure = space.closure(closure | picked);
        innings.push(Inning { open, picked, closure });
    }
    Ok(Transcript { innings, terminal: true })
}

/// Picks the lowest-index point of the open.
#[derive(Debug, Clone, Copy, Default)]
pub struct LowestPicker;

impl PointPolicy for LowestPicker {
    fn pick(&mut self, _pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        open.first().map(PointSet::singleton).ok_or(GameError::IllegalMove {
            player: Player::One,
            closure: PointSet::EMPTY,
            offered: open,
            reason: IllegalReason::EmptyOpen,
        })
    }
}

/// Picks the point whose closure grows the picked closure the least.
#[derive(Debug, Clone, Copy, Default)]
pub struct StallPicker;

impl PointPolicy for StallPicker {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        open.iter()
            .min_by_key(|&x| pos.space.closure(pos.closure | PointSet::singleton(x)).len())
            .map(PointSet::singleton)
            .ok_or(GameError::IllegalMove {
                player: Player::One,
                closure: pos.closure,
                offered: open,
                reason: IllegalReason::EmptyOpen,
            })
    }
}

/// Maximizes the remaining optimal value according to a solved table.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryPicker<'t> {
    table: &'t StrategyTable,
}

impl<'t> AdversaryPicker<'t> {
    pub fn new(table: &'t StrategyTable) -> Self {
        AdversaryPicker { table }
    }
}

impl PointPolicy for AdversaryPicker<'_> {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        let mut best: Option<(usize, usize)> = None;
        for x in open.iter() {
            let next = pos.space.closure(pos.closure | PointSet::singleton(x));
            let v = self.table.value(next).ok_or(GameError::UnknownState(next))?;
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, x));
            }
        }
        best.map(|(_, x)| PointSet::singleton(x)).ok_or(GameError::IllegalMove {
            player: Player::One,
            closure: pos.closure,
            offered: open,
            reason: IllegalReason::EmptyOpen,
        })
    }
}

/// Uniformly random point of the open.
#[derive(Debug, Clone)]
pub struct RandomPicker<R> {
    rng: R,
}

impl<R: Rng> RandomPicker<R> {
    pub fn new(rng: R) -> Self {
        RandomPicker { rng }
    }
}

impl<R: Rng> PointPolicy for RandomPicker<R> {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        if open.is_empty() {
            return Err(GameError::IllegalMove {
                player: Player::One,
                closure: pos.closure,
                offered: open,
                reason: IllegalReason::EmptyOpen,
            });
        }
        let k = self.rng.gen_range(0..open.len());
        Ok(PointSet::singleton(open.iter().nth(k).expect("k < |open|")))
    }
}
