//! The `opengame` command line: every subcommand writes records to the data
//! stream and diagnostics to the error stream.
//!
//! Exit codes: 0 success, 1 usage or file error, 2 a failed check or an
//! inconclusive fan-tightness verdict.

mod interactive;
pub mod io;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use opengame_core::enumeration::{self, canonicalize, EnumerationError, Method};
use opengame_core::game::{
    play_transcript, solve_game, AdversaryPicker, Inning, LowestPicker, OpenPolicy, PointPolicy, RandomPicker,
    StallPicker,
};
use opengame_core::invariants::InvariantReport;
use opengame_core::metric::greedy_dense_sequence;
use opengame_core::products::{fan_tightness_check, product, CandidatePool, ClosureReading, FanStatus};
use opengame_core::strategies::{
    aggregate_product_strategy, all_index_sets, pi_base_strategy, product_strategy, AggregateStrategy, FamilySource,
    OrderedPiBase, OwnedTablePolicy,
};
use opengame_core::suite::{self, parse_checks, CheckRecord, SuiteConfig};
use opengame_core::{FiniteSpace, GameVariant};

use crate::io::{Emitter, Format, SpaceFile};

/// Largest space whose canonical form `validate` computes (n! relabelings).
const CANONICAL_LIMIT: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "opengame", version, about = "Exact laboratory for the open-point game on finite spaces")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Ndjson, global = true)]
    format: Format,
    /// Worker threads for suites (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Restricted,
    Free,
    Multipoint,
}

impl From<VariantArg> for GameVariant {
    fn from(v: VariantArg) -> GameVariant {
        match v {
            VariantArg::Restricted => GameVariant::Restricted,
            VariantArg::Free => GameVariant::Free,
            VariantArg::Multipoint => GameVariant::MultiPoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlayerOne {
    PiBase,
    Product,
    Aggregate,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlayerTwo {
    Optimal,
    Random,
    Stall,
    Lowest,
    Interactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Labeled,
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    FamilyClosure,
    Preorder,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PoolArg {
    Boxes,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReadingArg {
    Whole,
    Traces,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a space file and print it with its canonical form.
    Validate { space: PathBuf },
    /// Print d, δ, gd, π, w and t.
    Invariants { space: PathBuf },
    /// Print the optimal-play table, one closed set per line.
    Solve {
        space: PathBuf,
        #[arg(long, value_enum, default_value_t = VariantArg::Restricted)]
        variant: VariantArg,
    },
    /// Play one game and print its transcript.
    Play {
        /// Space to play on; product strategies take `--factors` instead.
        space: Option<PathBuf>,
        #[arg(long = "pI", value_enum, default_value_t = PlayerOne::Optimal)]
        p1: PlayerOne,
        #[arg(long = "pII", value_enum, default_value_t = PlayerTwo::Optimal)]
        p2: PlayerTwo,
        #[arg(long, value_enum, default_value_t = VariantArg::Restricted)]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Product spec for `--pI product` (first two factors) or `aggregate`.
        #[arg(long)]
        factors: Option<PathBuf>,
        /// Write the aggregate strategy's phase ledger here.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// List every topology on n points.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Labeled)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification checks over the enumerated corpus.
    Suite {
        #[arg(long)]
        n: usize,
        /// Comma-separated check names, or `all`.
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        metric_cases: usize,
    },
    /// Build the product of several spaces.
    Product {
        #[arg(required = true)]
        spaces: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Search for fan-tightness witnesses on a product.
    FanCheck {
        spec: PathBuf,
        #[arg(long)]
        kappa: usize,
        #[arg(long, value_enum, default_value_t = PoolArg::Boxes)]
        pool: PoolArg,
        #[arg(long, value_enum, default_value_t = ReadingArg::Whole)]
        reading: ReadingArg,
        /// Write witness cells here instead of the data stream.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run the greedy dense-sequence algorithm on a pseudometric.
    Greedy {
        metric: PathBuf,
        /// Label of the first point.
        #[arg(long)]
        start: String,
    },
}

/// Standard streams, injectable for tests.
pub struct Streams<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, streams: Streams<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let Streams { input, out, err } = streams;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, input, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let format = cli.format;
    match cli.command {
        Command::Validate { space } => validate(&space, &mut Emitter::new(format, out)),
        Command::Invariants { space } => invariants(&space, &mut Emitter::new(format, out)),
        Command::Solve { space, variant } => solve(&space, variant.into(), &mut Emitter::new(format, out)),
        Command::Play { space, p1, p2, variant, seed, factors, ledger } => {
            let args = PlayArgs { space, p1, p2, variant: variant.into(), seed, factors, ledger };
            play(args, input, out, format)
        }
        Command::Enumerate { n, mode, method, out: path } => enumerate(n, mode, method, path.as_deref(), out, err, format),
        Command::Suite { n, checks, report, seed, metric_cases } => {
            let mut config = SuiteConfig::new(n, parse_checks(&checks).map_err(anyhow::Error::msg)?, seed);
            config.metric_cases = metric_cases;
            run_suite(&config, cli.jobs, report.as_deref(), out, err, format)
        }
        Command::Product { spaces, out: path } => product_cmd(&spaces, path.as_deref(), out, format),
        Command::FanCheck { spec, kappa, pool, reading, witness } => {
            fan_check(&spec, kappa, pool, reading, witness.as_deref(), out, format)
        }
        Command::Greedy { metric, start } => greedy(&metric, &start, &mut Emitter::new(format, out)),
    }
}

#[derive(Serialize)]
struct ValidateRecord {
    valid: bool,
    #[serde(flatten)]
    space: SpaceFile,
    t0: bool,
    t1: bool,
    canonical_opens: Option<Vec<Vec<String>>>,
}

fn validate(path: &Path, em: &mut Emitter<'_>) -> Result<i32> {
    let space = io::read_space(path)?;
    let canonical_opens = (space.len() <= CANONICAL_LIMIT)
        .then(|| SpaceFile::of(&canonicalize(&space)).map(|f| f.opens))
        .transpose()?;
    em.emit(&ValidateRecord {
        valid: true,
        space: SpaceFile::of(&space)?,
        t0: space.is_t0(),
        t1: space.is_t1(),
        canonical_opens,
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct InvariantRecord<'a> {
    space: &'a str,
    n: usize,
    #[serde(flatten)]
    report: InvariantReport,
}

fn invariants(path: &Path, em: &mut Emitter<'_>) -> Result<i32> {
    let space = io::read_space(path)?;
    let report = InvariantReport::compute(&space)?;
    em.emit(&InvariantRecord { space: space.name(), n: space.len(), report })?;
    Ok(0)
}

#[derive(Serialize)]
struct TableRecord {
    closed_set: Vec<String>,
    value: usize,
    best_move: Option<Vec<String>>,
}

fn solve(path: &Path, variant: GameVariant, em: &mut Emitter<'_>) -> Result<i32> {
    let space = io::read_space(path)?;
    let table = solve_game(&space, variant)?;
    for (closed, entry) in table.entries() {
        em.emit(&TableRecord {
            closed_set: space.set_labels(closed),
            value: entry.value,
            best_move: entry.best_move.map(|m| space.set_labels(m)),
        })?;
    }
    Ok(0)
}

struct PlayArgs {
    space: Option<PathBuf>,
    p1: PlayerOne,
    p2: PlayerTwo,
    variant: GameVariant,
    seed: u64,
    factors: Option<PathBuf>,
    ledger: Option<PathBuf>,
}

#[derive(Serialize)]
struct InningRecord {
    stage: usize,
    open: Vec<String>,
    picked: Vec<String>,
    closure: Vec<String>,
}

#[derive(Serialize)]
struct PlaySummary<'a> {
    space: &'a str,
    variant: GameVariant,
    length: usize,
    gd: usize,
    terminal: bool,
}

fn optimal_policy(space: &FiniteSpace, variant: GameVariant) -> Result<Box<dyn OpenPolicy>> {
    Ok(Box::new(OwnedTablePolicy(solve_game(space, variant)?)))
}

fn load_factors(args: &PlayArgs) -> Result<Vec<FiniteSpace>> {
    let Some(path) = &args.factors else {
        bail!("--pI product and --pI aggregate need --factors");
    };
    io::read_factors(path)
}

fn play(args: PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write, format: Format) -> Result<i32> {
    if args.ledger.is_some() && args.p1 != PlayerOne::Aggregate {
        bail!("--ledger is only produced by --pI aggregate");
    }
    let variant = args.variant;
    let (space, engine) = match args.p1 {
        PlayerOne::PiBase | PlayerOne::Optimal => {
            let Some(path) = &args.space else { bail!("a space file is required") };
            let space = io::read_space(path)?;
            let policy: Box<dyn OpenPolicy> = match args.p1 {
                PlayerOne::PiBase => Box::new(pi_base_strategy(OrderedPiBase::minimal(&space))),
                _ => optimal_policy(&space, variant)?,
            };
            (space, Engine::Boxed(policy))
        }
        PlayerOne::Product => {
            let factors = load_factors(&args)?;
            if factors.len() != 2 {
                bail!("--pI product needs exactly two factors, got {}", factors.len());
            }
            let (x, y) = (&factors[0], &factors[1]);
            let factor_policy = optimal_policy(y, GameVariant::Restricted)?;
            let ps = product_strategy(x, y, OrderedPiBase::minimal(x), factor_policy, variant)?;
            (ps.space().clone(), Engine::Boxed(Box::new(ps)))
        }
        PlayerOne::Aggregate => {
            if variant != GameVariant::Restricted {
                bail!("the aggregate strategy plays the restricted game");
            }
            let factors = load_factors(&args)?;
            let subs = factors
                .iter()
                .map(|f| optimal_policy(f, GameVariant::Restricted))
                .collect::<Result<Vec<_>>>()?;
            let agg =
                aggregate_product_strategy(&factors, subs, all_index_sets(factors.len()), FamilySource::MinimalBoxes)?;
            (agg.space().clone(), Engine::Aggregate(Box::new(agg)))
        }
    };
    let policy = engine.policy();
    let aggregate = engine.aggregate();
    let table = solve_game(&space, variant)?;
    let gd = table.gd();
    let limit = space.len() * 2 + 2;

    if args.p2 == PlayerTwo::Interactive {
        let mut picker = interactive::InteractivePicker::new(input, &mut *out, variant);
        let transcript = play_transcript(&space, policy, &mut picker, variant, limit);
        let transcript = match transcript {
            Ok(t) => t,
            Err(e) => {
                if let Some(msg) = picker.take_failure() {
                    bail!("{msg}");
                }
                return Err(e.into());
            }
        };
        let len = transcript.len();
        let verdict = match len.cmp(&gd) {
            std::cmp::Ordering::Equal => "matched",
            std::cmp::Ordering::Greater => "above",
            std::cmp::Ordering::Less => "below",
        };
        writeln!(out, "dense; length {len}, {verdict} gd={gd}")?;
        write_ledger(aggregate, &args.ledger, &transcript.innings)?;
        return Ok(0);
    }

    let mut picker: Box<dyn PointPolicy + '_> = match args.p2 {
        PlayerTwo::Optimal => Box::new(AdversaryPicker::new(&table)),
        PlayerTwo::Random => Box::new(RandomPicker::new(ChaCha8Rng::seed_from_u64(args.seed))),
        PlayerTwo::Stall => Box::new(StallPicker),
        PlayerTwo::Lowest => Box::new(LowestPicker),
        PlayerTwo::Interactive => unreachable!("handled above"),
    };
    let transcript = play_transcript(&space, policy, picker.as_mut(), variant, limit)?;
    let mut em = Emitter::new(format, out);
    for (stage, inning) in transcript.innings.iter().enumerate() {
        em.emit(&InningRecord {
            stage,
            open: space.set_labels(inning.open),
            picked: space.set_labels(inning.picked),
            closure: space.set_labels(inning.closure),
        })?;
    }
    em.emit(&PlaySummary {
        space: space.name(),
        variant,
        length: transcript.len(),
        gd,
        terminal: transcript.terminal,
    })?;
    write_ledger(aggregate, &args.ledger, &transcript.innings)?;
    Ok(0)
}

enum Engine {
    Boxed(Box<dyn OpenPolicy>),
    Aggregate(Box<AggregateStrategy>),
}

impl Engine {
    fn policy(&self) -> &dyn OpenPolicy {
        match self {
            Engine::Boxed(p) => p.as_ref(),
            Engine::Aggregate(a) => a.as_ref(),
        }
    }

    fn aggregate(&self) -> Option<&AggregateStrategy> {
        match self {
            Engine::Aggregate(a) => Some(a.as_ref()),
            Engine::Boxed(_) => None,
        }
    }
}

fn write_ledger(agg: Option<&AggregateStrategy>, path: &Option<PathBuf>, history: &[Inning]) -> Result<()> {
    let (Some(agg), Some(path)) = (agg, path) else { return Ok(()) };
    let ledger = agg.ledger_for(history)?;
    let mut file = io::create(Some(path))?.expect("path given");
    let mut em = Emitter::new(Format::Ndjson, &mut file);
    for entry in &ledger.entries {
        em.emit(entry)?;
    }
    Ok(())
}

fn enumerate(
    n: usize,
    mode: ModeArg,
    method: MethodArg,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
    format: Format,
) -> Result<i32> {
    let labeled = |method| -> Result<Vec<FiniteSpace>, EnumerationError> {
        match method {
            MethodArg::FamilyClosure => enumeration::enumerate_labeled(n, Method::FamilyClosure),
            MethodArg::Preorder => enumeration::enumerate_labeled(n, Method::Preorder),
            MethodArg::Both => enumeration::enumerate_labeled_checked(n),
        }
    };
    let spaces = match mode {
        ModeArg::Labeled => labeled(method),
        ModeArg::Unlabeled => {
            if method == MethodArg::Both {
                labeled(method).map(|_| ())?;
            }
            enumeration::enumerate_unlabeled(n)
        }
    };
    let spaces = match spaces {
        Ok(s) => s,
        Err(e @ EnumerationError::GeneratorMismatch(_)) => {
            writeln!(err, "error: {e}")?;
            return Ok(2);
        }
        Err(e) => return Err(e.into()),
    };
    let mut file = io::create(path)?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    let mut em = Emitter::new(format, sink);
    for s in &spaces {
        em.emit(&SpaceFile::of(s)?)?;
    }
    writeln!(err, "{} spaces", spaces.len())?;
    Ok(0)
}

fn run_suite(
    config: &SuiteConfig,
    jobs: Option<usize>,
    report: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
    format: Format,
) -> Result<i32> {
    let work = suite::jobs(config).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().context("cannot start worker threads")?;
    // Indexed parallel collect keeps job order, so reports are reproducible.
    let records: Vec<CheckRecord> = pool.install(|| work.par_iter().map(suite::run_job).collect());
    let mut file = io::create(report)?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    let mut em = Emitter::new(format, sink);
    for r in &records {
        em.emit(r)?;
    }
    let failed = records.iter().filter(|r| !r.pass).count();
    writeln!(err, "{} checks, {} passed, {failed} failed", records.len(), records.len() - failed)?;
    Ok(if failed == 0 { 0 } else { 2 })
}

fn product_cmd(paths: &[PathBuf], path: Option<&Path>, out: &mut dyn Write, format: Format) -> Result<i32> {
    let factors = paths.iter().map(|p| io::read_space(p)).collect::<Result<Vec<_>>>()?;
    let prod = product(&factors)?;
    let mut file = io::create(path)?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    Emitter::new(format, sink).emit(&SpaceFile::of(prod.space())?)?;
    Ok(0)
}

#[derive(Serialize)]
struct WitnessRecord {
    gamma: Vec<usize>,
    open: Vec<String>,
    outcome: opengame_core::products::CellOutcome,
    family: Option<Vec<Vec<String>>>,
}

#[derive(Serialize)]
struct FanSummary {
    status: FanStatus,
    kappa: usize,
    pool: CandidatePool,
    reading: ClosureReading,
    sufficient_condition: bool,
    designated: Vec<usize>,
    cells: usize,
}

fn fan_check(
    spec: &Path,
    kappa: usize,
    pool: PoolArg,
    reading: ReadingArg,
    witness: Option<&Path>,
    out: &mut dyn Write,
    format: Format,
) -> Result<i32> {
    let factors = io::read_factors(spec)?;
    let pool = match pool {
        PoolArg::Boxes => CandidatePool::Boxes,
        PoolArg::All => CandidatePool::All,
    };
    let reading = match reading {
        ReadingArg::Whole => ClosureReading::Whole,
        ReadingArg::Traces => ClosureReading::Traces,
    };
    let verdict = fan_tightness_check(&factors, kappa, pool, reading)?;
    let full = product(&factors)?;
    let mut file = io::create(witness)?;
    {
        let sink: &mut dyn Write = match file.as_mut() {
            Some(f) => f,
            None => &mut *out,
        };
        let mut em = Emitter::new(format, sink);
        for cell in &verdict.cells {
            let sub = full.subproduct(&cell.gamma)?;
            em.emit(&WitnessRecord {
                gamma: cell.gamma.clone(),
                open: sub.space().set_labels(cell.open),
                outcome: cell.outcome,
                family: cell.family.as_ref().map(|f| f.iter().map(|&v| sub.space().set_labels(v)).collect()),
            })?;
        }
    }
    Emitter::new(format, out).emit(&FanSummary {
        status: verdict.status,
        kappa,
        pool,
        reading,
        sufficient_condition: verdict.sufficient.holds,
        designated: verdict.sufficient.designated.clone(),
        cells: verdict.cells.len(),
    })?;
    Ok(if verdict.holds() { 0 } else { 2 })
}

#[derive(Serialize)]
struct GreedyRecord<'a> {
    step: usize,
    point: &'a str,
    radius: Option<String>,
}

fn greedy(path: &Path, start: &str, em: &mut Emitter<'_>) -> Result<i32> {
    let m = io::read_metric(path)?;
    let Some(s) = m.labels().iter().position(|l| l == start) else {
        bail!("unknown start point {start:?}");
    };
    let run = greedy_dense_sequence(&m, s)?;
    for (step, &x) in run.order.iter().enumerate() {
        let radius = step.checked_sub(1).map(|i| run.radii[i].to_string());
        em.emit(&GreedyRecord { step, point: &m.labels()[x], radius })?;
    }
    Ok(0)
}
