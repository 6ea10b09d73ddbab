//! Threaded, simulated and scenario runners producing [`RunReport`]s.

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering::SeqCst};
use std::sync::Barrier;
use std::thread;
use std::time::Instant;

use cdsu_core::forest::{Compaction, FlagMode, Forest, ForestConfig, Linking, Node, ProcId, Realization, Snapshot};
use cdsu_core::ops::{execute, Op, OpRecord};
use cdsu_core::rng::FlipSource;
use cdsu_core::sim::scenarios::{
    build_binomial_tree, scenario_log_lowerbound, scenario_sqrt_p_path, scenario_wakeup,
};
use cdsu_core::sim::{Checks, Policy, Schedule, SimRun};
use cdsu_core::verify::{
    check_history_intervals, check_partition, check_rank_hard_bounds, replay_linearization, unite_pairs,
};
use cdsu_core::Error as CoreError;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::report::{bound_ratio, Mode, RunReport};
use crate::workload::max_node;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("workload mentions node {node} but the forest has n = {n}")]
    SizeMismatch { node: Node, n: usize },
    #[error("workload has {got} process lists, expected p = {p}")]
    ProcMismatch { got: usize, p: usize },
    #[error("unknown scenario `{0}` (expected wakeup, log-lowerbound, sqrt-path, sqrt-path-adversary or binomial)")]
    UnknownScenario(String),
    #[error("schedule ended at step {step} with operations still pending")]
    ScheduleTooShort { step: u64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Forest rules shared by every runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub link: Linking,
    pub find: Compaction,
    pub seed: u64,
    /// Only the simulator honours `Native`; threads always use helping for rank links.
    pub realization: Realization,
    pub flag_mode: FlagMode,
    /// Record histories in threaded runs and check them afterwards.
    pub verify: bool,
}

impl RunConfig {
    pub fn new(link: Linking, find: Compaction, seed: u64) -> Self {
        Self { link, find, seed, realization: Realization::Helping, flag_mode: FlagMode::Announcer, verify: false }
    }

    fn forest_config(&self, n: usize, p: usize, realization: Realization) -> ForestConfig {
        ForestConfig::new(n, p, self.link, self.find)
            .with_realization(realization)
            .with_flag_mode(self.flag_mode)
    }
}

fn check_sizes(n: usize, p: usize, programs: &[Vec<Op>]) -> Result<(), RunError> {
    if programs.len() != p {
        return Err(RunError::ProcMismatch { got: programs.len(), p });
    }
    match max_node(programs) {
        Some(node) if node >= n => Err(RunError::SizeMismatch { node, n }),
        _ => Ok(()),
    }
}

/// Final-state checks shared by all modes.
fn check_final(snap: &Snapshot, f: &Forest, pairs: &[(Node, Node)]) -> Result<(), String> {
    check_partition(snap, pairs).map_err(|e| format!("partition: {e:?}"))?;
    snap.check_monotone(f.config().linking)
        .map_err(|x| format!("node {x} breaks the {} order", f.config().linking.name()))?;
    f.check_claims()?;
    if f.config().linking == Linking::RankDcas {
        check_rank_hard_bounds(snap)?;
    }
    Ok(())
}

fn report(
    f: &Forest,
    m: usize,
    cfg: &RunConfig,
    mode: Mode,
    max_op_visits: u64,
    wall_ms: f64,
    verified: Option<Result<(), String>>,
) -> RunReport {
    let p = f.procs();
    let total = f.total_counters();
    RunReport {
        n: f.n(),
        m,
        p,
        link: cfg.link,
        find: cfg.find,
        seed: cfg.seed,
        mode,
        per_proc: (1..=p).map(|i| f.counters(ProcId::new(i))).collect(),
        total,
        max_op_visits,
        max_rank: f.snapshot().max_rank(),
        wall_ms,
        ratio: bound_ratio(f.n(), m, p, cfg.find, total.visits),
        verified,
    }
}

/// Runs each list on its own thread, all released by one barrier.
///
/// With `cfg.verify` every operation is stamped with a global clock on
/// invocation and response, and the history is checked afterwards together
/// with the final partition, order and claims.
pub fn run_threads(n: usize, programs: &[Vec<Op>], cfg: &RunConfig) -> Result<RunReport, RunError> {
    let p = programs.len().max(1);
    check_sizes(n, p, programs)?;
    let f = Forest::new(cfg.forest_config(n, p, Realization::Helping))?;
    let clock = AtomicU64::new(0);
    let barrier = Barrier::new(p + 1);
    let verify = cfg.verify;
    let mut started = None;
    let results: Vec<(u64, Vec<OpRecord>)> = thread::scope(|s| {
        let handles: Vec<_> = programs
            .iter()
            .enumerate()
            .map(|(i, prog)| {
                let (f, clock, barrier) = (&f, &clock, &barrier);
                s.spawn(move || {
                    let me = ProcId::new(i + 1);
                    let mut flips = FlipSource::for_proc(cfg.seed, me);
                    let mut records = Vec::with_capacity(if verify { prog.len() } else { 0 });
                    let mut max_visits = 0;
                    barrier.wait();
                    for &op in prog {
                        let invoke = if verify { clock.fetch_add(1, SeqCst) } else { 0 };
                        let (answer, visits) = execute(f, op, me, &mut flips);
                        max_visits = max_visits.max(visits);
                        if verify {
                            let response = clock.fetch_add(1, SeqCst);
                            records.push(OpRecord { op, answer, proc: me, invoke, lin: None, response, visits });
                        }
                    }
                    (max_visits, records)
                })
            })
            .collect();
        barrier.wait();
        started = Some(Instant::now());
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let wall_ms = started.expect("barrier passed").elapsed().as_secs_f64() * 1e3;
    let max_op_visits = results.iter().map(|r| r.0).max().unwrap_or(0);
    let m = programs.iter().map(Vec::len).sum();
    let verified = verify.then(|| {
        let records: Vec<OpRecord> = results.into_iter().flat_map(|r| r.1).collect();
        let snap = f.snapshot();
        check_final(&snap, &f, &unite_pairs(programs.iter().flatten()))?;
        check_history_intervals(n, &records).map_err(|e| e.to_string())
    });
    Ok(report(&f, m, cfg, Mode::Threads, max_op_visits, wall_ms, verified))
}

/// Where the simulator's schedule comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleSource {
    RoundRobin,
    /// Whole operations in turn, process by process.
    OpRoundRobin,
    Random(u64),
    LockStep,
    Sequential,
    File(Schedule),
}

impl ScheduleSource {
    pub fn name(&self) -> String {
        match self {
            ScheduleSource::RoundRobin => "round-robin".into(),
            ScheduleSource::OpRoundRobin => "op-round-robin".into(),
            ScheduleSource::Random(s) => format!("random-{s}"),
            ScheduleSource::LockStep => "lock-step".into(),
            ScheduleSource::Sequential => "sequential".into(),
            ScheduleSource::File(_) => "file".into(),
        }
    }

    fn policy(&self, p: usize) -> Policy {
        match self {
            ScheduleSource::RoundRobin => Policy::round_robin(),
            ScheduleSource::OpRoundRobin => Policy::op_round_robin(),
            ScheduleSource::Random(s) => Policy::random(*s),
            ScheduleSource::LockStep => Policy::lock_step((1..=p).map(ProcId::new).collect()),
            ScheduleSource::Sequential => Policy::Sequential,
            ScheduleSource::File(s) => Policy::Explicit { steps: s.steps.clone(), pos: 0 },
        }
    }
}

/// Policy names; `random` alone takes the run's seed.
impl FromStr for ScheduleSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "round-robin" => ScheduleSource::RoundRobin,
            "op-round-robin" => ScheduleSource::OpRoundRobin,
            "lock-step" => ScheduleSource::LockStep,
            "sequential" => ScheduleSource::Sequential,
            _ => match s.strip_prefix("random") {
                Some("") => ScheduleSource::Random(0),
                Some(rest) => {
                    let seed = rest.trim_start_matches([':', '-']);
                    ScheduleSource::Random(seed.parse().map_err(|_| format!("bad random seed in `{s}`"))?)
                }
                None => return Err(format!("unknown schedule policy `{s}`")),
            },
        })
    }
}

fn invariant_or_error(e: CoreError) -> Result<Result<(), String>, RunError> {
    match e {
        CoreError::Invariant { .. } => Ok(Err(e.to_string())),
        other => Err(RunError::Core(other)),
    }
}

/// Runs the lists in the simulator with every per-step check enabled, then
/// replays the history against the sequential oracle.
pub fn run_sim(n: usize, programs: &[Vec<Op>], cfg: &RunConfig, source: &ScheduleSource) -> Result<RunReport, RunError> {
    run_sim_recorded(n, programs, cfg, source).map(|(r, _)| r)
}

/// [`run_sim`], also returning the schedule that was followed.
pub fn run_sim_recorded(
    n: usize,
    programs: &[Vec<Op>],
    cfg: &RunConfig,
    source: &ScheduleSource,
) -> Result<(RunReport, Schedule), RunError> {
    let p = programs.len().max(1);
    check_sizes(n, p, programs)?;
    if let ScheduleSource::File(s) = source {
        if s.procs != p {
            return Err(CoreError::InvalidConfig(format!("schedule is for {} processes, workload has {p}", s.procs)).into());
        }
    }
    let mut run = SimRun::new(cfg.forest_config(n, p, cfg.realization), cfg.seed)?;
    run.set_checks(Checks::ALL);
    for (i, prog) in programs.iter().enumerate() {
        run.enqueue(ProcId::new(i + 1), prog.iter().copied())?;
    }
    let start = Instant::now();
    let mut policy = source.policy(p);
    let mut followed = Vec::new();
    let mut outcome = Ok(());
    while let Some(q) = policy.next(&run) {
        followed.push(q.get());
        if let Err(e) = run.step(q) {
            outcome = Err(e);
            break;
        }
    }
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let m = programs.iter().map(Vec::len).sum();
    let verified = match outcome {
        Err(e) => invariant_or_error(e)?,
        Ok(()) if !run.all_done() => return Err(RunError::ScheduleTooShort { step: run.step_index() }),
        Ok(()) => check_final(&run.snapshot(), run.forest(), &unite_pairs(programs.iter().flatten()))
            .and_then(|()| replay_linearization(n, run.records()).map_err(|e| e.to_string())),
    };
    let max_op_visits = run.records().iter().map(|r| r.visits).max().unwrap_or(0);
    let mode = Mode::Sim(source.name());
    let schedule = Schedule::explicit(p, cfg.seed, followed);
    Ok((report(run.forest(), m, cfg, mode, max_op_visits, wall_ms, Some(verified)), schedule))
}

/// Parameters of [`run_scenario`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioParams {
    pub n: usize,
    pub p: usize,
    /// Operation budget of `log-lowerbound`.
    pub m: usize,
    /// Process count of `wakeup`; defaults to `min(p, n - 1)`.
    pub k: Option<usize>,
}

/// Outcome of a scenario: the run report, the scenario's own measurements,
/// and whether its expected property held.
#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub report: RunReport,
    pub details: serde_json::Value,
    pub property_held: bool,
}

pub const SCENARIOS: [&str; 5] = ["wakeup", "log-lowerbound", "sqrt-path", "sqrt-path-adversary", "binomial"];

/// Runs a named scenario on a fresh simulator.
///
/// Per-step checks are limited to those independent of `n`; the history is
/// replayed and the final forest checked afterwards.
pub fn run_scenario(name: &str, params: ScenarioParams, cfg: &RunConfig) -> Result<ScenarioOutcome, RunError> {
    if !SCENARIOS.contains(&name) {
        return Err(RunError::UnknownScenario(name.into()));
    }
    let ScenarioParams { n, p, m, k } = params;
    let mut run = SimRun::new(cfg.forest_config(n, p, cfg.realization), cfg.seed)?;
    run.set_checks(Checks::CHEAP);
    let start = Instant::now();
    let result = match name {
        "wakeup" => {
            let k = k.unwrap_or(p.min(n.saturating_sub(1)));
            scenario_wakeup(&mut run, k, &mut Policy::random(cfg.seed)).map(|r| {
                let ok = r.some_true && r.true_after_all_woke;
                (json!(r), ok)
            })
        }
        "log-lowerbound" => scenario_log_lowerbound(&mut run, m, cfg.seed).map(|r| {
            let ok = r.groups == 0 || r.ratio >= 0.5;
            (json!(r), ok)
        }),
        "sqrt-path" | "sqrt-path-adversary" => {
            let adversary = name == "sqrt-path-adversary";
            scenario_sqrt_p_path(&mut run, adversary, cfg.seed).map(|r| {
                let ok = if adversary {
                    r.mean_find_depth >= (p as f64).sqrt() / 4.0
                } else {
                    r.mean_find_depth <= 4.0 * (p as f64).log2()
                };
                (json!(r), ok)
            })
        }
        _ => {
            let k = 1usize << n.ilog2();
            build_binomial_tree(&mut run, k).map(|b| {
                let height = run.snapshot().height();
                (json!({ "root": b.root, "rounds": b.rounds, "height": height }), height == k.ilog2() as usize)
            })
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (details, property_held, verified) = match result {
        Ok((d, ok)) => {
            let snap = run.snapshot();
            let pairs = unite_pairs(run.records().iter().map(|r| &r.op));
            let v = check_final(&snap, run.forest(), &pairs)
                .and_then(|()| replay_linearization(n, run.records()).map_err(|e| e.to_string()));
            (d, ok, v)
        }
        Err(e) => {
            let v = invariant_or_error(e)?;
            (serde_json::Value::Null, false, v)
        }
    };
    let ops = run.records().len();
    let max_op_visits = run.records().iter().map(|r| r.visits).max().unwrap_or(0);
    let report = report(run.forest(), ops, cfg, Mode::Scenario(name.into()), max_op_visits, wall_ms, Some(verified));
    Ok(ScenarioOutcome { report, details, property_held })
}
