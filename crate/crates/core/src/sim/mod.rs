//! Deterministic step-level simulator.
//!
//! A [`SimRun`] owns a forest and one process per id, each with a queue of
//! operations. [`SimRun::step`] advances one process by exactly one shared
//! access and then runs the enabled invariant hooks.

mod explore;
pub mod scenarios;
mod schedule;

use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

pub use explore::{explore, ExploreFailure, ExploreLimits, ExploreReport};
pub use schedule::{lockstep_schedule, Policy, Provenance, Schedule};

use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, Node, ProcId, Snapshot, WorkCounters};
use crate::ops::{Answer, Op, OpMachine, OpRecord};
use crate::rng::FlipSource;
use crate::step::{Access, CasPurpose, StepCtx};

/// Which invariants are checked after every step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checks {
    /// Acyclicity and the parent ordering of the linking mode.
    pub structure: bool,
    /// Claims on roots agree with their owners' descriptors.
    pub claims: bool,
    /// Compaction CASes install proper union-forest ancestors.
    pub compaction: bool,
    /// A find's answer is a root at its linearization step.
    pub find_roots: bool,
}

impl Checks {
    pub const ALL: Checks = Checks { structure: true, claims: true, compaction: true, find_roots: true };
    pub const NONE: Checks = Checks { structure: false, claims: false, compaction: false, find_roots: false };
    /// Checks whose cost does not grow with `n`.
    pub const CHEAP: Checks = Checks { structure: false, claims: false, compaction: false, find_roots: true };
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Running {
    machine: OpMachine,
    op: Op,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct OpMeta {
    invoke: u64,
    lin: Option<u64>,
    pending_lin: Option<u64>,
    visits: u64,
}

#[derive(Clone, Debug)]
struct Proc {
    program: VecDeque<Op>,
    current: Option<Running>,
    meta: OpMeta,
    flips: FlipSource,
    first_step: Option<u64>,
}

/// One executed step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub step: u64,
    pub proc: ProcId,
    pub access: Access,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.step, self.proc, self.access)
    }
}

#[derive(Clone, Debug)]
pub struct SimRun {
    forest: Forest,
    procs: Vec<Proc>,
    step: u64,
    records: Vec<OpRecord>,
    trace: Option<Vec<TraceEntry>>,
    checks: Checks,
}

/// Hasher that keeps every byte, giving exact state keys.
struct ByteSink(Vec<u8>);

impl Hasher for ByteSink {
    fn finish(&self) -> u64 {
        0
    }

    fn write(&mut self, bytes: &[u8]) {
        self.0.extend_from_slice(bytes);
    }
}

impl SimRun {
    pub fn new(config: ForestConfig, seed: u64) -> Result<Self> {
        let forest = Forest::new(config.with_shadow(true))?;
        Ok(Self::with_forest(forest, seed))
    }

    pub fn with_forest(forest: Forest, seed: u64) -> Self {
        let procs = (1..=forest.procs())
            .map(|i| Proc {
                program: VecDeque::new(),
                current: None,
                meta: OpMeta::default(),
                flips: FlipSource::for_proc(seed, ProcId::new(i)),
                first_step: None,
            })
            .collect();
        Self { forest, procs, step: 0, records: Vec::new(), trace: None, checks: Checks::ALL }
    }

    pub fn set_checks(&mut self, checks: Checks) {
        self.checks = checks;
    }

    pub fn record_trace(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn trace(&self) -> &[TraceEntry] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Trace as text, one step per line.
    pub fn trace_dump(&self) -> String {
        self.trace().iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn set_flips(&mut self, proc: ProcId, flips: FlipSource) {
        self.procs[proc.index()].flips = flips;
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn procs(&self) -> usize {
        self.procs.len()
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn records(&self) -> &[OpRecord] {
        &self.records
    }

    pub fn take_records(&mut self) -> Vec<OpRecord> {
        std::mem::take(&mut self.records)
    }

    pub fn snapshot(&self) -> Snapshot {
        self.forest.snapshot()
    }

    pub fn counters(&self) -> WorkCounters {
        self.forest.total_counters()
    }

    pub fn proc_counters(&self, proc: ProcId) -> WorkCounters {
        self.forest.counters(proc)
    }

    /// Appends operations to `proc`'s queue.
    pub fn enqueue(&mut self, proc: ProcId, ops: impl IntoIterator<Item = Op>) -> Result<()> {
        let n = self.forest.n();
        let ops: Vec<Op> = ops.into_iter().collect();
        for op in &ops {
            for x in op.nodes() {
                if x >= n {
                    return Err(Error::NodeOutOfRange { node: x, n });
                }
            }
        }
        self.check_proc(proc.get())?;
        self.procs[proc.index()].program.extend(ops);
        Ok(())
    }

    fn check_proc(&self, id: usize) -> Result<()> {
        if id == 0 || id > self.procs.len() {
            return Err(Error::UnknownProcess { proc: id, procs: self.procs.len(), step: self.step });
        }
        Ok(())
    }

    /// Whether `proc` has an operation in flight or queued.
    pub fn is_enabled(&self, proc: ProcId) -> bool {
        let p = &self.procs[proc.index()];
        p.current.is_some() || !p.program.is_empty()
    }

    pub fn enabled(&self) -> Vec<ProcId> {
        (1..=self.procs.len()).map(ProcId::new).filter(|&p| self.is_enabled(p)).collect()
    }

    pub fn all_done(&self) -> bool {
        self.procs.iter().all(|p| p.current.is_none() && p.program.is_empty())
    }

    /// Whether `proc`'s next step is the atomic write of a link attempt.
    pub fn poised_to_link(&self, proc: ProcId) -> bool {
        self.procs[proc.index()].current.as_ref().is_some_and(|r| r.machine.poised_to_link())
    }

    /// The operation `proc` is running, if any.
    pub fn current_op(&self, proc: ProcId) -> Option<Op> {
        self.procs[proc.index()].current.as_ref().map(|r| r.op)
    }

    pub fn first_step(&self, proc: ProcId) -> Option<u64> {
        self.procs[proc.index()].first_step
    }

    /// Executes one step of `proc`.
    pub fn step(&mut self, proc: ProcId) -> Result<TraceEntry> {
        self.check_proc(proc.get())?;
        let now = self.step;
        let idx = proc.index();
        if self.procs[idx].current.is_none() {
            let Some(op) = self.procs[idx].program.pop_front() else {
                return Err(Error::ScheduleExhausted { proc: proc.get(), step: now });
            };
            let machine = OpMachine::new(op, &self.forest);
            self.procs[idx].current = Some(Running { machine, op });
            self.procs[idx].meta = OpMeta { invoke: now, ..OpMeta::default() };
        }
        self.procs[idx].first_step.get_or_insert(now);

        let (answer, access, linked_for, visits, mark_lin) = {
            let p = &mut self.procs[idx];
            let running = p.current.as_mut().expect("running op");
            let mut ctx = StepCtx::new(proc, &mut p.flips);
            let answer = running.machine.step(&mut ctx, &self.forest);
            let access = ctx.access.expect("a step must perform one shared access");
            (answer, access, ctx.linked_for, ctx.visits, ctx.mark_lin)
        };
        self.step += 1;
        let entry = TraceEntry { step: now, proc, access };
        if let Some(t) = &mut self.trace {
            t.push(entry);
        }

        {
            let meta = &mut self.procs[idx].meta;
            meta.visits += visits as u64;
            if mark_lin {
                meta.pending_lin = Some(now);
            }
        }
        if let Some(j) = linked_for {
            let target = &mut self.procs[j.index()];
            match target.current.as_ref().map(|r| r.op) {
                Some(Op::Unite(..)) => {
                    target.meta.lin.get_or_insert(now);
                }
                other => {
                    return Err(Error::Invariant {
                        step: now,
                        what: format!("link completed for process {j} which is running {other:?}"),
                    })
                }
            }
        }

        if self.checks.compaction {
            if let Access::CasParent { node, expected, new, ok: true, purpose: CasPurpose::Compact } = access {
                if expected != new && !self.forest.is_union_ancestor(expected, new) {
                    return Err(Error::Invariant {
                        step: now,
                        what: format!("compaction at {node} installed {new}, not a proper ancestor of {expected}"),
                    });
                }
            }
        }

        if let Some(answer) = answer {
            let p = &mut self.procs[idx];
            let running = p.current.take().expect("running op");
            let lin = match running.op {
                Op::Find(_) => now,
                Op::Unite(..) => p.meta.lin.unwrap_or(now),
                Op::SameSet(..) => p.meta.pending_lin.unwrap_or(now),
            };
            if self.checks.find_roots {
                if let (Op::Find(_), Answer::Root(r)) = (running.op, answer) {
                    if self.forest.parent(r) != r {
                        return Err(Error::Invariant { step: now, what: format!("find answered non-root {r}") });
                    }
                }
            }
            self.records.push(OpRecord {
                op: running.op,
                answer,
                proc,
                invoke: p.meta.invoke,
                lin: Some(lin),
                response: now,
                visits: p.meta.visits,
            });
        }

        if self.checks.structure {
            let s = self.forest.snapshot();
            if !s.is_acyclic() {
                return Err(Error::Invariant { step: now, what: "cycle in parent pointers".into() });
            }
            if let Err(x) = s.check_monotone(self.forest.config().linking) {
                return Err(Error::Invariant {
                    step: now,
                    what: format!(
                        "parent {} of node {x} breaks {} order (ranks {} -> {})",
                        s.parents[x],
                        self.forest.config().linking.name(),
                        s.ranks[x],
                        s.ranks[s.parents[x]]
                    ),
                });
            }
        }
        if self.checks.claims && self.forest.config().helping() {
            if let Err(what) = self.forest.check_claims() {
                return Err(Error::Invariant { step: now, what });
            }
        }
        Ok(entry)
    }

    /// Runs `proc` until its current (or next) operation completes.
    pub fn run_op(&mut self, proc: ProcId) -> Result<OpRecord> {
        let before = self.records.len();
        loop {
            self.step(proc)?;
            if self.records.len() > before {
                return Ok(*self.records.last().expect("record"));
            }
        }
    }

    /// Drives the explicit schedule until it is exhausted or every process is done.
    pub fn run_schedule(&mut self, schedule: &Schedule) -> Result<()> {
        if schedule.procs != self.procs.len() {
            return Err(Error::InvalidConfig(format!(
                "schedule is for {} processes, run has {}",
                schedule.procs,
                self.procs.len()
            )));
        }
        for &id in &schedule.steps {
            if self.all_done() {
                break;
            }
            self.check_proc(id)?;
            self.step(ProcId::new(id))?;
        }
        Ok(())
    }

    /// Drives the run with a scheduling policy until all processes are done,
    /// returning the explicit schedule that was followed.
    pub fn run_policy(&mut self, policy: &mut Policy) -> Result<Schedule> {
        let mut steps = Vec::new();
        while let Some(p) = policy.next(self) {
            self.step(p)?;
            steps.push(p.get());
        }
        Ok(Schedule { procs: self.procs.len(), seed: policy.seed(), steps, provenance: policy.provenance() })
    }

    /// Exact key of the shared state plus every process's local state.
    pub fn state_key(&self) -> Vec<u8> {
        let mut h = ByteSink(Vec::with_capacity(256));
        self.forest.raw_state().hash(&mut h);
        for p in &self.procs {
            p.program.hash(&mut h);
            p.current.hash(&mut h);
            p.flips.hash(&mut h);
        }
        h.0
    }

    /// Root of `x` read directly from memory, without counting work.
    pub fn root_of(&self, x: Node) -> Node {
        let mut u = x;
        loop {
            let v = self.forest.parent(u);
            if v == u {
                return u;
            }
            u = v;
        }
    }
}
