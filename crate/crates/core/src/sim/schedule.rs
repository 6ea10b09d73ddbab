use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forest::ProcId;

use super::SimRun;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    LockStep,
    RoundRobin,
    Random(u64),
    Adversary(String),
}

/// A sequence of process ids, one per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub procs: usize,
    pub seed: u64,
    pub steps: Vec<usize>,
    pub provenance: Provenance,
}

impl Schedule {
    pub fn explicit(procs: usize, seed: u64, steps: Vec<usize>) -> Self {
        Self { procs, seed, steps, provenance: Provenance::Explicit }
    }

    /// Parses `procs <p> seed <s>` followed by one process id per line.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            match header {
                None => {
                    let t: Vec<&str> = line.split_whitespace().collect();
                    let [kp, p, ks, s] = t[..] else {
                        return Err(err(format!("expected `procs <p> seed <s>`, got `{line}`")));
                    };
                    if kp != "procs" || ks != "seed" {
                        return Err(err(format!("expected `procs <p> seed <s>`, got `{line}`")));
                    }
                    let p: usize = p.parse().map_err(|e| err(format!("bad process count: {e}")))?;
                    let s: u64 = s.parse().map_err(|e| err(format!("bad seed: {e}")))?;
                    if p == 0 {
                        return Err(err("process count must be positive".into()));
                    }
                    header = Some((p, s));
                }
                Some((p, _)) => {
                    let id: usize = line.parse().map_err(|e| err(format!("bad process id `{line}`: {e}")))?;
                    if id == 0 || id > p {
                        return Err(err(format!("process id {id} outside 1..={p}")));
                    }
                    steps.push(id);
                }
            }
        }
        let (procs, seed) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
        Ok(Self::explicit(procs, seed, steps))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("procs {} seed {}\n", self.procs, self.seed);
        for s in &self.steps {
            let _ = writeln!(out, "{s}");
        }
        out
    }
}

/// Chooses the next process to step.
#[derive(Clone, Debug)]
pub enum Policy {
    /// One step of each enabled process in id order, round after round. With
    /// every process running the same program this is lock-step.
    RoundRobin { last: usize },
    /// Round-robin restricted to a set of processes.
    LockStep { procs: Vec<ProcId>, last: usize },
    /// Uniformly random enabled process.
    Random { seed: u64, rng: ChaCha8Rng },
    /// Each process runs its whole program before the next starts.
    Sequential,
    /// Whole operations in turn: a process keeps the processor until its
    /// current operation completes.
    OpRoundRobin { last: usize, holder: Option<ProcId> },
    /// Follows a fixed sequence.
    Explicit { steps: Vec<usize>, pos: usize },
}

impl Policy {
    pub fn round_robin() -> Self {
        Policy::RoundRobin { last: 0 }
    }

    pub fn lock_step(procs: Vec<ProcId>) -> Self {
        Policy::LockStep { procs, last: 0 }
    }

    pub fn random(seed: u64) -> Self {
        Policy::Random { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn op_round_robin() -> Self {
        Policy::OpRoundRobin { last: 0, holder: None }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Policy::Random { seed, .. } => *seed,
            _ => 0,
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Policy::RoundRobin { .. } | Policy::OpRoundRobin { .. } | Policy::Sequential => Provenance::RoundRobin,
            Policy::LockStep { .. } => Provenance::LockStep,
            Policy::Random { seed, .. } => Provenance::Random(*seed),
            Policy::Explicit { .. } => Provenance::Explicit,
        }
    }

    pub fn next(&mut self, run: &SimRun) -> Option<ProcId> {
        let p = run.procs();
        let cyclic_after = |last: usize, ok: &dyn Fn(ProcId) -> bool| {
            (1..=p).map(|k| ProcId::new((last + k - 1) % p + 1)).find(|&q| ok(q))
        };
        match self {
            Policy::RoundRobin { last } => {
                let q = cyclic_after(*last, &|q| run.is_enabled(q))?;
                *last = q.get();
                Some(q)
            }
            Policy::LockStep { procs, last } => {
                let q = cyclic_after(*last, &|q| procs.contains(&q) && run.is_enabled(q))?;
                *last = q.get();
                Some(q)
            }
            Policy::Random { rng, .. } => {
                let en = run.enabled();
                (!en.is_empty()).then(|| en[rng.gen_range(0..en.len())])
            }
            Policy::Sequential => run.enabled().first().copied(),
            Policy::OpRoundRobin { last, holder } => {
                if let Some(h) = *holder {
                    if run.current_op(h).is_some() {
                        return Some(h);
                    }
                }
                let q = cyclic_after(*last, &|q| run.is_enabled(q))?;
                *last = q.get();
                *holder = Some(q);
                Some(q)
            }
            Policy::Explicit { steps, pos } => {
                if run.all_done() {
                    return None;
                }
                let id = *steps.get(*pos)?;
                *pos += 1;
                Some(ProcId::new(id))
            }
        }
    }
}

/// The lock-step schedule of `procs` on a copy of `run`: one step of each
/// still-running process per round until all of them finish.
pub fn lockstep_schedule(run: &SimRun, procs: &[ProcId]) -> Result<Schedule> {
    if procs.is_empty() {
        return Err(Error::InvalidConfig("lock-step schedule over an empty process set".into()));
    }
    let mut copy = run.clone();
    copy.record_trace(false);
    let mut s = copy.run_policy(&mut Policy::lock_step(procs.to_vec()))?;
    s.provenance = Provenance::LockStep;
    Ok(s)
}
