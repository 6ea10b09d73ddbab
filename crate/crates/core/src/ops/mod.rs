//! Find, unite and same-set as resumable step machines.
//!
//! Each call to `step` performs exactly one shared-memory access through the
//! [`StepCtx`] and returns the answer on the step that completes the operation.

mod find;
mod unite;

use serde::{Deserialize, Serialize};

pub use find::FindMachine;
pub use unite::{LinkMachine, SameSetMachine, UniteMachine};

use crate::forest::{Compaction, Forest, Node, ProcId};
use crate::rng::FlipSource;
use crate::step::StepCtx;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Find(Node),
    Unite(Node, Node),
    SameSet(Node, Node),
}

impl Op {
    pub fn nodes(&self) -> [Node; 2] {
        match *self {
            Op::Find(x) => [x, x],
            Op::Unite(x, y) | Op::SameSet(x, y) => [x, y],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Root(Node),
    Same(bool),
    United,
}

/// One completed operation with its logical timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpRecord {
    pub op: Op,
    pub answer: Answer,
    pub proc: ProcId,
    pub invoke: u64,
    /// Exact linearization step; absent for threaded runs.
    pub lin: Option<u64>,
    pub response: u64,
    pub visits: u64,
}

/// Machine of whichever operation a process is running.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OpMachine {
    Find(FindMachine),
    Unite(UniteMachine),
    SameSet(SameSetMachine),
}

impl OpMachine {
    pub fn new(op: Op, f: &Forest) -> Self {
        let c = f.config().compaction;
        match op {
            Op::Find(x) => OpMachine::Find(FindMachine::new(x, c)),
            Op::Unite(x, y) => OpMachine::Unite(UniteMachine::new(x, y, c)),
            Op::SameSet(x, y) => OpMachine::SameSet(SameSetMachine::new(x, y, c)),
        }
    }

    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> Option<Answer> {
        match self {
            OpMachine::Find(m) => m.step(ctx, f).map(Answer::Root),
            OpMachine::Unite(m) => m.step(ctx, f).then_some(Answer::United),
            OpMachine::SameSet(m) => m.step(ctx, f).map(Answer::Same),
        }
    }

    /// Whether the next step is the link attempt of a unite (not a helping step).
    pub fn poised_to_link(&self) -> bool {
        matches!(self, OpMachine::Unite(m) if m.poised_to_link())
    }
}

/// Runs `op` to completion; returns the answer and the number of visits.
pub fn execute(f: &Forest, op: Op, proc: ProcId, flips: &mut FlipSource) -> (Answer, u64) {
    let mut m = OpMachine::new(op, f);
    let mut visits = 0u64;
    loop {
        let mut ctx = StepCtx::new(proc, flips);
        let done = m.step(&mut ctx, f);
        visits += ctx.visits as u64;
        if let Some(a) = done {
            return (a, visits);
        }
    }
}

fn run_find(f: &Forest, x: Node, proc: ProcId, c: Compaction) -> Node {
    let mut m = FindMachine::new(x, c);
    let mut flips = FlipSource::for_proc(0, proc);
    loop {
        if let Some(r) = m.step(&mut StepCtx::new(proc, &mut flips), f) {
            return r;
        }
    }
}

/// Find with the forest's configured compaction.
pub fn find(f: &Forest, x: Node, proc: ProcId) -> Node {
    run_find(f, x, proc, f.config().compaction)
}

pub fn find_naive(f: &Forest, x: Node, proc: ProcId) -> Node {
    run_find(f, x, proc, Compaction::Naive)
}

pub fn find_one_try(f: &Forest, x: Node, proc: ProcId) -> Node {
    run_find(f, x, proc, Compaction::OneTry)
}

pub fn find_two_try(f: &Forest, x: Node, proc: ProcId) -> Node {
    run_find(f, x, proc, Compaction::TwoTry)
}

pub fn find_conditional_two_try(f: &Forest, x: Node, proc: ProcId) -> Node {
    run_find(f, x, proc, Compaction::ConditionalTwoTry)
}

pub fn unite(f: &Forest, x: Node, y: Node, proc: ProcId, flips: &mut FlipSource) {
    execute(f, Op::Unite(x, y), proc, flips);
}

pub fn same_set(f: &Forest, x: Node, y: Node, proc: ProcId, flips: &mut FlipSource) -> bool {
    match execute(f, Op::SameSet(x, y), proc, flips).0 {
        Answer::Same(b) => b,
        a => unreachable!("same-set answered {a:?}"),
    }
}
