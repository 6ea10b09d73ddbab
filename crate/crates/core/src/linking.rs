//! Single-attempt links: by index, by rank with a DCAS elink, and by rank with
//! a randomized elink. Retrying is the caller's business.

use serde::{Deserialize, Serialize};

use crate::forest::{Forest, Linking, Node, ProcId};
use crate::rng::FlipSource;
use crate::step::{CasPurpose, StepCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    CasParent,
    DcasElink,
    RandomizedParent,
    RandomizedRankBump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkOutcome {
    pub child: Node,
    pub parent: Node,
    pub kind: LinkKind,
    /// Whether the atomic attempt took effect. Unite never branches on it.
    pub succeeded: bool,
}

/// `if u < v then CAS(u.p, u, v) else CAS(v.p, v, u)` as one step.
pub fn link_index_step(ctx: &mut StepCtx, f: &Forest, u: Node, v: Node) -> LinkOutcome {
    assert_ne!(u, v, "link of a node with itself");
    let (child, parent) = if u < v { (u, v) } else { (v, u) };
    let succeeded = ctx.cas_parent(f, child, child, parent, CasPurpose::Link);
    if succeeded {
        ctx.linked_for = Some(ctx.proc);
    }
    LinkOutcome { child, parent, kind: LinkKind::CasParent, succeeded }
}

/// The decision step of a rank link after reading `r = rank(u)` and `s = rank(v)`.
pub fn rank_link_step(ctx: &mut StepCtx, f: &Forest, u: Node, v: Node, r: u32, s: u32) -> LinkOutcome {
    assert_ne!(u, v, "link of a node with itself");
    let out = if r < s {
        let ok = ctx.cas_parent_rank(f, u, (u, r), (v, r));
        LinkOutcome { child: u, parent: v, kind: LinkKind::CasParent, succeeded: ok }
    } else if r > s {
        let ok = ctx.cas_parent_rank(f, v, (v, s), (u, s));
        LinkOutcome { child: v, parent: u, kind: LinkKind::CasParent, succeeded: ok }
    } else {
        match f.config().linking {
            Linking::RankDcas => elink_dcas_step(ctx, f, u, v, r),
            Linking::RankRandomized => elink_randomized_step(ctx, f, u, v, r),
            Linking::Index => panic!("rank link on an index-linked forest"),
        }
    };
    if out.succeeded && out.kind != LinkKind::RandomizedRankBump {
        ctx.linked_for = Some(ctx.proc);
    }
    out
}

/// Makes `v` the parent of `u` and bumps `v` to `r + 1` in one atomic step.
pub fn elink_dcas_step(ctx: &mut StepCtx, f: &Forest, u: Node, v: Node, r: u32) -> LinkOutcome {
    let ok = ctx.dcas(f, u, v, r);
    LinkOutcome { child: u, parent: v, kind: LinkKind::DcasElink, succeeded: ok }
}

/// With `a < b` the two nodes, heads tries to make `b` the parent of `a` and
/// tails tries to bump `a` to `r + 1`. At the rank cap no coin is flipped.
pub fn elink_randomized_step(ctx: &mut StepCtx, f: &Forest, u: Node, v: Node, r: u32) -> LinkOutcome {
    let (a, b) = (u.min(v), u.max(v));
    let heads = r >= f.config().rank_cap() || ctx.flips.flip();
    if heads {
        let ok = ctx.cas_parent_rank(f, a, (a, r), (b, r));
        LinkOutcome { child: a, parent: b, kind: LinkKind::RandomizedParent, succeeded: ok }
    } else {
        let ok = ctx.cas_parent_rank(f, a, (a, r), (a, r + 1));
        LinkOutcome { child: a, parent: b, kind: LinkKind::RandomizedRankBump, succeeded: ok }
    }
}

/// Link by index as a standalone call.
pub fn link_by_index(f: &Forest, u: Node, v: Node, proc: ProcId) -> LinkOutcome {
    let mut flips = FlipSource::for_proc(0, proc);
    link_index_step(&mut StepCtx::new(proc, &mut flips), f, u, v)
}

/// Generic rank link as a standalone call: two reads, then one atomic attempt.
/// Uses the simulator-atomic primitives, so callers must serialize access.
pub fn link_by_rank(f: &Forest, u: Node, v: Node, proc: ProcId, flips: &mut FlipSource) -> LinkOutcome {
    f.note_link_attempt(proc);
    let r = f.rank(u);
    let s = f.rank(v);
    rank_link_step(&mut StepCtx::new(proc, flips), f, u, v, r, s)
}

pub fn elink_dcas(f: &Forest, u: Node, v: Node, r: u32, proc: ProcId) -> LinkOutcome {
    let mut flips = FlipSource::for_proc(0, proc);
    elink_dcas_step(&mut StepCtx::new(proc, &mut flips), f, u, v, r)
}

pub fn elink_randomized(f: &Forest, u: Node, v: Node, r: u32, proc: ProcId, flips: &mut FlipSource) -> LinkOutcome {
    elink_randomized_step(&mut StepCtx::new(proc, flips), f, u, v, r)
}

/// Analysis rank of `x` under random-index linking: `⌊lg n⌋ − ⌊lg(n − π(x) + 1)⌋`,
/// where `position[x] = π(x)` is in `1..=n`.
pub fn random_index_rank(x: Node, n: usize, position: &[usize]) -> u32 {
    let pi = position[x];
    assert!((1..=n).contains(&pi), "position {pi} outside 1..={n}");
    n.ilog2() - (n - pi + 1).ilog2()
}
