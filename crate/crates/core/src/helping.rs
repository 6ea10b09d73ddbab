//! CAS-only rank linking through per-process descriptors and claims.
//!
//! A process linking roots `u` and `v` picks the child `x` (smaller rank, or
//! smaller index on equal ranks) and the intended parent `y`, writes `(x, y)`
//! into its descriptor, and claims `x` by CASing its rank word from `(r, 0)`
//! to `(r, me, child)`. From then on anyone who sees the claim can finish the
//! link by following the descriptor. Any process whose link reads a claimed
//! word helps first and then lets unite retry.
//!
//! Deterministic variant, run by every helper of claim `(r, j, child)` on `x`:
//!
//! 1. read `j`'s descriptor and check that it names `x`;
//! 2. re-read `x`'s word and check it still holds the claim;
//! 3. read `y`'s word. If it is `(r, 0)`, CAS it to `(r + 1, j, parent)`,
//!    which bumps `y` and pins it as a root. If it is claimed at rank `r` by
//!    someone else and `y` is still a root, help that claim and re-read;
//! 4. `z = y.p`, then `CAS(x.p, x, z)`; this is the link;
//! 5. if `y` was bumped, CAS its word from `(r + 1, j, parent)` to `(r + 1, 0)`.
//!
//! Every parent has rank above `r` when `x` becomes its child, so rank order
//! is strict. Stale helpers are harmless because each CAS expects a word that
//! can occur at most once: ranks only grow, and a node's child claim is never
//! cleared once it stops being a root.
//!
//! Randomized variant: the descriptor also carries a flag, either chosen by
//! the announcer or left null and resolved by the first helper with a
//! randomized CAS. Parent-change installs `x.p = y`; rank-bump CASes `x`'s word
//! from `(r, j, child)` to `(r + 1, 0)`.

use crate::forest::{ClaimRole, Descriptor, Flag, FlagMode, Forest, Linking, Node, ProcId, RankWord};
use crate::rng::FlipSource;
use crate::step::{CasPurpose, StepCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pc {
    ReadDesc,
    Recheck,
    ReadY,
    CheckYRoot(RankWord),
    BumpY,
    ReadZ,
    LinkX(Node),
    ClearY,
    ResolveFlag(Descriptor),
    Act,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Frame {
    owner: ProcId,
    entry: Node,
    seen: RankWord,
    x: Node,
    y: Node,
    r: u32,
    flag: Flag,
    bumped: bool,
    pc: Pc,
}

impl Frame {
    fn entered(entry: Node, seen: RankWord) -> Self {
        Frame {
            owner: seen.proc.expect("helping an unclaimed word"),
            entry,
            seen,
            x: entry,
            y: entry,
            r: seen.rank,
            flag: Flag::Null,
            bumped: false,
            pc: Pc::ReadDesc,
        }
    }
}

/// Executes the pending descriptor behind a claim, recursing into claims met on the way.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HelpMachine {
    frames: Vec<Frame>,
}

impl HelpMachine {
    /// Help the claim `seen` observed on `node`.
    pub fn enter(node: Node, seen: RankWord) -> Self {
        Self { frames: vec![Frame::entered(node, seen)] }
    }

    /// The owner finishing its own fresh claim on `x`.
    fn own(x: Node, y: Node, r: u32, desc: Descriptor, me: ProcId, linking: Linking) -> Self {
        let seen = RankWord::claimed(r, me, ClaimRole::Child);
        let mut fr = Frame { x, y, r, flag: desc.flag, ..Frame::entered(x, seen) };
        fr.pc = match linking {
            Linking::RankRandomized if desc.flag == Flag::Null => Pc::ResolveFlag(desc),
            Linking::RankRandomized => Pc::Act,
            _ => Pc::ReadY,
        };
        Self { frames: vec![fr] }
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    /// Returns true on the step that finishes the outermost help.
    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> bool {
        let fr = self.frames.last_mut().expect("stepping a finished help");
        if fr.owner != ctx.proc {
            f.note_help_step(ctx.proc);
        }
        let push = match f.config().linking {
            Linking::RankRandomized => {
                step_rand(fr, ctx, f);
                None
            }
            _ => step_det(fr, ctx, f),
        };
        if let Some(child) = push {
            self.frames.push(child);
            return false;
        }
        if self.frames.last().is_some_and(|fr| fr.pc == Pc::Done) {
            self.frames.pop();
        }
        self.frames.is_empty()
    }
}

fn finish(fr: &mut Frame) {
    fr.pc = Pc::Done;
}

fn step_det(fr: &mut Frame, ctx: &mut StepCtx, f: &Forest) -> Option<Frame> {
    match fr.pc {
        Pc::ReadDesc => {
            let d = ctx.read_desc(f, fr.owner);
            match (fr.seen.role, d) {
                (ClaimRole::Child, Some(d)) if d.x == fr.entry => {
                    fr.y = d.y;
                    fr.pc = Pc::Recheck;
                }
                (ClaimRole::Parent, Some(d)) if d.y == fr.entry && fr.seen.rank > 0 => {
                    fr.x = d.x;
                    fr.r = fr.seen.rank - 1;
                    fr.bumped = true;
                    fr.pc = Pc::Recheck;
                }
                _ => finish(fr),
            }
        }
        Pc::Recheck => {
            if ctx.read_word(f, fr.entry) != fr.seen {
                finish(fr);
            } else if fr.seen.role == ClaimRole::Parent {
                fr.pc = Pc::ReadZ;
            } else {
                fr.pc = Pc::ReadY;
            }
        }
        Pc::ReadY => {
            let wy = ctx.read_word(f, fr.y);
            let r = fr.r;
            if wy == RankWord::claimed(r + 1, fr.owner, ClaimRole::Parent) {
                fr.bumped = true;
                fr.pc = Pc::ReadZ;
            } else if wy == RankWord::free(r) {
                fr.pc = Pc::BumpY;
            } else if wy.rank == r && wy.role == ClaimRole::Parent {
                // y is pinned as a parent by another link; finish that first
                return Some(Frame::entered(fr.y, wy));
            } else if wy.rank == r && wy.role == ClaimRole::Child {
                fr.pc = Pc::CheckYRoot(wy);
            } else {
                fr.pc = Pc::ReadZ;
            }
        }
        Pc::CheckYRoot(wy) => {
            let p = ctx.read_parent(f, fr.y);
            if p != fr.y {
                fr.pc = Pc::LinkX(p);
            } else {
                fr.pc = Pc::ReadY;
                return Some(Frame::entered(fr.y, wy));
            }
        }
        Pc::BumpY => {
            let r = fr.r;
            if ctx.cas_word(f, fr.y, RankWord::free(r), RankWord::claimed(r + 1, fr.owner, ClaimRole::Parent)) {
                fr.bumped = true;
                fr.pc = Pc::ReadZ;
            } else {
                fr.pc = Pc::ReadY;
            }
        }
        Pc::ReadZ => {
            let z = ctx.read_parent(f, fr.y);
            fr.pc = Pc::LinkX(z);
        }
        Pc::LinkX(z) => {
            if ctx.cas_parent(f, fr.x, fr.x, z, CasPurpose::Link) {
                ctx.linked_for = Some(fr.owner);
            }
            if fr.bumped {
                fr.pc = Pc::ClearY;
            } else {
                finish(fr);
            }
        }
        Pc::ClearY => {
            let r1 = fr.r + 1;
            ctx.cas_word(f, fr.y, RankWord::claimed(r1, fr.owner, ClaimRole::Parent), RankWord::free(r1));
            finish(fr);
        }
        Pc::ResolveFlag(_) | Pc::Act | Pc::Done => unreachable!("stepping a finished or randomized frame"),
    }
    None
}

fn step_rand(fr: &mut Frame, ctx: &mut StepCtx, f: &Forest) {
    match fr.pc {
        Pc::ReadDesc => match ctx.read_desc(f, fr.owner) {
            Some(d) if d.x == fr.entry && fr.seen.role == ClaimRole::Child => {
                fr.y = d.y;
                fr.flag = d.flag;
                fr.pc = if d.flag == Flag::Null { Pc::ResolveFlag(d) } else { Pc::Recheck };
            }
            _ => finish(fr),
        },
        Pc::ResolveFlag(d) => match ctx.rcas_flag(f, fr.owner, d) {
            Some(now) if now.x == fr.x && now.y == fr.y && now.flag != Flag::Null => {
                fr.flag = now.flag;
                fr.pc = Pc::Recheck;
            }
            _ => finish(fr),
        },
        Pc::Recheck => {
            if ctx.read_word(f, fr.x) == fr.seen {
                fr.pc = Pc::Act;
            } else {
                finish(fr);
            }
        }
        Pc::Act => {
            match fr.flag {
                Flag::ParentChange => {
                    if ctx.cas_parent(f, fr.x, fr.x, fr.y, CasPurpose::Link) {
                        ctx.linked_for = Some(fr.owner);
                    }
                }
                Flag::RankBump => {
                    ctx.cas_word(f, fr.x, fr.seen, RankWord::free(fr.r + 1));
                }
                Flag::Null => unreachable!("acting on an unresolved flag"),
            }
            finish(fr);
        }
        _ => unreachable!("deterministic stage in a randomized help"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum LinkPc {
    ReadU,
    ReadV,
    Announce,
    Claim,
    Help,
}

/// One link attempt of a rank-linked forest in helping mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HelpLink {
    u: Node,
    v: Node,
    wu: RankWord,
    desc: Descriptor,
    r: u32,
    pc: LinkPc,
    help: Option<HelpMachine>,
}

impl HelpLink {
    pub fn new(u: Node, v: Node) -> Self {
        Self {
            u,
            v,
            wu: RankWord::ZERO,
            desc: Descriptor { x: u, y: v, flag: Flag::Null },
            r: 0,
            pc: LinkPc::ReadU,
            help: None,
        }
    }

    pub fn is_fresh(&self) -> bool {
        self.pc == LinkPc::ReadU
    }

    pub fn at_claim(&self) -> bool {
        self.pc == LinkPc::Claim
    }

    /// Returns true on the step that ends the attempt.
    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> bool {
        match self.pc {
            LinkPc::ReadU => {
                let w = ctx.read_word(f, self.u);
                if w.is_free() {
                    self.wu = w;
                    self.pc = LinkPc::ReadV;
                } else {
                    self.help = Some(HelpMachine::enter(self.u, w));
                    self.pc = LinkPc::Help;
                }
            }
            LinkPc::ReadV => {
                let wv = ctx.read_word(f, self.v);
                if !wv.is_free() {
                    self.help = Some(HelpMachine::enter(self.v, wv));
                    self.pc = LinkPc::Help;
                    return false;
                }
                let (ru, rv) = (self.wu.rank, wv.rank);
                let (x, y, r, ry) = if ru < rv || (ru == rv && self.u < self.v) {
                    (self.u, self.v, ru, rv)
                } else {
                    (self.v, self.u, rv, ru)
                };
                let cfg = f.config();
                let flag = match cfg.linking {
                    Linking::RankRandomized if ry > r || r >= cfg.rank_cap() => Flag::ParentChange,
                    Linking::RankRandomized if cfg.flag_mode == FlagMode::Announcer => {
                        if ctx.flips.flip() {
                            Flag::ParentChange
                        } else {
                            Flag::RankBump
                        }
                    }
                    _ => Flag::Null,
                };
                self.desc = Descriptor { x, y, flag };
                self.r = r;
                self.pc = LinkPc::Announce;
            }
            LinkPc::Announce => {
                ctx.write_desc(f, self.desc);
                self.pc = LinkPc::Claim;
            }
            LinkPc::Claim => {
                let (x, r) = (self.desc.x, self.r);
                if !ctx.cas_word(f, x, RankWord::free(r), RankWord::claimed(r, ctx.proc, ClaimRole::Child)) {
                    return true;
                }
                self.help = Some(HelpMachine::own(x, self.desc.y, r, self.desc, ctx.proc, f.config().linking));
                self.pc = LinkPc::Help;
            }
            LinkPc::Help => {
                return self.help.as_mut().expect("help stage without a helper").step(ctx, f);
            }
        }
        false
    }
}

/// Writes `(x, y)` into `proc`'s descriptor and claims `x` at rank `r`.
/// Returns whether the claim took.
pub fn announce_det_link(f: &Forest, proc: ProcId, x: Node, y: Node, r: u32) -> bool {
    f.write_descriptor(proc, Descriptor { x, y, flag: Flag::Null });
    f.cas_rank_process(x, RankWord::free(r), RankWord::claimed(r, proc, ClaimRole::Child), proc)
}

/// Randomized announce: the flag is parent-change if `y` outranks `r` or `r`
/// is at the cap, a coin flip otherwise, or null under [`FlagMode::RandomizedCas`].
pub fn announce_rand_link(f: &Forest, proc: ProcId, x: Node, y: Node, r: u32, flips: &mut FlipSource) -> bool {
    let cfg = f.config();
    let flag = if f.rank(y) > r || r >= cfg.rank_cap() {
        Flag::ParentChange
    } else if cfg.flag_mode == FlagMode::RandomizedCas {
        Flag::Null
    } else if flips.flip() {
        Flag::ParentChange
    } else {
        Flag::RankBump
    };
    f.write_descriptor(proc, Descriptor { x, y, flag });
    f.cas_rank_process(x, RankWord::free(r), RankWord::claimed(r, proc, ClaimRole::Child), proc)
}

/// Helps whatever claim currently sits on `node`, to completion.
pub fn help(f: &Forest, node: Node, proc: ProcId, flips: &mut FlipSource) {
    let w = f.rank_word(node);
    if w.is_free() {
        return;
    }
    let mut m = HelpMachine::enter(node, w);
    while !m.step(&mut StepCtx::new(proc, flips), f) {}
}

/// Resolves a null flag of `owner`'s descriptor with a randomized CAS and
/// returns the flag as it stands afterwards.
pub fn randomized_cas_flag(f: &Forest, owner: ProcId, proc: ProcId, flips: &mut FlipSource) -> Option<Flag> {
    let d = f.descriptor(owner)?;
    if d.flag != Flag::Null {
        return Some(d.flag);
    }
    let mut ctx = StepCtx::new(proc, flips);
    ctx.rcas_flag(f, owner, d).map(|d| d.flag)
}
