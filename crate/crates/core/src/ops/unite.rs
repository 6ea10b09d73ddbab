use crate::forest::{Compaction, Forest, Linking, Node};
use crate::helping::HelpLink;
use crate::linking::{link_index_step, rank_link_step};
use crate::step::StepCtx;

use super::FindMachine;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RankStage {
    ReadR,
    ReadS,
    Act,
}

/// One link attempt.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LinkMachine {
    Index { u: Node, v: Node },
    Rank { u: Node, v: Node, r: u32, s: u32, pc: RankStage },
    Help(HelpLink),
}

impl LinkMachine {
    pub fn new(u: Node, v: Node, f: &Forest) -> Self {
        let cfg = f.config();
        match cfg.linking {
            Linking::Index => LinkMachine::Index { u, v },
            _ if cfg.helping() => LinkMachine::Help(HelpLink::new(u, v)),
            _ => LinkMachine::Rank { u, v, r: 0, s: 0, pc: RankStage::ReadR },
        }
    }

    /// Returns true on the step that ends the attempt.
    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> bool {
        match self {
            LinkMachine::Index { u, v } => {
                link_index_step(ctx, f, *u, *v);
                true
            }
            LinkMachine::Rank { u, v, r, s, pc } => match *pc {
                RankStage::ReadR => {
                    *r = ctx.read_word(f, *u).rank;
                    *pc = RankStage::ReadS;
                    false
                }
                RankStage::ReadS => {
                    *s = ctx.read_word(f, *v).rank;
                    *pc = RankStage::Act;
                    false
                }
                RankStage::Act => {
                    rank_link_step(ctx, f, *u, *v, *r, *s);
                    true
                }
            },
            LinkMachine::Help(h) => h.step(ctx, f),
        }
    }

    /// True before any access of this attempt has been made.
    pub fn is_fresh(&self) -> bool {
        match self {
            LinkMachine::Index { .. } => true,
            LinkMachine::Rank { pc, .. } => *pc == RankStage::ReadR,
            LinkMachine::Help(h) => h.is_fresh(),
        }
    }

    /// True when the next step is the attempt's atomic write.
    pub fn at_write(&self) -> bool {
        match self {
            LinkMachine::Index { .. } => true,
            LinkMachine::Rank { pc, .. } => *pc == RankStage::Act,
            LinkMachine::Help(h) => h.at_claim(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum UnitePc {
    FindU,
    FindV,
    Link,
}

/// `u = find(x); v = find(y); while u != v { link(u, v); u = find(u); v = find(v) }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniteMachine {
    u: Node,
    v: Node,
    pc: UnitePc,
    find: FindMachine,
    link: Option<LinkMachine>,
    compaction: Compaction,
}

impl UniteMachine {
    pub fn new(x: Node, y: Node, compaction: Compaction) -> Self {
        Self { u: x, v: y, pc: UnitePc::FindU, find: FindMachine::new(x, compaction), link: None, compaction }
    }

    /// Returns true on the step whose failing `u != v` test ends the loop.
    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> bool {
        match self.pc {
            UnitePc::FindU => {
                if let Some(r) = self.find.step(ctx, f) {
                    self.u = r;
                    self.find = FindMachine::new(self.v, self.compaction);
                    self.pc = UnitePc::FindV;
                }
            }
            UnitePc::FindV => {
                if let Some(r) = self.find.step(ctx, f) {
                    self.v = r;
                    if self.u == self.v {
                        return true;
                    }
                    f.note_link_attempt(ctx.proc);
                    self.link = Some(LinkMachine::new(self.u, self.v, f));
                    self.pc = UnitePc::Link;
                }
            }
            UnitePc::Link => {
                let link = self.link.as_mut().expect("link phase without a link");
                if link.step(ctx, f) {
                    self.link = None;
                    self.find = FindMachine::new(self.u, self.compaction);
                    self.pc = UnitePc::FindU;
                }
            }
        }
        false
    }

    /// Next step is the atomic write of a link attempt.
    pub fn poised_to_link(&self) -> bool {
        self.pc == UnitePc::Link && self.link.as_ref().is_some_and(|l| l.at_write())
    }

    /// Roots the current link attempt is working on.
    pub fn link_pair(&self) -> Option<(Node, Node)> {
        (self.pc == UnitePc::Link).then_some((self.u, self.v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SamePc {
    FindU,
    FindV,
    ReadW,
}

/// `u = find(x); v = find(y); while u != v { w = u.p; if u = w return false;
/// u = find(u); v = find(v) }; return true`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SameSetMachine {
    u: Node,
    v: Node,
    pc: SamePc,
    find: FindMachine,
    compaction: Compaction,
}

impl SameSetMachine {
    pub fn new(x: Node, y: Node, compaction: Compaction) -> Self {
        Self { u: x, v: y, pc: SamePc::FindU, find: FindMachine::new(x, compaction), compaction }
    }

    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> Option<bool> {
        match self.pc {
            SamePc::FindU => {
                if let Some(r) = self.find.step(ctx, f) {
                    self.u = r;
                    self.find = FindMachine::new(self.v, self.compaction);
                    self.pc = SamePc::FindV;
                }
            }
            SamePc::FindV => {
                if let Some(r) = self.find.step(ctx, f) {
                    self.v = r;
                    ctx.mark_lin = true;
                    if self.u == self.v {
                        return Some(true);
                    }
                    self.pc = SamePc::ReadW;
                }
            }
            SamePc::ReadW => {
                let w = ctx.read_parent(f, self.u);
                if w == self.u {
                    return Some(false);
                }
                self.find = FindMachine::new(self.u, self.compaction);
                self.pc = SamePc::FindU;
            }
        }
        None
    }
}
