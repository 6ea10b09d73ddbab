use crate::forest::{Compaction, Forest, Node};
use crate::step::{CasPurpose, StepCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pc {
    ReadV,
    ReadW,
    Cas1,
    ReReadV,
    ReReadW,
    Cas2,
}

/// Find with one of the four compaction rules.
///
/// Naive: `u = x; v = u.p; while v != u { u = v; v = u.p }; return u`, one
/// visit per read.
///
/// Splitting: `u = x; v = u.p; w = v.p; while v != w { CAS(u.p, v, w); ...;
/// u = v; v = u.p; w = v.p }; return v`, one visit per `(v, w)` pair.
/// Two-try re-reads `v, w` and CASes again before advancing; conditional
/// two-try does so only when the first CAS fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FindMachine {
    u: Node,
    v: Node,
    w: Node,
    pc: Pc,
    compaction: Compaction,
}

impl FindMachine {
    pub fn new(x: Node, compaction: Compaction) -> Self {
        Self { u: x, v: x, w: x, pc: Pc::ReadV, compaction }
    }

    pub fn step(&mut self, ctx: &mut StepCtx, f: &Forest) -> Option<Node> {
        match self.pc {
            Pc::ReadV if self.compaction == Compaction::Naive => {
                self.v = ctx.read_parent(f, self.u);
                ctx.visit(f);
                if self.v == self.u {
                    return Some(self.u);
                }
                self.u = self.v;
            }
            Pc::ReadV => {
                self.v = ctx.read_parent(f, self.u);
                self.pc = Pc::ReadW;
            }
            Pc::ReadW => {
                self.w = ctx.read_parent(f, self.v);
                ctx.visit(f);
                if self.v == self.w {
                    return Some(self.v);
                }
                self.pc = Pc::Cas1;
            }
            Pc::Cas1 => {
                let ok = ctx.cas_parent(f, self.u, self.v, self.w, CasPurpose::Compact);
                match self.compaction {
                    Compaction::TwoTry => self.pc = Pc::ReReadV,
                    Compaction::ConditionalTwoTry if !ok => self.pc = Pc::ReReadV,
                    _ => {
                        self.u = self.v;
                        self.pc = Pc::ReadV;
                    }
                }
            }
            Pc::ReReadV => {
                self.v = ctx.read_parent(f, self.u);
                self.pc = Pc::ReReadW;
            }
            Pc::ReReadW => {
                self.w = ctx.read_parent(f, self.v);
                self.pc = Pc::Cas2;
            }
            Pc::Cas2 => {
                ctx.cas_parent(f, self.u, self.v, self.w, CasPurpose::Compact);
                self.u = self.v;
                self.pc = Pc::ReadV;
            }
        }
        None
    }
}
