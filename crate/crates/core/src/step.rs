//! The single shared-memory access a machine performs per step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::forest::{Descriptor, Flag, Forest, Node, ProcId, RankWord};
use crate::rng::FlipSource;

/// Why a parent CAS was issued.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CasPurpose {
    Link,
    Compact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Access {
    ReadParent { node: Node, value: Node },
    ReadWord { node: Node, value: RankWord },
    CasParent { node: Node, expected: Node, new: Node, ok: bool, purpose: CasPurpose },
    CasWord { node: Node, expected: RankWord, new: RankWord, ok: bool },
    CasParentRank { node: Node, expected: (Node, u32), new: (Node, u32), ok: bool },
    Dcas { child: Node, parent: Node, rank: u32, ok: bool },
    WriteDesc { owner: ProcId, value: Descriptor },
    ReadDesc { owner: ProcId, value: Option<Descriptor> },
    CasDesc { owner: ProcId, expected: Descriptor, new: Descriptor, ok: bool },
}

impl Access {
    pub fn kind(&self) -> &'static str {
        match self {
            Access::ReadParent { .. } => "read-p",
            Access::ReadWord { .. } => "read-r",
            Access::CasParent { .. } => "cas-p",
            Access::CasWord { .. } => "cas-r",
            Access::CasParentRank { .. } => "cas-pr",
            Access::Dcas { .. } => "dcas",
            Access::WriteDesc { .. } => "write-d",
            Access::ReadDesc { .. } => "read-d",
            Access::CasDesc { .. } => "rcas-d",
        }
    }

    pub fn is_write_attempt(&self) -> bool {
        !matches!(self, Access::ReadParent { .. } | Access::ReadWord { .. } | Access::ReadDesc { .. })
    }
}

struct W(RankWord);

impl fmt::Display for W {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.0.role {
            crate::forest::ClaimRole::None => "-",
            crate::forest::ClaimRole::Child => "c",
            crate::forest::ClaimRole::Parent => "p",
        };
        write!(f, "{}/{}/{}", self.0.rank, self.0.proc.map_or(0, |p| p.get()), role)
    }
}

struct D(Option<Descriptor>);

impl fmt::Display for D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => write!(f, "empty"),
            Some(d) => {
                let flag = match d.flag {
                    Flag::Null => "null",
                    Flag::ParentChange => "pc",
                    Flag::RankBump => "rb",
                };
                write!(f, "{},{},{}", d.x, d.y, flag)
            }
        }
    }
}

fn outcome(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

/// `<kind> <node(s)> <expected> <new> <outcome>`; reads put the value read in
/// the outcome column.
impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.kind();
        match *self {
            Access::ReadParent { node, value } => write!(f, "{k} {node} - - {value}"),
            Access::ReadWord { node, value } => write!(f, "{k} {node} - - {}", W(value)),
            Access::CasParent { node, expected, new, ok, .. } => {
                write!(f, "{k} {node} {expected} {new} {}", outcome(ok))
            }
            Access::CasWord { node, expected, new, ok } => {
                write!(f, "{k} {node} {} {} {}", W(expected), W(new), outcome(ok))
            }
            Access::CasParentRank { node, expected, new, ok } => write!(
                f,
                "{k} {node} {},{} {},{} {}",
                expected.0,
                expected.1,
                new.0,
                new.1,
                outcome(ok)
            ),
            Access::Dcas { child, parent, rank, ok } => {
                write!(f, "{k} {child},{parent} {rank} {} {}", rank + 1, outcome(ok))
            }
            Access::WriteDesc { owner, value } => write!(f, "{k} {owner} - {} -", D(Some(value))),
            Access::ReadDesc { owner, value } => write!(f, "{k} {owner} - - {}", D(value)),
            Access::CasDesc { owner, expected, new, ok } => {
                write!(f, "{k} {owner} {} {} {}", D(Some(expected)), D(Some(new)), outcome(ok))
            }
        }
    }
}

/// Context of one step: who is stepping, their coin source, and what the step did.
pub struct StepCtx<'a> {
    pub proc: ProcId,
    pub flips: &'a mut FlipSource,
    pub access: Option<Access>,
    /// Set when a link CAS succeeds; names the process whose unite it completes.
    pub linked_for: Option<ProcId>,
    /// Find-loop iterations completed in this step.
    pub visits: u32,
    /// Set by same-set when it assigns `v`, its candidate linearization point.
    pub mark_lin: bool,
}

impl<'a> StepCtx<'a> {
    pub fn new(proc: ProcId, flips: &'a mut FlipSource) -> Self {
        Self { proc, flips, access: None, linked_for: None, visits: 0, mark_lin: false }
    }

    pub fn visit(&mut self, f: &Forest) {
        f.note_visit(self.proc);
        self.visits += 1;
    }

    fn record(&mut self, a: Access) {
        debug_assert!(self.access.is_none(), "two shared accesses in one step: {:?} then {a:?}", self.access);
        self.access = Some(a);
    }

    pub fn read_parent(&mut self, f: &Forest, node: Node) -> Node {
        let value = f.parent(node);
        self.record(Access::ReadParent { node, value });
        value
    }

    pub fn read_word(&mut self, f: &Forest, node: Node) -> RankWord {
        let value = f.rank_word(node);
        self.record(Access::ReadWord { node, value });
        value
    }

    pub fn cas_parent(&mut self, f: &Forest, node: Node, expected: Node, new: Node, purpose: CasPurpose) -> bool {
        let ok = f.cas_parent(node, expected, new, self.proc);
        self.record(Access::CasParent { node, expected, new, ok, purpose });
        ok
    }

    pub fn cas_word(&mut self, f: &Forest, node: Node, expected: RankWord, new: RankWord) -> bool {
        let ok = f.cas_rank_process(node, expected, new, self.proc);
        self.record(Access::CasWord { node, expected, new, ok });
        ok
    }

    pub fn cas_parent_rank(&mut self, f: &Forest, node: Node, expected: (Node, u32), new: (Node, u32)) -> bool {
        let ok = f.cas_parent_rank(node, expected, new, self.proc);
        self.record(Access::CasParentRank { node, expected, new, ok });
        ok
    }

    pub fn dcas(&mut self, f: &Forest, child: Node, parent: Node, rank: u32) -> bool {
        let ok = f.dcas_elink(child, parent, rank, self.proc);
        self.record(Access::Dcas { child, parent, rank, ok });
        ok
    }

    pub fn write_desc(&mut self, f: &Forest, value: Descriptor) {
        f.write_descriptor(self.proc, value);
        self.record(Access::WriteDesc { owner: self.proc, value });
    }

    pub fn read_desc(&mut self, f: &Forest, owner: ProcId) -> Option<Descriptor> {
        let value = f.descriptor(owner);
        self.record(Access::ReadDesc { owner, value });
        value
    }

    /// Randomized CAS on `owner`'s flag: if the descriptor still equals
    /// `expected` (flag null), a fresh coin decides the flag. Returns the
    /// descriptor as it stands after the step.
    pub fn rcas_flag(&mut self, f: &Forest, owner: ProcId, expected: Descriptor) -> Option<Descriptor> {
        let current = f.descriptor(owner);
        if current != Some(expected) {
            f.note_failed_cas(self.proc);
            let new = Descriptor { flag: Flag::ParentChange, ..expected };
            self.record(Access::CasDesc { owner, expected, new, ok: false });
            return current;
        }
        let flag = if self.flips.flip() { Flag::ParentChange } else { Flag::RankBump };
        let new = Descriptor { flag, ..expected };
        let r = f.cas_descriptor(owner, expected, new, self.proc);
        self.record(Access::CasDesc { owner, expected, new, ok: r.is_ok() });
        match r {
            Ok(()) => Some(new),
            Err(cur) => cur,
        }
    }
}
