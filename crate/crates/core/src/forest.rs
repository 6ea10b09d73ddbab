//! Node storage: parent cells, packed rank/claim words, per-process work
//! counters, helping descriptors and the union-forest shadow.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering::Relaxed, Ordering::SeqCst};

use crossbeam_utils::CachePadded;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Node = usize;

/// Largest supported element count. Descriptors pack two nodes into 31 bits each.
pub const MAX_NODES: usize = (1 << 31) - 1;
/// Largest supported process count.
pub const MAX_PROCS: usize = u16::MAX as usize;

const NO_PARENT: u64 = u64::MAX;

/// Process identifier, `1..=p`. Zero is reserved for "unclaimed".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProcId(u16);

impl ProcId {
    pub fn new(id: usize) -> Self {
        assert!((1..=MAX_PROCS).contains(&id), "process id {id} out of range");
        Self(id as u16)
    }

    /// Zero-based slot for per-process arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    fn from_raw(raw: u16) -> Option<Self> {
        (raw != 0).then_some(Self(raw))
    }
}

impl fmt::Display for ProcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linking {
    Index,
    RankDcas,
    RankRandomized,
}

impl Linking {
    pub fn uses_rank(self) -> bool {
        !matches!(self, Linking::Index)
    }

    pub fn name(self) -> &'static str {
        match self {
            Linking::Index => "index",
            Linking::RankDcas => "rank-dcas",
            Linking::RankRandomized => "rank-rand",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compaction {
    Naive,
    OneTry,
    TwoTry,
    ConditionalTwoTry,
}

impl Compaction {
    pub const ALL: [Compaction; 4] =
        [Compaction::Naive, Compaction::OneTry, Compaction::TwoTry, Compaction::ConditionalTwoTry];

    pub fn name(self) -> &'static str {
        match self {
            Compaction::Naive => "naive",
            Compaction::OneTry => "one",
            Compaction::TwoTry => "two",
            Compaction::ConditionalTwoTry => "cond-two",
        }
    }
}

impl Linking {
    pub const ALL: [Linking; 3] = [Linking::Index, Linking::RankDcas, Linking::RankRandomized];
}

/// How rank links touch memory. `Native` uses the simulator-atomic two-field
/// CAS and DCAS and is only sound when steps are serialized. `Helping` is the
/// CAS-only descriptor protocol and works under real threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Realization {
    Native,
    Helping,
}

/// Who chooses the flag of a randomized descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlagMode {
    /// The announcer flips the coin before claiming.
    Announcer,
    /// The flag is left null and the first helper resolves it with a randomized CAS.
    RandomizedCas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n: usize,
    pub procs: usize,
    pub linking: Linking,
    pub compaction: Compaction,
    pub realization: Realization,
    pub flag_mode: FlagMode,
    pub track_shadow: bool,
}

impl ForestConfig {
    pub fn new(n: usize, procs: usize, linking: Linking, compaction: Compaction) -> Self {
        Self {
            n,
            procs,
            linking,
            compaction,
            realization: Realization::Native,
            flag_mode: FlagMode::Announcer,
            track_shadow: true,
        }
    }

    pub fn with_realization(mut self, realization: Realization) -> Self {
        self.realization = realization;
        self
    }

    pub fn with_flag_mode(mut self, flag_mode: FlagMode) -> Self {
        self.flag_mode = flag_mode;
        self
    }

    pub fn with_shadow(mut self, on: bool) -> Self {
        self.track_shadow = on;
        self
    }

    /// Whether rank links go through descriptors and claims.
    pub fn helping(&self) -> bool {
        self.linking.uses_rank() && self.realization == Realization::Helping
    }

    /// Ranks never exceed `n - 1`.
    pub fn rank_cap(&self) -> u32 {
        (self.n - 1).min(u32::MAX as usize) as u32
    }
}

/// Role of a pending claim on a rank word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClaimRole {
    None,
    Child,
    Parent,
}

/// Packed rank word: rank in bits 0..32, claiming process in 32..48, claim
/// role in 48..50.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankWord {
    pub rank: u32,
    pub proc: Option<ProcId>,
    pub role: ClaimRole,
}

impl RankWord {
    pub const ZERO: RankWord = RankWord { rank: 0, proc: None, role: ClaimRole::None };

    pub fn free(rank: u32) -> Self {
        Self { rank, proc: None, role: ClaimRole::None }
    }

    pub fn claimed(rank: u32, proc: ProcId, role: ClaimRole) -> Self {
        Self { rank, proc: Some(proc), role }
    }

    pub fn is_free(&self) -> bool {
        self.proc.is_none()
    }

    pub fn pack(self) -> u64 {
        let role = match self.role {
            ClaimRole::None => 0u64,
            ClaimRole::Child => 1,
            ClaimRole::Parent => 2,
        };
        self.rank as u64 | (self.proc.map_or(0, |p| p.0) as u64) << 32 | role << 48
    }

    pub fn unpack(word: u64) -> Self {
        let role = match (word >> 48) & 3 {
            0 => ClaimRole::None,
            1 => ClaimRole::Child,
            2 => ClaimRole::Parent,
            r => panic!("corrupt claim role {r}"),
        };
        Self { rank: word as u32, proc: ProcId::from_raw((word >> 32) as u16), role }
    }
}

/// Descriptor flag of the randomized helping variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flag {
    Null,
    ParentChange,
    RankBump,
}

/// Packed per-process descriptor: `x` in bits 0..31, `y` in 31..62, flag in 62..64.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Descriptor {
    pub x: Node,
    pub y: Node,
    pub flag: Flag,
}

impl Descriptor {
    const MASK: u64 = (1 << 31) - 1;
    /// The all-ones node fields mark an empty descriptor.
    pub const EMPTY: u64 = u64::MAX >> 2;

    pub fn pack(self) -> u64 {
        let flag = match self.flag {
            Flag::Null => 0u64,
            Flag::ParentChange => 1,
            Flag::RankBump => 2,
        };
        self.x as u64 | (self.y as u64) << 31 | flag << 62
    }

    pub fn unpack(word: u64) -> Option<Self> {
        if word == Self::EMPTY {
            return None;
        }
        let flag = match word >> 62 {
            0 => Flag::Null,
            1 => Flag::ParentChange,
            _ => Flag::RankBump,
        };
        Some(Self { x: (word & Self::MASK) as Node, y: ((word >> 31) & Self::MASK) as Node, flag })
    }
}

/// Work counters of one process. Each slot is written only by its own process.
#[derive(Debug, Default)]
pub struct ProcCounters {
    visits: AtomicU64,
    link_attempts: AtomicU64,
    cas_attempts: AtomicU64,
    cas_failures: AtomicU64,
    help_steps: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkCounters {
    pub visits: u64,
    pub link_attempts: u64,
    pub cas_attempts: u64,
    pub cas_failures: u64,
    pub help_steps: u64,
}

impl WorkCounters {
    /// Visits plus link attempts.
    pub fn work(&self) -> u64 {
        self.visits + self.link_attempts
    }
}

impl std::ops::Add for WorkCounters {
    type Output = WorkCounters;
    fn add(self, o: Self) -> Self {
        WorkCounters {
            visits: self.visits + o.visits,
            link_attempts: self.link_attempts + o.link_attempts,
            cas_attempts: self.cas_attempts + o.cas_attempts,
            cas_failures: self.cas_failures + o.cas_failures,
            help_steps: self.help_steps + o.help_steps,
        }
    }
}

fn bump(c: &AtomicU64) {
    c.store(c.load(Relaxed) + 1, Relaxed);
}

impl ProcCounters {
    fn read(&self) -> WorkCounters {
        WorkCounters {
            visits: self.visits.load(Relaxed),
            link_attempts: self.link_attempts.load(Relaxed),
            cas_attempts: self.cas_attempts.load(Relaxed),
            cas_failures: self.cas_failures.load(Relaxed),
            help_steps: self.help_steps.load(Relaxed),
        }
    }

    fn set(&self, w: WorkCounters) {
        self.visits.store(w.visits, Relaxed);
        self.link_attempts.store(w.link_attempts, Relaxed);
        self.cas_attempts.store(w.cas_attempts, Relaxed);
        self.cas_failures.store(w.cas_failures, Relaxed);
        self.help_steps.store(w.help_steps, Relaxed);
    }
}

/// Quiescent copy of the forest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub parents: Vec<Node>,
    pub ranks: Vec<u32>,
}

impl Snapshot {
    pub fn singletons(n: usize) -> Self {
        Self { parents: (0..n).collect(), ranks: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    /// Root of `x`, or `None` if a cycle or out-of-range parent is met.
    pub fn root(&self, x: Node) -> Option<Node> {
        let mut u = x;
        for _ in 0..=self.n() {
            let v = *self.parents.get(u)?;
            if v == u {
                return Some(u);
            }
            u = v;
        }
        None
    }

    /// Number of edges from `x` to its root.
    pub fn depth(&self, x: Node) -> Option<usize> {
        let mut u = x;
        for d in 0..=self.n() {
            let v = *self.parents.get(u)?;
            if v == u {
                return Some(d);
            }
            u = v;
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        (0..self.n()).all(|x| self.root(x).is_some())
    }

    pub fn height(&self) -> usize {
        (0..self.n()).filter_map(|x| self.depth(x)).max().unwrap_or(0)
    }

    pub fn roots(&self) -> Vec<Node> {
        (0..self.n()).filter(|&x| self.parents[x] == x).collect()
    }

    pub fn set_count(&self) -> usize {
        self.roots().len()
    }

    pub fn max_rank(&self) -> u32 {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    pub fn rank_sum(&self) -> u64 {
        self.ranks.iter().map(|&r| r as u64).sum()
    }

    /// Checks the parent ordering required by `linking` on every non-root.
    pub fn check_monotone(&self, linking: Linking) -> std::result::Result<(), Node> {
        for x in 0..self.n() {
            let p = self.parents[x];
            if p == x {
                continue;
            }
            let ok = match linking {
                Linking::Index => p > x,
                Linking::RankDcas => self.ranks[p] > self.ranks[x],
                Linking::RankRandomized => (self.ranks[p], p) > (self.ranks[x], x),
            };
            if !ok {
                return Err(x);
            }
        }
        Ok(())
    }
}

/// The shared structure: one parent cell and one rank word per node.
pub struct Forest {
    config: ForestConfig,
    parents: Box<[AtomicU64]>,
    words: Box<[AtomicU64]>,
    descriptors: Box<[CachePadded<AtomicU64>]>,
    shadow: Option<Box<[AtomicU64]>>,
    counters: Box<[CachePadded<ProcCounters>]>,
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forest").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Clone for Forest {
    fn clone(&self) -> Self {
        let copy = |cells: &[AtomicU64]| cells.iter().map(|c| AtomicU64::new(c.load(SeqCst))).collect();
        Self {
            config: self.config,
            parents: copy(&self.parents),
            words: copy(&self.words),
            descriptors: self.descriptors.iter().map(|d| CachePadded::new(AtomicU64::new(d.load(SeqCst)))).collect(),
            shadow: self.shadow.as_deref().map(copy),
            counters: self
                .counters
                .iter()
                .map(|c| {
                    let fresh = CachePadded::new(ProcCounters::default());
                    fresh.set(c.read());
                    fresh
                })
                .collect(),
        }
    }
}

impl Forest {
    pub fn new(config: ForestConfig) -> Result<Self> {
        if config.n == 0 || config.n > MAX_NODES {
            return Err(Error::InvalidSize(format!("n = {} must be in 1..={MAX_NODES}", config.n)));
        }
        if config.procs == 0 || config.procs > MAX_PROCS {
            return Err(Error::InvalidSize(format!("p = {} must be in 1..={MAX_PROCS}", config.procs)));
        }
        let n = config.n;
        Ok(Self {
            config,
            parents: (0..n).map(|i| AtomicU64::new(i as u64)).collect(),
            words: (0..n).map(|_| AtomicU64::new(0)).collect(),
            descriptors: (0..config.procs).map(|_| CachePadded::new(AtomicU64::new(Descriptor::EMPTY))).collect(),
            shadow: config.track_shadow.then(|| (0..n).map(|_| AtomicU64::new(NO_PARENT)).collect()),
            counters: (0..config.procs).map(|_| CachePadded::new(ProcCounters::default())).collect(),
        })
    }

    /// Builds a forest whose cells hold the given parents and ranks.
    pub fn from_snapshot(config: ForestConfig, snap: &Snapshot) -> Result<Self> {
        if snap.n() != config.n || snap.ranks.len() != config.n {
            return Err(Error::InvalidSize(format!("snapshot has {} nodes, config {}", snap.n(), config.n)));
        }
        if let Some(&bad) = snap.parents.iter().find(|&&p| p >= config.n) {
            return Err(Error::NodeOutOfRange { node: bad, n: config.n });
        }
        let f = Self::new(config)?;
        for x in 0..config.n {
            f.parents[x].store(snap.parents[x] as u64, SeqCst);
            f.words[x].store(RankWord::free(snap.ranks[x]).pack(), SeqCst);
            if let Some(sh) = &f.shadow {
                if snap.parents[x] != x {
                    sh[x].store(snap.parents[x] as u64, SeqCst);
                }
            }
        }
        Ok(f)
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn procs(&self) -> usize {
        self.config.procs
    }

    pub fn check_node(&self, x: Node) -> Result<()> {
        if x < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: x, n: self.n() })
        }
    }

    pub fn parent(&self, x: Node) -> Node {
        self.parents[x].load(SeqCst) as Node
    }

    pub fn rank_word(&self, x: Node) -> RankWord {
        RankWord::unpack(self.words[x].load(SeqCst))
    }

    pub fn rank(&self, x: Node) -> u32 {
        self.rank_word(x).rank
    }

    /// Counts a CAS that failed without touching memory.
    pub fn note_failed_cas(&self, proc: ProcId) {
        self.record_cas(proc, false);
    }

    fn record_cas(&self, proc: ProcId, ok: bool) {
        let c = &self.counters[proc.index()];
        bump(&c.cas_attempts);
        if !ok {
            bump(&c.cas_failures);
        }
    }

    fn record_first_parent(&self, x: Node, new: Node) {
        if let Some(sh) = &self.shadow {
            let prev = sh[x].swap(new as u64, SeqCst);
            debug_assert_eq!(prev, NO_PARENT, "node {x} left the root state twice");
        }
    }

    /// `CAS(x.p, expected, new)`.
    pub fn cas_parent(&self, x: Node, expected: Node, new: Node, proc: ProcId) -> bool {
        let ok = self.parents[x].compare_exchange(expected as u64, new as u64, SeqCst, SeqCst).is_ok();
        self.record_cas(proc, ok);
        if ok && expected == x && new != x {
            self.record_first_parent(x, new);
        }
        ok
    }

    /// CAS on the packed (rank, process, role) word.
    pub fn cas_rank_process(&self, x: Node, expected: RankWord, new: RankWord, proc: ProcId) -> bool {
        assert!(new.rank >= expected.rank, "rank of node {x} would decrease");
        assert!(new.rank <= self.config.rank_cap(), "rank of node {x} above cap");
        let ok = self.words[x].compare_exchange(expected.pack(), new.pack(), SeqCst, SeqCst).is_ok();
        self.record_cas(proc, ok);
        ok
    }

    /// Two-field CAS `CAS((x.p, x.r), (ep, er), (np, nr))`. Only atomic when
    /// steps are serialized, as in the simulator.
    pub fn cas_parent_rank(&self, x: Node, expected: (Node, u32), new: (Node, u32), proc: ProcId) -> bool {
        let ok = self.parent(x) == expected.0 && self.rank_word(x) == RankWord::free(expected.1);
        self.record_cas(proc, ok);
        if ok {
            assert!(new.1 >= expected.1 && new.1 <= self.config.rank_cap());
            self.parents[x].store(new.0 as u64, SeqCst);
            self.words[x].store(RankWord::free(new.1).pack(), SeqCst);
            if expected.0 == x && new.0 != x {
                self.record_first_parent(x, new.0);
            }
        }
        ok
    }

    /// `DCAS((u.p, u.r), (u, r), (v, r), (v.p, v.r), (v, r), (v, r + 1))`.
    /// Only atomic when steps are serialized.
    pub fn dcas_elink(&self, u: Node, v: Node, r: u32, proc: ProcId) -> bool {
        let free = RankWord::free(r);
        let ok = u != v
            && self.parent(u) == u
            && self.rank_word(u) == free
            && self.parent(v) == v
            && self.rank_word(v) == free
            && r < self.config.rank_cap();
        self.record_cas(proc, ok);
        if ok {
            self.parents[u].store(v as u64, SeqCst);
            self.words[v].store(RankWord::free(r + 1).pack(), SeqCst);
            self.record_first_parent(u, v);
        }
        ok
    }

    pub fn descriptor(&self, proc: ProcId) -> Option<Descriptor> {
        Descriptor::unpack(self.descriptors[proc.index()].load(SeqCst))
    }

    pub fn write_descriptor(&self, proc: ProcId, d: Descriptor) {
        self.descriptors[proc.index()].store(d.pack(), SeqCst);
    }

    /// CAS on `owner`'s descriptor word. On failure returns the current value.
    pub fn cas_descriptor(
        &self,
        owner: ProcId,
        expected: Descriptor,
        new: Descriptor,
        proc: ProcId,
    ) -> std::result::Result<(), Option<Descriptor>> {
        let r = self.descriptors[owner.index()].compare_exchange(expected.pack(), new.pack(), SeqCst, SeqCst);
        self.record_cas(proc, r.is_ok());
        r.map(|_| ()).map_err(Descriptor::unpack)
    }

    /// First non-self parent ever installed at `x`.
    pub fn first_parent(&self, x: Node) -> Option<Node> {
        let sh = self.shadow.as_ref()?;
        let v = sh[x].load(SeqCst);
        (v != NO_PARENT).then_some(v as Node)
    }

    pub fn shadow_enabled(&self) -> bool {
        self.shadow.is_some()
    }

    /// Whether `anc` is a proper ancestor of `x` in the union forest.
    pub fn is_union_ancestor(&self, x: Node, anc: Node) -> bool {
        let mut u = x;
        for _ in 0..self.n() {
            match self.first_parent(u) {
                Some(p) if p == anc => return true,
                Some(p) => u = p,
                None => return false,
            }
        }
        false
    }

    pub fn note_visit(&self, proc: ProcId) {
        bump(&self.counters[proc.index()].visits);
    }

    pub fn note_link_attempt(&self, proc: ProcId) {
        bump(&self.counters[proc.index()].link_attempts);
    }

    pub fn note_help_step(&self, proc: ProcId) {
        bump(&self.counters[proc.index()].help_steps);
    }

    pub fn counters(&self, proc: ProcId) -> WorkCounters {
        self.counters[proc.index()].read()
    }

    pub fn total_counters(&self) -> WorkCounters {
        self.counters.iter().map(|c| c.read()).fold(WorkCounters::default(), |a, b| a + b)
    }

    pub fn reset_counters(&self) {
        for c in self.counters.iter() {
            c.set(WorkCounters::default());
        }
    }

    /// Copy of parents and ranks. The caller guarantees quiescence.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            parents: self.parents.iter().map(|p| p.load(SeqCst) as Node).collect(),
            ranks: self.words.iter().map(|w| RankWord::unpack(w.load(SeqCst)).rank).collect(),
        }
    }

    /// Raw words that make up the shared state, for state hashing.
    pub fn raw_state(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(2 * self.n() + self.procs());
        out.extend(self.parents.iter().map(|p| p.load(SeqCst)));
        out.extend(self.words.iter().map(|w| w.load(SeqCst)));
        out.extend(self.descriptors.iter().map(|d| d.load(SeqCst)));
        out
    }

    /// Checks that every nonzero claim agrees with its owner's descriptor.
    pub fn check_claims(&self) -> std::result::Result<(), String> {
        for x in 0..self.n() {
            let w = self.rank_word(x);
            let Some(q) = w.proc else { continue };
            if q.get() > self.procs() {
                return Err(format!("node {x} claimed by unknown process {q}"));
            }
            if self.parent(x) != x {
                // stale child claims stay on linked nodes
                continue;
            }
            let ok = match (w.role, self.descriptor(q)) {
                (ClaimRole::Child, Some(d)) => d.x == x,
                (ClaimRole::Parent, Some(d)) => d.y == x,
                _ => false,
            };
            if !ok {
                return Err(format!("claim of process {q} on root {x} does not match its descriptor"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn forest(n: usize, linking: Linking) -> Forest {
        Forest::new(ForestConfig::new(n, 2, linking, Compaction::Naive)).unwrap()
    }

    #[test]
    fn fresh_forest_is_singletons() {
        let f = forest(1, Linking::Index);
        assert_eq!(f.parent(0), 0);
        let f = Forest::new(ForestConfig::new(8, 1, Linking::RankDcas, Compaction::TwoTry)).unwrap();
        let s = f.snapshot();
        assert_eq!(s, Snapshot::singletons(8));
        assert_eq!(s.set_count(), 8);
        assert_eq!(f.total_counters(), WorkCounters::default());
        assert!((0..8).all(|x| f.first_parent(x).is_none()));
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(Forest::new(ForestConfig::new(0, 1, Linking::Index, Compaction::Naive)), Err(Error::InvalidSize(_))));
        assert!(Forest::new(ForestConfig::new(4, 0, Linking::Index, Compaction::Naive)).is_err());
    }

    #[test]
    fn cas_parent_and_shadow() {
        let f = forest(4, Linking::Index);
        let p = ProcId::new(1);
        assert!(f.cas_parent(1, 1, 3, p));
        assert_eq!(f.parent(1), 3);
        assert!(!f.cas_parent(1, 1, 2, p));
        assert_eq!(f.first_parent(1), Some(3));
        assert!(f.cas_parent(1, 3, 3, p));
        assert_eq!(f.counters(p), WorkCounters { cas_attempts: 3, cas_failures: 1, ..Default::default() });
        let s = f.snapshot();
        assert_eq!(s.parents.iter().enumerate().filter(|&(i, &q)| i != q).count(), 1);
        assert_eq!(f.snapshot(), s);
    }

    #[test]
    fn rank_word_cas() {
        let f = forest(4, Linking::RankDcas);
        let p = ProcId::new(2);
        assert!(f.cas_rank_process(0, RankWord::ZERO, RankWord::free(1), p));
        assert_eq!(f.rank(0), 1);
        assert!(!f.cas_rank_process(0, RankWord::ZERO, RankWord::free(2), p));
        assert_eq!(f.rank(0), 1);
    }

    #[test]
    #[should_panic(expected = "would decrease")]
    fn rank_decrease_panics() {
        let f = forest(4, Linking::RankDcas);
        let p = ProcId::new(1);
        f.cas_rank_process(0, RankWord::ZERO, RankWord::free(2), p);
        f.cas_rank_process(0, RankWord::free(2), RankWord::free(1), p);
    }

    #[test]
    fn dcas_is_all_or_nothing() {
        let f = forest(4, Linking::RankDcas);
        let p = ProcId::new(1);
        assert!(f.dcas_elink(0, 1, 0, p));
        assert_eq!((f.parent(0), f.rank(1)), (1, 1));
        assert!(!f.dcas_elink(2, 1, 0, p));
        assert_eq!((f.parent(2), f.rank(1)), (2, 1));
    }

    #[test]
    fn union_ancestry() {
        let f = forest(4, Linking::Index);
        let p = ProcId::new(1);
        f.cas_parent(0, 0, 1, p);
        f.cas_parent(1, 1, 3, p);
        assert!(f.is_union_ancestor(0, 3));
        assert!(!f.is_union_ancestor(3, 0));
        assert!(!f.is_union_ancestor(0, 2));
    }

    #[test]
    fn monotone_checks() {
        let s = Snapshot { parents: vec![1, 1, 1], ranks: vec![0, 1, 2] };
        assert_eq!(s.check_monotone(Linking::Index), Err(2));
        assert_eq!(s.check_monotone(Linking::RankDcas), Err(2));
        assert_eq!(s.check_monotone(Linking::RankRandomized), Err(2));
        let s = Snapshot { parents: vec![1, 1], ranks: vec![0, 0] };
        assert!(s.check_monotone(Linking::Index).is_ok());
        assert!(s.check_monotone(Linking::RankDcas).is_err());
        assert!(s.check_monotone(Linking::RankRandomized).is_ok());
    }

    proptest! {
        #[test]
        fn rank_word_roundtrip(rank in any::<u32>(), proc in any::<u16>(), role in 0u8..3) {
            let role = [ClaimRole::None, ClaimRole::Child, ClaimRole::Parent][role as usize];
            let w = RankWord { rank, proc: ProcId::from_raw(proc), role };
            prop_assert_eq!(RankWord::unpack(w.pack()), w);
        }

        #[test]
        fn descriptor_roundtrip(x in 0usize..MAX_NODES, y in 0usize..MAX_NODES, f in 0u8..3) {
            let flag = [Flag::Null, Flag::ParentChange, Flag::RankBump][f as usize];
            let d = Descriptor { x, y, flag };
            prop_assert_eq!(Descriptor::unpack(d.pack()), Some(d));
        }
    }
}
