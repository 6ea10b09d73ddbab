//! Scripted constructions and adversarial schedules for the lower-bound
//! arguments: binomial trees, refined random-index trees, the wake-up
//! reduction, the √p path adversary and the shadowed-find lower bound.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{Linking, Node, ProcId, Snapshot};
use crate::ops::{Answer, Op};

use super::{Policy, SimRun};

const BUILDER: usize = 1;

fn builder() -> ProcId {
    ProcId::new(BUILDER)
}

fn check_idle(run: &SimRun) -> Result<()> {
    if run.all_done() {
        Ok(())
    } else {
        Err(Error::Precondition("scenario needs every process idle".into()))
    }
}

fn check_k(run: &SimRun, k: usize) -> Result<()> {
    if k == 0 || k > run.forest().n() {
        return Err(Error::InvalidSize(format!("k = {k} must lie in 1..={}", run.forest().n())));
    }
    Ok(())
}

fn unite_now(run: &mut SimRun, x: Node, y: Node) -> Result<()> {
    run.enqueue(builder(), [Op::Unite(x, y)])?;
    run.run_op(builder())?;
    Ok(())
}

/// Result of [`build_binomial_tree`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialBuild {
    pub root: Node,
    /// Unites in the order they ran.
    pub pairs: Vec<(Node, Node)>,
    pub rounds: u32,
}

/// Builds a binomial tree on nodes `0..k`; see [`build_binomial_tree_on`].
pub fn build_binomial_tree(run: &mut SimRun, k: usize) -> Result<BinomialBuild> {
    check_k(run, k)?;
    let nodes: Vec<Node> = (0..k).collect();
    build_binomial_tree_on(run, &nodes)
}

/// Unites the roots of `nodes` pairwise in `⌊lg k⌋` rounds, each round
/// finishing before the next starts, then unites every node beyond the
/// largest power of two with the root. Runs on process 1.
pub fn build_binomial_tree_on(run: &mut SimRun, nodes: &[Node]) -> Result<BinomialBuild> {
    check_idle(run)?;
    if !run.forest().config().linking.uses_rank() {
        return Err(Error::Precondition("binomial trees need a rank linking".into()));
    }
    check_k(run, nodes.len())?;
    for &x in nodes {
        run.forest().check_node(x)?;
    }
    let kk = 1usize << nodes.len().ilog2();
    let mut pairs = Vec::with_capacity(nodes.len() - 1);
    let mut cur: Vec<Node> = nodes[..kk].to_vec();
    let mut rounds = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() / 2);
        for c in cur.chunks(2) {
            unite_now(run, c[0], c[1])?;
            pairs.push((c[0], c[1]));
            next.push(run.root_of(c[0]));
        }
        cur = next;
        rounds += 1;
    }
    let root = cur[0];
    for &x in &nodes[kk..] {
        unite_now(run, x, root)?;
        pairs.push((x, root));
    }
    Ok(BinomialBuild { root: run.root_of(root), pairs, rounds })
}

/// Result of [`build_random_index_tree`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomIndexBuild {
    pub root: Node,
    pub nodes: Vec<Node>,
    /// Designated nodes at the start of each round, and after the last.
    pub designated: Vec<Vec<Node>>,
    /// Mean depth over the tree's nodes after each round.
    pub mean_depths: Vec<f64>,
}

fn mean_depth(s: &Snapshot, nodes: &[Node]) -> f64 {
    let total: usize = nodes.iter().map(|&x| s.depth(x).expect("acyclic")).sum();
    total as f64 / nodes.len() as f64
}

/// Builds a tree on `k` nodes drawn at random from the forest, so their
/// relative index order is a uniform permutation. Each round unites the
/// designated nodes of paired trees; the refined designated node is the one
/// that ends up as the root. Runs on process 1.
pub fn build_random_index_tree(run: &mut SimRun, k: usize, rng: &mut impl Rng) -> Result<RandomIndexBuild> {
    check_k(run, k)?;
    let mut all: Vec<Node> = (0..run.forest().n()).collect();
    all.shuffle(rng);
    all.truncate(k);
    build_random_index_tree_on(run, &all)
}

/// [`build_random_index_tree`] over the given nodes in the given order.
pub fn build_random_index_tree_on(run: &mut SimRun, nodes: &[Node]) -> Result<RandomIndexBuild> {
    check_idle(run)?;
    if run.forest().config().linking != Linking::Index {
        return Err(Error::Precondition("random-index trees need index linking".into()));
    }
    check_k(run, nodes.len())?;
    for &x in nodes {
        run.forest().check_node(x)?;
    }
    let kk = 1usize << nodes.len().ilog2();
    let members = &nodes[..kk];
    let mut cur = members.to_vec();
    let mut designated = vec![cur.clone()];
    let mut mean_depths = Vec::new();
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() / 2);
        for c in cur.chunks(2) {
            unite_now(run, c[0], c[1])?;
            next.push(run.root_of(c[0]));
        }
        cur = next;
        designated.push(cur.clone());
        mean_depths.push(mean_depth(&run.snapshot(), members));
    }
    Ok(RandomIndexBuild { root: cur[0], nodes: members.to_vec(), designated, mean_depths })
}

/// Outcome of the wake-up reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WakeupReport {
    /// Whether `x = y` for processes `1..=k`.
    pub returns: Vec<bool>,
    /// At least one process returned true.
    pub some_true: bool,
    /// Every process returning true did so after all processes had taken a step.
    pub true_after_all_woke: bool,
}

/// Process `j` in `1..=k` runs `Unite(j-1, j); x = Find(0); y = Find(k)` and
/// returns `x = y`. The processes are driven by `policy`.
pub fn scenario_wakeup(run: &mut SimRun, k: usize, policy: &mut Policy) -> Result<WakeupReport> {
    check_idle(run)?;
    if k == 0 || k > run.procs() || k >= run.forest().n() {
        return Err(Error::InvalidConfig(format!(
            "wake-up needs 1 <= k <= min(n - 1, p), got k = {k}, n = {}, p = {}",
            run.forest().n(),
            run.procs()
        )));
    }
    for j in 1..=k {
        run.enqueue(ProcId::new(j), [Op::Unite(j - 1, j), Op::Find(0), Op::Find(k)])?;
    }
    let start = run.records().len();
    run.run_policy(policy)?;
    let records = &run.records()[start..];
    let mut returns = Vec::with_capacity(k);
    let mut true_after_all_woke = true;
    let last_wake = (1..=k).filter_map(|j| run.first_step(ProcId::new(j))).max().unwrap_or(0);
    for j in 1..=k {
        let mine: Vec<_> = records.iter().filter(|r| r.proc.get() == j).collect();
        let root = |i: usize| match mine.get(i).map(|r| r.answer) {
            Some(Answer::Root(x)) => Ok(x),
            other => Err(Error::Invariant { step: run.step_index(), what: format!("process {j} answered {other:?}") }),
        };
        let same = root(1)? == root(2)?;
        if same && mine[2].response < last_wake {
            true_after_all_woke = false;
        }
        returns.push(same);
    }
    Ok(WakeupReport { some_true: returns.iter().any(|&b| b), returns, true_after_all_woke })
}

/// Measurements of a find-heavy scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkReport {
    pub n: usize,
    pub p: usize,
    /// Operations the bound is stated for.
    pub m: usize,
    pub groups: usize,
    pub group_size: usize,
    pub finds: usize,
    /// Visits made by the measured finds.
    pub find_visits: u64,
    /// Mean depth of the find targets when the finds started.
    pub mean_find_depth: f64,
    pub max_find_depth: usize,
    /// Largest node depth in any group's tree when its finds started.
    pub max_group_depth: usize,
    /// Theoretical lower bound the visits are compared with (0 if none).
    pub bound: f64,
    /// `find_visits / bound`, or 0 when the bound is 0.
    pub ratio: f64,
}

impl WorkReport {
    pub fn mean_find_visits(&self) -> f64 {
        if self.finds == 0 {
            0.0
        } else {
            self.find_visits as f64 / self.finds as f64
        }
    }
}

/// Runs queued finds of `procs` in lock-step; returns the visits they made.
fn lockstep_finds(run: &mut SimRun, procs: &[ProcId]) -> Result<u64> {
    let start = run.records().len();
    let mut policy = Policy::lock_step(procs.to_vec());
    while let Some(q) = policy.next(run) {
        run.step(q)?;
    }
    Ok(run.records()[start..].iter().filter(|r| matches!(r.op, Op::Find(_))).map(|r| r.visits).sum())
}

/// The √p path construction with index linking.
///
/// Nodes are split into `⌊n/s⌋` random groups of `s = ⌊√p⌋`. For each group,
/// processes `1..=p/2` unite all pairs of the group, one pair each (cycling),
/// and the remaining processes find a random group node each.
///
/// With `adversary` the scheduler reads the CAS arguments: every unite is run
/// to its link CAS, then the CASes of index-adjacent pairs fire first so the
/// group becomes a path; the finds then run in lock-step before the unites
/// finish. Without it, the unites run to completion one by one in an order
/// fixed before any index is seen, followed by the lock-step finds.
pub fn scenario_sqrt_p_path(run: &mut SimRun, adversary: bool, seed: u64) -> Result<WorkReport> {
    check_idle(run)?;
    if run.forest().config().linking != Linking::Index {
        return Err(Error::Precondition("the path scenario needs index linking".into()));
    }
    let p = run.procs();
    let n = run.forest().n();
    let s = (p as f64).sqrt().floor() as usize;
    if p < 4 || s > n {
        return Err(Error::InvalidConfig(format!("need p >= 4 and sqrt p <= n, got p = {p}, n = {n}")));
    }
    let groups = n / s;
    let uniters: Vec<ProcId> = (1..=p / 2).map(ProcId::new).collect();
    let finders: Vec<ProcId> = (p / 2 + 1..=p).map(ProcId::new).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<Node> = (0..n).collect();
    all.shuffle(&mut rng);

    let mut find_visits = 0u64;
    let mut depth_sum = 0usize;
    let mut max_find_depth = 0usize;
    let mut max_group_depth = 0usize;
    for g in 0..groups {
        let group = &all[g * s..(g + 1) * s];
        let mut pairs = Vec::new();
        for i in 0..s {
            for j in i + 1..s {
                pairs.push((group[i], group[j]));
            }
        }
        for (i, &q) in uniters.iter().enumerate() {
            let (x, y) = pairs[i % pairs.len()];
            run.enqueue(q, [Op::Unite(x, y)])?;
        }
        let targets: Vec<Node> = finders.iter().map(|_| group[rng.gen_range(0..s)]).collect();

        if adversary {
            for &q in &uniters {
                while !run.poised_to_link(q) {
                    run.step(q)?;
                }
            }
            let mut sorted = group.to_vec();
            sorted.sort_unstable();
            let mut fired = vec![false; uniters.len()];
            for w in sorted.windows(2) {
                let want = (w[0], w[1]);
                let slot = uniters.iter().enumerate().position(|(i, &q)| {
                    !fired[i]
                        && matches!(run.current_op(q), Some(Op::Unite(x, y)) if (x.min(y), x.max(y)) == want)
                });
                let i = slot.ok_or_else(|| Error::Invariant {
                    step: run.step_index(),
                    what: format!("no unite poised on {want:?}"),
                })?;
                run.step(uniters[i])?;
                fired[i] = true;
            }
            for (i, &q) in uniters.iter().enumerate() {
                if !fired[i] {
                    run.step(q)?;
                }
            }
        } else {
            let mut order = uniters.clone();
            order.shuffle(&mut rng);
            for q in order {
                run.run_op(q)?;
            }
        }

        let snap = run.snapshot();
        for &x in group {
            max_group_depth = max_group_depth.max(snap.depth(x).expect("acyclic"));
        }
        for &x in &targets {
            let d = snap.depth(x).expect("acyclic");
            depth_sum += d;
            max_find_depth = max_find_depth.max(d);
        }
        for (&q, &x) in finders.iter().zip(&targets) {
            run.enqueue(q, [Op::Find(x)])?;
        }
        find_visits += lockstep_finds(run, &finders)?;
        run.run_policy(&mut Policy::round_robin())?;
    }
    let finds = groups * finders.len();
    let mean = if finds == 0 { 0.0 } else { depth_sum as f64 / finds as f64 };
    Ok(WorkReport {
        n,
        p,
        m: groups * p,
        groups,
        group_size: s,
        finds,
        find_visits,
        mean_find_depth: mean,
        max_find_depth,
        max_group_depth,
        bound: 0.0,
        ratio: 0.0,
    })
}

/// `m · lg(np/m + 1)`.
pub fn log_lower_bound(n: usize, p: usize, m: usize) -> f64 {
    m as f64 * ((n * p) as f64 / m as f64 + 1.0).log2()
}

/// Shadowed finds up deep trees.
///
/// The nodes are split into `g = ⌊m/p⌋` groups of `⌊n/g⌋`. Each group is
/// built into a binomial tree (rank linkings) or a refined random-index tree
/// (index linking) by process 1. Then all `p` processes find the group's
/// deepest node (a random node under index linking) in lock-step. The visits
/// of those `g·p` finds are compared with `g·p · lg(np/m + 1)`.
/// With `m ≥ np` there are no groups and the report is empty.
pub fn scenario_log_lowerbound(run: &mut SimRun, m: usize, seed: u64) -> Result<WorkReport> {
    check_idle(run)?;
    let p = run.procs();
    let n = run.forest().n();
    if m < p {
        return Err(Error::InvalidConfig(format!("need m >= p, got m = {m}, p = {p}")));
    }
    let empty = WorkReport {
        n,
        p,
        m,
        groups: 0,
        group_size: 0,
        finds: 0,
        find_visits: 0,
        mean_find_depth: 0.0,
        max_find_depth: 0,
        max_group_depth: 0,
        bound: 0.0,
        ratio: 0.0,
    };
    if m >= n * p {
        return Ok(empty);
    }
    let groups = m / p;
    let size = n / groups;
    let index = run.forest().config().linking == Linking::Index;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Node> = (0..n).collect();
    if index {
        nodes.shuffle(&mut rng);
    }
    let everyone: Vec<ProcId> = (1..=p).map(ProcId::new).collect();

    let mut find_visits = 0u64;
    let mut depth_sum = 0usize;
    let mut max_find_depth = 0usize;
    let mut max_group_depth = 0usize;
    for g in 0..groups {
        let group = &nodes[g * size..(g + 1) * size];
        let target = if index {
            let built = build_random_index_tree_on(run, group)?;
            built.nodes[rng.gen_range(0..built.nodes.len())]
        } else {
            build_binomial_tree_on(run, group)?;
            let snap = run.snapshot();
            *group.iter().max_by_key(|&&x| (snap.depth(x).expect("acyclic"), std::cmp::Reverse(x))).expect("group")
        };
        let snap = run.snapshot();
        for &x in group {
            max_group_depth = max_group_depth.max(snap.depth(x).expect("acyclic"));
        }
        let d = snap.depth(target).expect("acyclic");
        depth_sum += d * p;
        max_find_depth = max_find_depth.max(d);
        for &q in &everyone {
            run.enqueue(q, [Op::Find(target)])?;
        }
        find_visits += lockstep_finds(run, &everyone)?;
    }
    let finds = groups * p;
    let bound = log_lower_bound(n, p, finds);
    Ok(WorkReport {
        groups,
        group_size: size,
        finds,
        find_visits,
        mean_find_depth: depth_sum as f64 / finds as f64,
        max_find_depth,
        max_group_depth,
        bound,
        ratio: find_visits as f64 / bound,
        ..empty
    })
}
