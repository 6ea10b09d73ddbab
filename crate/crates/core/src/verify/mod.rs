//! Sequential oracle and the correctness checkers: partition equivalence,
//! linearization replay, interval checks for threaded histories, and rank
//! statistics.

mod oracle;
mod replay;
mod stats;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use oracle::{oracle_run, OracleOutput, SeqCompaction, SeqLinking, SequentialDsu};
pub use replay::{check_history_intervals, replay_linearization, ReplayError};
pub use stats::{check_rank_hard_bounds, check_rank_stats, RankStats, StatsError, MIN_RUNS};

use crate::forest::{Node, Snapshot};

/// Canonical labelling of a partition: each node maps to the smallest node of its set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub labels: Vec<Node>,
}

impl PartitionSummary {
    pub fn singletons(n: usize) -> Self {
        Self { labels: (0..n).collect() }
    }

    /// Labels of the trees described by `parents`; `None` if they contain a cycle.
    pub fn from_parents(parents: &[Node]) -> Option<Self> {
        let snap = Snapshot { parents: parents.to_vec(), ranks: vec![0; parents.len()] };
        let roots: Option<Vec<Node>> = (0..parents.len()).map(|x| snap.root(x)).collect();
        Some(Self::from_keys(&roots?))
    }

    pub fn from_snapshot(s: &Snapshot) -> Option<Self> {
        Self::from_parents(&s.parents)
    }

    /// Labels by equal keys.
    fn from_keys(keys: &[Node]) -> Self {
        let mut least = vec![usize::MAX; keys.len()];
        for (x, &k) in keys.iter().enumerate() {
            least[k] = least[k].min(x);
        }
        Self { labels: keys.iter().map(|&k| least[k]).collect() }
    }

    pub fn same(&self, x: Node, y: Node) -> bool {
        self.labels[x] == self.labels[y]
    }

    pub fn set_count(&self) -> usize {
        self.labels.iter().enumerate().filter(|&(i, &l)| i == l).count()
    }
}

/// Connected components of `(0..n, pairs)` by breadth-first search.
pub fn components_bfs(n: usize, pairs: &[(Node, Node)]) -> PartitionSummary {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut labels = vec![usize::MAX; n];
    for s in 0..n {
        if labels[s] != usize::MAX {
            continue;
        }
        labels[s] = s;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if labels[w] == usize::MAX {
                    labels[w] = s;
                    q.push_back(w);
                }
            }
        }
    }
    PartitionSummary { labels }
}

/// Connected components by repeated min-label propagation over the edges.
pub fn components_label_propagation(n: usize, pairs: &[(Node, Node)]) -> PartitionSummary {
    let mut labels: Vec<Node> = (0..n).collect();
    loop {
        let mut changed = false;
        for &(a, b) in pairs {
            let m = labels[a].min(labels[b]);
            if labels[a] != m || labels[b] != m {
                labels[a] = m;
                labels[b] = m;
                changed = true;
            }
        }
        if !changed {
            return PartitionSummary { labels };
        }
    }
}

/// Two nodes the snapshot and the unite pairs disagree on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionMismatch {
    pub witness: (Node, Node),
    /// True if the snapshot puts the witnesses together and the pairs do not.
    pub together_in_snapshot: bool,
}

/// Compares the snapshot's trees with the components of `pairs`.
pub fn check_partition(snapshot: &Snapshot, pairs: &[(Node, Node)]) -> Result<(), PartitionMismatch> {
    let n = snapshot.n();
    let want = components_bfs(n, pairs);
    let Some(got) = PartitionSummary::from_snapshot(snapshot) else {
        let x = (0..n).find(|&x| snapshot.root(x).is_none()).unwrap_or(0);
        return Err(PartitionMismatch { witness: (x, x), together_in_snapshot: false });
    };
    for x in 0..n {
        let (w, g) = (want.labels[x], got.labels[x]);
        if w == g {
            continue;
        }
        // Some label differs; one of the two labels is a node the other
        // partition places differently.
        return Err(if !got.same(x, w) {
            PartitionMismatch { witness: (w, x), together_in_snapshot: false }
        } else {
            PartitionMismatch { witness: (g, x), together_in_snapshot: true }
        });
    }
    Ok(())
}

/// Unite pairs of an operation sequence.
pub fn unite_pairs<'a>(ops: impl IntoIterator<Item = &'a crate::ops::Op>) -> Vec<(Node, Node)> {
    ops.into_iter()
        .filter_map(|op| match *op {
            crate::ops::Op::Unite(x, y) => Some((x, y)),
            _ => None,
        })
        .collect()
}
