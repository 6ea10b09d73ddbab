use serde::{Deserialize, Serialize};

use crate::forest::Node;
use crate::ops::{Answer, Op};

use super::PartitionSummary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeqLinking {
    Rank,
    Size,
    Index,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeqCompaction {
    None,
    Compression,
    Splitting,
    Halving,
}

/// Textbook sequential compressed forest.
#[derive(Clone, Debug)]
pub struct SequentialDsu {
    parents: Vec<Node>,
    ranks: Vec<u32>,
    sizes: Vec<usize>,
    linking: SeqLinking,
    compaction: SeqCompaction,
    visits: u64,
}

impl SequentialDsu {
    pub fn new(n: usize, linking: SeqLinking, compaction: SeqCompaction) -> Self {
        Self { parents: (0..n).collect(), ranks: vec![0; n], sizes: vec![1; n], linking, compaction, visits: 0 }
    }

    /// Starts from arbitrary parent pointers, all ranks zero.
    pub fn from_parents(parents: Vec<Node>, linking: SeqLinking, compaction: SeqCompaction) -> Self {
        let n = parents.len();
        Self { parents, ranks: vec![0; n], sizes: vec![1; n], linking, compaction, visits: 0 }
    }

    pub fn parents(&self) -> &[Node] {
        &self.parents
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Nodes visited by finds so far.
    pub fn visits(&self) -> u64 {
        self.visits
    }

    pub fn find(&mut self, x: Node) -> Node {
        let p = &mut self.parents;
        let mut u = x;
        match self.compaction {
            SeqCompaction::None => {
                while p[u] != u {
                    self.visits += 1;
                    u = p[u];
                }
            }
            SeqCompaction::Compression => {
                while p[u] != u {
                    self.visits += 1;
                    u = p[u];
                }
                let root = u;
                let mut w = x;
                while p[w] != root && w != root {
                    let next = p[w];
                    p[w] = root;
                    w = next;
                }
            }
            SeqCompaction::Splitting => {
                while p[u] != u {
                    self.visits += 1;
                    let next = p[u];
                    p[u] = p[next];
                    u = next;
                }
            }
            SeqCompaction::Halving => {
                while p[u] != u {
                    self.visits += 1;
                    p[u] = p[p[u]];
                    u = p[u];
                }
            }
        }
        self.visits += 1;
        u
    }

    /// Returns whether two different sets were merged.
    pub fn unite(&mut self, x: Node, y: Node) -> bool {
        let u = self.find(x);
        let v = self.find(y);
        if u == v {
            return false;
        }
        let (child, parent) = match self.linking {
            SeqLinking::Index => (u.min(v), u.max(v)),
            SeqLinking::Size => {
                if self.sizes[u] > self.sizes[v] {
                    (v, u)
                } else {
                    (u, v)
                }
            }
            SeqLinking::Rank => {
                if self.ranks[u] > self.ranks[v] {
                    (v, u)
                } else {
                    if self.ranks[u] == self.ranks[v] {
                        self.ranks[v] += 1;
                    }
                    (u, v)
                }
            }
        };
        self.parents[child] = parent;
        self.sizes[parent] += self.sizes[child];
        true
    }

    pub fn same_set(&mut self, x: Node, y: Node) -> bool {
        self.find(x) == self.find(y)
    }

    pub fn apply(&mut self, op: Op) -> Answer {
        match op {
            Op::Find(x) => Answer::Root(self.find(x)),
            Op::Unite(x, y) => {
                self.unite(x, y);
                Answer::United
            }
            Op::SameSet(x, y) => Answer::Same(self.same_set(x, y)),
        }
    }

    pub fn partition(&self) -> PartitionSummary {
        PartitionSummary::from_parents(&self.parents).expect("sequential forest is acyclic")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutput {
    pub answers: Vec<Answer>,
    pub partition: PartitionSummary,
}

pub fn oracle_run(n: usize, ops: &[Op], linking: SeqLinking, compaction: SeqCompaction) -> OracleOutput {
    let mut dsu = SequentialDsu::new(n, linking, compaction);
    let answers = ops.iter().map(|&op| dsu.apply(op)).collect();
    OracleOutput { answers, partition: dsu.partition() }
}
