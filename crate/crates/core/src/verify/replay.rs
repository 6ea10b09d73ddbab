use std::collections::HashSet;

use thiserror::Error;

use crate::ops::{Answer, Op, OpRecord};

use super::{SeqCompaction, SeqLinking, SequentialDsu};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("malformed history: {0}")]
    Malformed(String),
    #[error("record {position} ({record:?}) is inconsistent with the operations ordered before it")]
    Divergence { position: usize, record: OpRecord },
}

fn check_nodes(n: usize, r: &OpRecord) -> Result<(), ReplayError> {
    let mut nodes = r.op.nodes().to_vec();
    if let Answer::Root(x) = r.answer {
        nodes.push(x);
    }
    match nodes.into_iter().find(|&x| x >= n) {
        Some(x) => Err(ReplayError::Malformed(format!("node {x} out of range in {r:?}"))),
        None => Ok(()),
    }
}

fn answer_matches(op: Op, answer: Answer) -> bool {
    matches!(
        (op, answer),
        (Op::Find(_), Answer::Root(_)) | (Op::Unite(..), Answer::United) | (Op::SameSet(..), Answer::Same(_))
    )
}

/// Replays `records` in linearization order through a sequential forest and
/// reports the first record whose answer is wrong for the prefix before it.
/// Find answers are checked by membership: the answer must lie in the queried
/// node's set.
pub fn replay_linearization(n: usize, records: &[OpRecord]) -> Result<(), ReplayError> {
    let mut order: Vec<(u64, usize)> = Vec::with_capacity(records.len());
    let mut seen = HashSet::new();
    for (i, r) in records.iter().enumerate() {
        let lin = r.lin.ok_or_else(|| ReplayError::Malformed(format!("record {i} has no linearization point")))?;
        if !seen.insert(lin) {
            return Err(ReplayError::Malformed(format!("duplicate linearization step {lin}")));
        }
        if !(r.invoke <= lin && lin <= r.response) {
            return Err(ReplayError::Malformed(format!("record {i} linearizes outside its interval")));
        }
        if !answer_matches(r.op, r.answer) {
            return Err(ReplayError::Malformed(format!("record {i} answer does not fit its operation")));
        }
        check_nodes(n, r)?;
        order.push((lin, i));
    }
    order.sort_unstable();
    let mut dsu = SequentialDsu::new(n, SeqLinking::Rank, SeqCompaction::Compression);
    for (position, &(_, i)) in order.iter().enumerate() {
        let r = records[i];
        let ok = match (r.op, r.answer) {
            (Op::Unite(x, y), _) => {
                dsu.unite(x, y);
                true
            }
            (Op::Find(x), Answer::Root(a)) => dsu.same_set(x, a),
            (Op::SameSet(x, y), Answer::Same(b)) => dsu.same_set(x, y) == b,
            _ => false,
        };
        if !ok {
            return Err(ReplayError::Divergence { position, record: r });
        }
    }
    Ok(())
}

/// Checks a history that carries only invocation and response stamps.
///
/// A unite may have taken effect before an operation responded only if it was
/// invoked before that response; it certainly took effect before an operation
/// was invoked if it responded earlier. Find answers and positive same-set
/// answers must hold under the first set of unites; negative same-set answers
/// must hold under the second.
pub fn check_history_intervals(n: usize, records: &[OpRecord]) -> Result<(), ReplayError> {
    for r in records {
        check_nodes(n, r)?;
        if r.invoke > r.response || !answer_matches(r.op, r.answer) {
            return Err(ReplayError::Malformed(format!("bad record {r:?}")));
        }
    }
    let unites: Vec<&OpRecord> = records.iter().filter(|r| matches!(r.op, Op::Unite(..))).collect();
    let queries: Vec<(usize, &OpRecord)> =
        records.iter().enumerate().filter(|(_, r)| !matches!(r.op, Op::Unite(..))).collect();

    let pair = |r: &OpRecord| match r.op {
        Op::Unite(x, y) => (x, y),
        _ => unreachable!(),
    };

    // possibly-before: unites by invoke, queries by response
    let mut by_invoke = unites.clone();
    by_invoke.sort_by_key(|r| r.invoke);
    let mut q = queries.clone();
    q.sort_by_key(|(_, r)| r.response);
    let mut dsu = SequentialDsu::new(n, SeqLinking::Rank, SeqCompaction::Compression);
    let mut k = 0;
    for &(position, r) in &q {
        while k < by_invoke.len() && by_invoke[k].invoke < r.response {
            let (x, y) = pair(by_invoke[k]);
            dsu.unite(x, y);
            k += 1;
        }
        let ok = match (r.op, r.answer) {
            (Op::Find(x), Answer::Root(a)) => dsu.same_set(x, a),
            (Op::SameSet(x, y), Answer::Same(true)) => dsu.same_set(x, y),
            _ => true,
        };
        if !ok {
            return Err(ReplayError::Divergence { position, record: *r });
        }
    }

    // definitely-before: unites by response, queries by invoke
    let mut by_response = unites;
    by_response.sort_by_key(|r| r.response);
    let mut q = queries;
    q.sort_by_key(|(_, r)| r.invoke);
    let mut dsu = SequentialDsu::new(n, SeqLinking::Rank, SeqCompaction::Compression);
    let mut k = 0;
    for &(position, r) in &q {
        while k < by_response.len() && by_response[k].response < r.invoke {
            let (x, y) = pair(by_response[k]);
            dsu.unite(x, y);
            k += 1;
        }
        if let (Op::SameSet(x, y), Answer::Same(false)) = (r.op, r.answer) {
            if dsu.same_set(x, y) {
                return Err(ReplayError::Divergence { position, record: *r });
            }
        }
    }
    Ok(())
}
