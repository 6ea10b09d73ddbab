use std::collections::{HashMap, HashSet};

use crate::error::Error;

use super::SimRun;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreLimits {
    /// Give up after this many distinct states.
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self { max_states: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreReport {
    /// Distinct states visited.
    pub states: usize,
    /// Number of complete interleavings (schedules) represented, saturating at `u128::MAX`.
    pub interleavings: u128,
    pub terminal_states: usize,
    /// Longest schedule.
    pub max_steps: usize,
    /// False if the state limit cut the search short.
    pub complete: bool,
}

/// A failing schedule and what went wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreFailure {
    pub schedule: Vec<usize>,
    pub reason: String,
}

struct Search<'a, F> {
    memo: HashMap<Vec<u8>, (u128, usize)>,
    on_path: HashSet<Vec<u8>>,
    terminals: usize,
    limits: ExploreLimits,
    truncated: bool,
    path: Vec<usize>,
    on_terminal: &'a mut F,
}

impl<F: FnMut(&SimRun) -> Result<(), String>> Search<'_, F> {
    /// Returns (interleavings below, longest remaining schedule).
    fn dfs(&mut self, run: &SimRun) -> Result<(u128, usize), ExploreFailure> {
        let key = run.state_key();
        if let Some(&hit) = self.memo.get(&key) {
            return Ok(hit);
        }
        if self.on_path.contains(&key) {
            return Err(ExploreFailure {
                schedule: self.path.clone(),
                reason: "schedule returns to an earlier state without completing an operation".into(),
            });
        }
        if self.memo.len() >= self.limits.max_states {
            self.truncated = true;
            return Ok((0, 0));
        }
        let enabled = run.enabled();
        self.on_path.insert(key.clone());
        let result = if enabled.is_empty() {
            self.terminals += 1;
            (self.on_terminal)(run).map_err(|reason| ExploreFailure { schedule: self.path.clone(), reason })?;
            (1, 0)
        } else {
            let mut total = 0u128;
            let mut longest = 0;
            for p in enabled {
                let mut next = run.clone();
                self.path.push(p.get());
                if let Err(e) = next.step(p) {
                    return Err(self.fail(e));
                }
                let (count, depth) = self.dfs(&next)?;
                self.path.pop();
                total = total.saturating_add(count);
                longest = longest.max(depth + 1);
            }
            (total, longest)
        };
        self.on_path.remove(&key);
        self.memo.insert(key, result);
        Ok(result)
    }

    fn fail(&self, e: Error) -> ExploreFailure {
        ExploreFailure { schedule: self.path.clone(), reason: e.to_string() }
    }
}

/// Explores every interleaving of the queued programs from `run`'s state,
/// merging paths that reach identical states. Per-step invariants are those
/// enabled on `run`; `on_terminal` checks each distinct final state. A
/// schedule that revisits a state would repeat forever with no operation
/// finishing, so it is reported as a failure.
pub fn explore(
    run: &SimRun,
    limits: ExploreLimits,
    mut on_terminal: impl FnMut(&SimRun) -> Result<(), String>,
) -> Result<ExploreReport, ExploreFailure> {
    let mut start = run.clone();
    start.record_trace(false);
    let mut s = Search {
        memo: HashMap::new(),
        on_path: HashSet::new(),
        terminals: 0,
        limits,
        truncated: false,
        path: Vec::new(),
        on_terminal: &mut on_terminal,
    };
    let (interleavings, max_steps) = s.dfs(&start)?;
    Ok(ExploreReport {
        states: s.memo.len(),
        interleavings,
        terminal_states: s.terminals,
        max_steps,
        complete: !s.truncated,
    })
}
