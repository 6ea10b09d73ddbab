use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::Snapshot;

/// Fewest seeded runs accepted by [`check_rank_stats`].
pub const MIN_RUNS: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least {MIN_RUNS} runs, got {0}")]
    TooFewRuns(usize),
    #[error("runs disagree on n")]
    MixedSizes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankStats {
    pub n: usize,
    pub k: u32,
    pub runs: usize,
    /// Mean over runs of the number of nodes with rank at least `k`.
    pub mean: f64,
    pub std_error: f64,
    /// `n / 2^k`.
    pub bound: f64,
    pub mean_ok: bool,
    pub max_rank: u32,
    /// `4 lg n`.
    pub max_rank_bound: f64,
    pub max_rank_ok: bool,
}

impl RankStats {
    pub fn passed(&self) -> bool {
        self.mean_ok && self.max_rank_ok
    }
}

/// Mean of `#{rank >= k}` against `n / 2^k` with three standard errors of
/// slack, and the largest rank against `4 lg n`.
pub fn check_rank_stats(runs: &[Snapshot], k: u32) -> Result<RankStats, StatsError> {
    if runs.len() < MIN_RUNS {
        return Err(StatsError::TooFewRuns(runs.len()));
    }
    let n = runs[0].n();
    if runs.iter().any(|s| s.n() != n) {
        return Err(StatsError::MixedSizes);
    }
    let counts: Vec<f64> = runs.iter().map(|s| s.ranks.iter().filter(|&&r| r >= k).count() as f64).collect();
    let t = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / t;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let std_error = (var / t).sqrt();
    let bound = n as f64 / 2f64.powi(k as i32);
    let max_rank = runs.iter().map(Snapshot::max_rank).max().unwrap_or(0);
    let max_rank_bound = 4.0 * (n as f64).log2();
    Ok(RankStats {
        n,
        k,
        runs: runs.len(),
        mean,
        std_error,
        bound,
        mean_ok: mean <= bound + 3.0 * std_error,
        max_rank,
        max_rank_bound,
        max_rank_ok: max_rank as f64 <= max_rank_bound,
    })
}

/// Exact bounds for deterministic rank linking: the ranks sum to at most
/// `n - 1` and none exceeds `⌊lg n⌋`.
pub fn check_rank_hard_bounds(s: &Snapshot) -> Result<(), String> {
    let n = s.n() as u64;
    if s.rank_sum() > n - 1 {
        return Err(format!("rank sum {} exceeds n - 1 = {}", s.rank_sum(), n - 1));
    }
    if s.max_rank() > n.ilog2() {
        return Err(format!("max rank {} exceeds lg n = {}", s.max_rank(), n.ilog2()));
    }
    Ok(())
}
