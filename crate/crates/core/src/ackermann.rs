//! Ackermann's function, its inverse, problem density and the level/index/count
//! potentials of high nodes.
//!
//! Values are evaluated iteratively against a hard cap of 2^62. Anything above
//! the cap is reported as [`AnalysisError::Overflow`], which [`alpha`] treats as
//! larger than any `n`.

use thiserror::Error;

use crate::forest::Compaction;

/// Largest Ackermann value reported exactly.
pub const ACKERMANN_CAP: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("value exceeds representable range")]
    Overflow,
    #[error("density undefined for uncompacted finds")]
    DensityUndefined,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}

/// `A_k(n)`: `A_0(n) = n + 1`, `A_k(0) = A_{k-1}(1)`, `A_k(n) = A_{k-1}(A_k(n - 1))`.
pub fn ackermann(k: u64, n: u64) -> Result<u64, AnalysisError> {
    let capped = |v: u64| if v > ACKERMANN_CAP { Err(AnalysisError::Overflow) } else { Ok(v) };
    match k {
        0 => capped(n.checked_add(1).ok_or(AnalysisError::Overflow)?),
        1 => capped(n.checked_add(2).ok_or(AnalysisError::Overflow)?),
        2 => capped(
            n.checked_mul(2)
                .and_then(|v| v.checked_add(3))
                .ok_or(AnalysisError::Overflow)?,
        ),
        3 => {
            // 2^(n+3) - 3
            if n > 59 {
                return Err(AnalysisError::Overflow);
            }
            capped((1u64 << (n + 3)) - 3)
        }
        // A_6(0) = A_4(65533) already overflows, and A is increasing in both
        // arguments.
        k if k >= 6 => Err(AnalysisError::Overflow),
        k => {
            let mut x = ackermann(k - 1, 1)?;
            for _ in 0..n {
                x = ackermann(k - 1, x)?;
            }
            Ok(x)
        }
    }
}

/// `α(n, d) = min{k > 0 | A_k(⌊d⌋) > n}`.
pub fn alpha(n: u64, d: f64) -> u64 {
    let fd = if d.is_finite() { d.max(0.0).floor() as u64 } else { u64::MAX };
    let mut k = 1;
    loop {
        match ackermann(k, fd) {
            Ok(v) if v <= n => k += 1,
            _ => return k,
        }
    }
}

/// Parameters of a set-union instance for density and work-bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkBoundParams {
    pub n: u64,
    pub m: u64,
    pub p: u64,
    pub splitting: Compaction,
}

impl WorkBoundParams {
    pub fn new(n: u64, m: u64, p: u64, splitting: Compaction) -> Result<Self, AnalysisError> {
        if n == 0 || m == 0 || p == 0 {
            return Err(AnalysisError::InvalidParams("n, m and p must be positive"));
        }
        Ok(Self { n, m, p, splitting })
    }

    /// `2 <= p <= n <= m`.
    pub fn satisfies_standing_assumption(&self) -> bool {
        2 <= self.p && self.p <= self.n && self.n <= self.m
    }
}

pub fn density(params: &WorkBoundParams) -> Result<f64, AnalysisError> {
    let (n, m, p) = (params.n as f64, params.m as f64, params.p as f64);
    match params.splitting {
        Compaction::Naive => Err(AnalysisError::DensityUndefined),
        Compaction::OneTry => Ok(m / (n * p * p)),
        Compaction::TwoTry | Compaction::ConditionalTwoTry => Ok(m / (n * p)),
    }
}

/// `m · (α(n, d) + lg(1 + 1/d))`.
pub fn work_bound(params: &WorkBoundParams) -> Result<f64, AnalysisError> {
    let d = density(params)?;
    let a = alpha(params.n, d) as f64;
    Ok(params.m as f64 * (a + (1.0 + 1.0 / d).log2()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodePotential {
    pub level: u64,
    pub index: u64,
    pub count: u64,
}

/// Potential of a high child of rank `rank` whose parent has rank `parent_rank`.
pub fn node_potential(
    rank: u64,
    parent_rank: u64,
    _n: u64,
    d: f64,
) -> Result<NodePotential, AnalysisError> {
    if rank > parent_rank {
        return Err(AnalysisError::Precondition("rank exceeds parent rank"));
    }
    if rank == 0 || (rank as f64) < d.ceil() {
        return Err(AnalysisError::Precondition("node is not high"));
    }
    let mut level = 0;
    while matches!(ackermann(level, rank), Ok(v) if v <= parent_rank) {
        level += 1;
    }
    // A_level(i) is increasing in i and A_level(rank) > parent_rank, so the
    // largest admissible index is below rank.
    let (mut lo, mut hi) = (0u64, rank);
    if !matches!(ackermann(level, 0), Ok(v) if v <= parent_rank) {
        return Err(AnalysisError::Precondition("index undefined"));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if matches!(ackermann(level, mid), Ok(v) if v <= parent_rank) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(NodePotential { level, index: lo, count: rank * level + lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const B: usize = 200_000;

    /// Table of the three-case recurrence for arguments and values up to `B`;
    /// `None` marks a value above `B`.
    fn table() -> Vec<Vec<Option<u64>>> {
        let mut rows: Vec<Vec<Option<u64>>> = vec![(0..=B).map(|n| Some(n as u64 + 1).filter(|&v| v <= B as u64)).collect()];
        for k in 1..=6 {
            let prev = &rows[k - 1];
            let mut row = vec![None; B + 1];
            row[0] = prev[1];
            for n in 1..=B {
                row[n] = row[n - 1].and_then(|i| prev[i as usize]);
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn matches_recurrence_table() {
        let t = table();
        for k in 0..=6 {
            for n in 0..=300u64 {
                match t[k][n as usize] {
                    Some(v) => assert_eq!(ackermann(k as u64, n), Ok(v), "A_{k}({n})"),
                    None => assert!(ackermann(k as u64, n).map_or(true, |v| v > B as u64)),
                }
            }
        }
    }

    #[test]
    fn anchor_values() {
        assert_eq!(ackermann(0, 5), Ok(6));
        assert_eq!(ackermann(1, 3), Ok(5));
        assert_eq!(ackermann(3, 3), Ok(61));
        assert_eq!(ackermann(4, 0), Ok(13));
        assert_eq!(ackermann(4, 1), Ok(65533));
        assert_eq!(ackermann(5, 0), Ok(65533));
        assert_eq!(ackermann(3, 59), Ok((1 << 62) - 3));
        assert_eq!(ackermann(3, 60), Err(AnalysisError::Overflow));
        assert_eq!(ackermann(4, 2), Err(AnalysisError::Overflow));
        assert_eq!(ackermann(1000, 0), Err(AnalysisError::Overflow));
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(10, 0.0), 4);
        assert_eq!(alpha(1, 0.0), 1);
        assert_eq!(alpha(1, 17.5), 1);
        assert_eq!(alpha(3, 1.0), 2);
        assert_eq!(alpha(u64::MAX, 0.0), 6);
        assert_eq!(alpha(1 << 16, 1.0), 5);
    }

    #[test]
    fn density_formulas() {
        let two = WorkBoundParams::new(100, 10_000, 10, Compaction::TwoTry).unwrap();
        assert_eq!(density(&two), Ok(10.0));
        let one = WorkBoundParams { splitting: Compaction::OneTry, ..two };
        assert_eq!(density(&one), Ok(1.0));
        let sparse = WorkBoundParams::new(100, 100, 10, Compaction::TwoTry).unwrap();
        assert!((density(&sparse).unwrap() - 0.1).abs() < 1e-12);
        let naive = WorkBoundParams { splitting: Compaction::Naive, ..two };
        assert_eq!(density(&naive), Err(AnalysisError::DensityUndefined));
        assert!(WorkBoundParams::new(0, 1, 1, Compaction::TwoTry).is_err());
    }

    #[test]
    fn work_bound_values() {
        let p = WorkBoundParams::new(1 << 16, 1 << 18, 4, Compaction::TwoTry).unwrap();
        let want = (1u64 << 18) as f64 * (alpha(1 << 16, 1.0) as f64 + 1.0);
        assert_eq!(work_bound(&p), Ok(want));
        assert_eq!(work_bound(&p), Ok((1u64 << 18) as f64 * 6.0));
        let q = WorkBoundParams::new(4, 4, 2, Compaction::TwoTry).unwrap();
        let want = 4.0 * (alpha(4, 0.5) as f64 + 3f64.log2());
        assert!((work_bound(&q).unwrap() - want).abs() < 1e-9);
        assert_eq!(alpha(4, 0.5), 3);
    }

    #[test]
    fn potential_values() {
        let p = node_potential(2, 2, 16, 1.0).unwrap();
        assert_eq!(p.level, 0);
        assert_eq!(p.index, 1);
        assert_eq!(node_potential(2, 3, 16, 1.0).unwrap(), NodePotential { level: 1, index: 1, count: 3 });
        assert!(node_potential(3, 2, 16, 1.0).is_err());
        assert!(node_potential(1, 4, 16, 2.0).is_err());
    }

    /// Brute-force level/index by linear scans over the table.
    fn potential_oracle(t: &[Vec<Option<u64>>], rank: u64, prank: u64) -> NodePotential {
        let at = |k: usize, i: u64| t[k][i as usize];
        let level = (0..).find(|&k| at(k, rank).map_or(true, |v| v > prank)).unwrap();
        let index = (0..=prank).filter(|&i| at(level, i).is_some_and(|v| v <= prank)).max().unwrap();
        NodePotential { level: level as u64, index, count: rank * level as u64 + index }
    }

    #[test]
    fn potential_matches_scan() {
        let t = table();
        for rank in 1..=8 {
            for prank in rank..=600 {
                assert_eq!(node_potential(rank, prank, 1 << 20, 1.0).unwrap(), potential_oracle(&t, rank, prank));
            }
        }
    }

    proptest! {
        #[test]
        fn ackermann_strictly_increasing(k in 0u64..5, n in 0u64..40) {
            if let (Ok(a), Ok(b)) = (ackermann(k, n), ackermann(k, n + 1)) {
                prop_assert!(a < b);
            }
            if let (Ok(a), Ok(b)) = (ackermann(k, n), ackermann(k + 1, n)) {
                prop_assert!(a < b);
            }
            if ackermann(k, n).is_err() {
                prop_assert!(ackermann(k, n + 1).is_err());
                prop_assert!(ackermann(k + 1, n).is_err());
            }
        }

        #[test]
        fn alpha_monotone(n in 1u64..1_000_000, dn in 0u64..1000, d in 0.0f64..200.0, dd in 0.0f64..50.0) {
            prop_assert!(alpha(n, d) <= alpha(n + dn, d));
            prop_assert!(alpha(n, d + dd) <= alpha(n, d));
        }

        #[test]
        fn work_bound_terms(n in 2u64..5000, m in 1u64..100_000, dm in 0u64..100_000, p in 1u64..64) {
            let a = WorkBoundParams::new(n, m, p, Compaction::TwoTry).unwrap();
            let b = WorkBoundParams::new(n, m + dm, p, Compaction::TwoTry).unwrap();
            let (da, db) = (density(&a).unwrap(), density(&b).unwrap());
            prop_assert!(alpha(n, da) >= alpha(n, db));
            prop_assert!(work_bound(&a).unwrap() >= m as f64);
            prop_assert!(work_bound(&b).unwrap() / (m + dm) as f64 <= work_bound(&a).unwrap() / m as f64 + 1e-9);
        }

        #[test]
        fn count_grows_with_parent_rank(rank in 1u64..40, prank in 0u64..200, step in 0u64..200) {
            let prank = prank + rank;
            let a = node_potential(rank, prank, 1 << 30, 1.0).unwrap();
            let b = node_potential(rank, prank + step, 1 << 30, 1.0).unwrap();
            prop_assert!(a.level <= b.level);
            prop_assert!(a.count <= b.count);
            if b.level > a.level {
                prop_assert!(b.count - a.count >= b.level - a.level);
            } else if b.index > a.index {
                prop_assert!(b.count - a.count >= b.index - a.index);
            }
            prop_assert!(b.index < rank);
        }
    }
}
