//! Acceptance suite: criteria 1 to 11, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::Instant;

use cdsu_bench::runner::{run_threads, RunConfig};
use cdsu_bench::workload::{binomial_script, generate_workload, Mix, PairDist, WorkloadSpec};
use cdsu_core::forest::{Compaction, Forest, ForestConfig, Linking, ProcId, Realization, Snapshot};
use cdsu_core::ops::{find_one_try, find_two_try, Answer, Op, OpRecord};
use cdsu_core::sim::scenarios::{build_binomial_tree, scenario_log_lowerbound, scenario_sqrt_p_path, scenario_wakeup};
use cdsu_core::sim::{explore, Checks, ExploreLimits, Policy, SimRun};
use cdsu_core::verify::{
    check_rank_hard_bounds, check_rank_stats, components_bfs, replay_linearization, unite_pairs, PartitionSummary,
    ReplayError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Every (linking, realization) pair the simulator supports.
fn realizations(l: Linking) -> &'static [Realization] {
    if l.uses_rank() {
        &[Realization::Native, Realization::Helping]
    } else {
        &[Realization::Native]
    }
}

fn random_op(rng: &mut ChaCha8Rng, n: usize) -> Op {
    let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
    match rng.gen_range(0..4) {
        0 | 1 => Op::Unite(x, y),
        2 => Op::Find(x),
        _ => Op::SameSet(x, y),
    }
}

fn lg(n: usize) -> f64 {
    (n as f64).log2()
}

// ---------------------------------------------------------------------------
// 1 and 3: random simulated histories

struct History {
    n: usize,
    records: Vec<OpRecord>,
}

struct RandomHistories {
    runs: usize,
    partition_failures: Vec<String>,
    histories: Vec<History>,
    secs: f64,
}

fn random_histories() -> RandomHistories {
    const RUNS: usize = 10_008;
    let start = Instant::now();
    let mut configs = Vec::new();
    for l in Linking::ALL {
        for c in Compaction::ALL {
            for &r in realizations(l) {
                configs.push((l, c, r));
            }
        }
    }
    let mut partition_failures = Vec::new();
    let mut histories = Vec::with_capacity(RUNS);
    for i in 0..RUNS {
        let (l, c, r) = configs[i % configs.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let n = rng.gen_range(2..=16);
        let p = rng.gen_range(1..=4);
        let cfg = ForestConfig::new(n, p, l, c).with_realization(r);
        let mut run = SimRun::new(cfg, i as u64).unwrap();
        run.set_checks(Checks::ALL);
        let mut ops = Vec::new();
        for q in 1..=p {
            let len = rng.gen_range(1..=6);
            let prog: Vec<Op> = (0..len).map(|_| random_op(&mut rng, n)).collect();
            ops.extend_from_slice(&prog);
            run.enqueue(ProcId::new(q), prog).unwrap();
        }
        if let Err(e) = run.run_policy(&mut Policy::random(i as u64 ^ 0x5eed)) {
            partition_failures.push(format!("run {i} ({l:?}, {c:?}, {r:?}): {e}"));
            continue;
        }
        let want = components_bfs(n, &unite_pairs(&ops));
        let got = PartitionSummary::from_snapshot(&run.snapshot());
        if got.as_ref() != Some(&want) {
            partition_failures.push(format!("run {i} ({l:?}, {c:?}, {r:?}): partition {got:?} != {want:?}"));
        }
        histories.push(History { n, records: run.take_records() });
    }
    RandomHistories { runs: RUNS, partition_failures, histories, secs: start.elapsed().as_secs_f64() }
}

fn criterion_1(h: &RandomHistories) -> Verdict {
    let ok = h.partition_failures.is_empty() && h.secs < 120.0;
    let mut d = format!(
        "{} histories over 3 linkings x 4 finds (native and helping rank links), {} mismatches, {:.1}s",
        h.runs,
        h.partition_failures.len(),
        h.secs
    );
    if let Some(f) = h.partition_failures.first() {
        d += &format!("; first: {f}");
    }
    verdict(ok, d)
}

/// Corrupts one answer so that it is wrong at its linearization point.
fn tamper(h: &History) -> Option<Vec<OpRecord>> {
    let mut recs = h.records.clone();
    let mut order: Vec<usize> = (0..recs.len()).collect();
    order.sort_by_key(|&i| recs[i].lin);
    // sequential answers at each linearization point
    let mut seq = cdsu_core::verify::SequentialDsu::new(
        h.n,
        cdsu_core::verify::SeqLinking::Rank,
        cdsu_core::verify::SeqCompaction::None,
    );
    for &i in &order {
        let r = recs[i];
        match (r.op, r.answer) {
            (Op::SameSet(..), Answer::Same(b)) => {
                recs[i].answer = Answer::Same(!b);
                return Some(recs);
            }
            (Op::Find(x), _) => {
                let rx = seq.find(x);
                if let Some(other) = (0..h.n).find(|&z| seq.find(z) != rx) {
                    recs[i].answer = Answer::Root(other);
                    return Some(recs);
                }
            }
            (Op::Unite(x, y), _) => {
                seq.unite(x, y);
            }
            _ => {}
        }
    }
    None
}

fn criterion_3(h: &RandomHistories) -> Verdict {
    let start = Instant::now();
    let mut failures = 0;
    let mut first = None;
    for (i, hist) in h.histories.iter().enumerate() {
        if let Err(e) = replay_linearization(hist.n, &hist.records) {
            failures += 1;
            first.get_or_insert(format!("history {i}: {e}"));
        }
    }
    let mut tampered = 0;
    let mut accepted_bad = 0;
    for hist in h.histories.iter().take(2000) {
        if let Some(bad) = tamper(hist) {
            tampered += 1;
            if replay_linearization(hist.n, &bad).is_ok() {
                accepted_bad += 1;
            }
        }
    }
    // hand-built fixtures
    let rec = |op, answer, invoke, lin, response| OpRecord {
        op,
        answer,
        proc: ProcId::new(1),
        invoke,
        lin: Some(lin),
        response,
        visits: 0,
    };
    let unite = rec(Op::Unite(0, 1), Answer::United, 0, 1, 2);
    let fixtures: Vec<(&str, Vec<OpRecord>)> = vec![
        ("stale negative same-set", vec![unite, rec(Op::SameSet(0, 1), Answer::Same(false), 3, 3, 4)]),
        ("early positive same-set", vec![rec(Op::SameSet(0, 2), Answer::Same(true), 0, 0, 1)]),
        ("find answers another set", vec![unite, rec(Op::Find(0), Answer::Root(2), 3, 3, 4)]),
        ("lin outside interval", vec![rec(Op::Find(2), Answer::Root(2), 4, 9, 5)]),
        ("missing lin", vec![OpRecord { lin: None, ..unite }]),
        ("answer of wrong kind", vec![rec(Op::Find(2), Answer::United, 0, 0, 1)]),
    ];
    let fixtures_rejected = fixtures
        .iter()
        .filter(|(_, h)| matches!(replay_linearization(3, h), Err(ReplayError::Divergence { .. } | ReplayError::Malformed(_))))
        .count();
    let ok = failures == 0 && accepted_bad == 0 && tampered > 0 && fixtures_rejected == fixtures.len();
    let mut d = format!(
        "{} histories replayed, {failures} rejected; {tampered} tampered histories, {accepted_bad} accepted; {fixtures_rejected}/{} fixtures rejected; {:.1}s",
        h.histories.len(),
        fixtures.len(),
        start.elapsed().as_secs_f64()
    );
    if let Some(f) = first {
        d += &format!("; first: {f}");
    }
    verdict(ok, d)
}

// ---------------------------------------------------------------------------
// 2: exhaustive interleavings

fn program_pairs(n: usize, sampled: usize, seed: u64, len: usize) -> Vec<[Vec<Op>; 2]> {
    let mut out = vec![
        [vec![Op::Unite(0, 1), Op::Find(0)], vec![Op::Unite(1, 0), Op::Find(1)]],
        [vec![Op::Unite(0, 1), Op::Unite(2, 3)], vec![Op::Unite(1, 2), Op::SameSet(0, 3)]],
        [vec![Op::Unite(0, 1), Op::Unite(1, 2)], vec![Op::Unite(2, 3), Op::Unite(3, 0)]],
        [vec![Op::Unite(0, 2), Op::SameSet(1, 3)], vec![Op::Unite(1, 3), Op::SameSet(0, 2)]],
    ];
    out.retain(|pair| pair.iter().flatten().all(|op| op.nodes().iter().all(|&x| x < n)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < sampled {
        let prog = |rng: &mut ChaCha8Rng| (0..len).map(|_| random_op(rng, n)).collect::<Vec<_>>();
        out.push([prog(&mut rng), prog(&mut rng)]);
    }
    out
}

/// Explores every interleaving; returns (interleavings, distinct terminal partitions) or the failure.
fn explore_all(
    cfg: ForestConfig,
    progs: &[Vec<Op>; 2],
    limits: ExploreLimits,
) -> Result<(u128, BTreeSet<PartitionSummary>), String> {
    let mut run = SimRun::new(cfg, 3).map_err(|e| e.to_string())?;
    run.set_checks(Checks::ALL);
    for (i, prog) in progs.iter().enumerate() {
        run.enqueue(ProcId::new(i + 1), prog.iter().copied()).map_err(|e| e.to_string())?;
    }
    let want = components_bfs(cfg.n, &unite_pairs(progs.iter().flatten()));
    let mut finals = BTreeSet::new();
    let report = explore(&run, limits, |end| {
        let got = PartitionSummary::from_snapshot(&end.snapshot()).ok_or("cycle at the end")?;
        if got != want {
            return Err(format!("final partition {got:?}, expected {want:?}"));
        }
        replay_linearization(cfg.n, end.records()).map_err(|e| e.to_string())?;
        finals.insert(got);
        Ok(())
    })
    .map_err(|f| format!("{} after schedule {:?}", f.reason, f.schedule))?;
    if !report.complete {
        return Err("state limit reached".into());
    }
    Ok((report.interleavings, finals))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let limits = ExploreLimits { max_states: 1_000_000 };
    let mut explored = 0usize;
    let mut interleavings = 0u128;
    let mut failures = Vec::new();
    for n in [3, 4] {
        let pairs = program_pairs(n, 40, n as u64, 2);
        for l in Linking::ALL {
            for c in Compaction::ALL {
                for &r in realizations(l) {
                    for progs in &pairs {
                        let cfg = ForestConfig::new(n, 2, l, c).with_realization(r);
                        match explore_all(cfg, progs, limits) {
                            Ok((k, _)) => interleavings += k,
                            Err(e) => failures.push(format!("{l:?} {c:?} {r:?} {progs:?}: {e}")),
                        }
                        explored += 1;
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut d = format!(
        "{explored} program pairs on n = 3 and 4, {interleavings} interleavings with acyclicity and order checked at every step, {} failures, {secs:.1}s",
        failures.len()
    );
    if let Some(f) = failures.first() {
        d += &format!("; first: {f}");
    }
    verdict(failures.is_empty() && secs < 300.0, d)
}

// ---------------------------------------------------------------------------
// 4 and 5: rank bounds

fn unite_run(n: usize, p: usize, m: usize, l: Linking, r: Realization, seed: u64) -> Snapshot {
    let mut run = SimRun::new(ForestConfig::new(n, p, l, Compaction::TwoTry).with_realization(r), seed).unwrap();
    run.set_checks(Checks::NONE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..m {
        let op = Op::Unite(rng.gen_range(0..n), rng.gen_range(0..n));
        run.enqueue(ProcId::new(i % p + 1), [op]).unwrap();
    }
    run.run_policy(&mut Policy::random(seed)).unwrap();
    run.snapshot()
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let n = 1 << 10;
    let mut violations = Vec::new();
    let mut worst = (0u64, 0u32);
    for seed in 0..1000u64 {
        let r = if seed % 2 == 0 { Realization::Helping } else { Realization::Native };
        let s = unite_run(n, 4, 2 * n, Linking::RankDcas, r, seed);
        worst = (worst.0.max(s.rank_sum()), worst.1.max(s.max_rank()));
        if let Err(e) = check_rank_hard_bounds(&s) {
            violations.push(format!("seed {seed}: {e}"));
        }
        if s.max_rank() > 10 || s.rank_sum() > n as u64 - 1 {
            violations.push(format!("seed {seed}: rank sum {} max rank {}", s.rank_sum(), s.max_rank()));
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "1000 seeded runs at n = 1024, p = 4, m = 2n unites; largest rank sum {} (<= 1023), largest rank {} (<= 10), {} violations, {:.1}s",
            worst.0,
            worst.1,
            violations.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let n = 1 << 10;
    let runs: Vec<Snapshot> = (0..120u64)
        .map(|seed| {
            let r = if seed % 2 == 0 { Realization::Helping } else { Realization::Native };
            unite_run(n, 4, 8 * n, Linking::RankRandomized, r, 10_000 + seed)
        })
        .collect();
    let connected = runs.iter().filter(|s| s.set_count() == 1).count();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [3, 5, 7] {
        let st = check_rank_stats(&runs, k).unwrap();
        ok &= st.passed();
        parts.push(format!("k={k}: mean {:.2} vs {:.2} + 3x{:.2}", st.mean, st.bound, st.std_error));
        if k == 7 {
            parts.push(format!("max rank {} vs {:.0}", st.max_rank, st.max_rank_bound));
        }
    }
    verdict(
        ok,
        format!(
            "120 seeds, n = 1024, 8n unites ({connected} runs end as one set); {}; {:.1}s",
            parts.join(", "),
            start.elapsed().as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6 and 7: threaded grid

struct GridPoint {
    n: usize,
    p: usize,
    m: usize,
    find: Compaction,
    visits: u64,
    max_op_visits: u64,
    ratio: Option<f64>,
    verified: bool,
}

fn threaded_grid() -> (Vec<GridPoint>, f64) {
    let start = Instant::now();
    let mut out = Vec::new();
    for n in [1 << 10, 1 << 14, 1 << 16] {
        for p in [1, 2, 4, 8, 16] {
            for mult in [1, 4, 16] {
                let m = mult * n;
                for find in Compaction::ALL {
                    let seed = (n + p + m) as u64;
                    let spec = WorkloadSpec { n, m, p, mix: Mix::new(1.0, 1.0, 1.0).unwrap(), pairs: PairDist::Uniform, seed };
                    let w = generate_workload(&spec).unwrap();
                    let mut cfg = RunConfig::new(Linking::RankDcas, find, seed);
                    cfg.verify = n <= 1 << 14;
                    let r = run_threads(n, &w, &cfg).unwrap();
                    out.push(GridPoint {
                        n,
                        p,
                        m,
                        find,
                        visits: r.total.visits,
                        max_op_visits: r.max_op_visits,
                        ratio: r.ratio,
                        verified: !r.verification_failed(),
                    });
                }
            }
        }
    }
    (out, start.elapsed().as_secs_f64())
}

fn criterion_6(grid: &[GridPoint]) -> Verdict {
    let worst = grid
        .iter()
        .max_by(|a, b| (a.max_op_visits as f64 / lg(a.n)).total_cmp(&(b.max_op_visits as f64 / lg(b.n))))
        .unwrap();
    let over: Vec<&GridPoint> = grid.iter().filter(|g| g.max_op_visits as f64 > 8.0 * lg(g.n)).collect();
    verdict(
        over.is_empty() && grid.iter().all(|g| g.verified),
        format!(
            "{} threaded rank-dcas runs over all finds; worst single operation {} visits at n = {}, p = {}, {} (limit {:.0}); {} runs over the limit",
            grid.len(),
            worst.max_op_visits,
            worst.n,
            worst.p,
            worst.find.name(),
            8.0 * lg(worst.n),
            over.len()
        ),
    )
}

fn criterion_7(grid: &[GridPoint], secs: f64) -> Verdict {
    let naive_over: Vec<&GridPoint> =
        grid.iter().filter(|g| g.find == Compaction::Naive && g.visits as f64 > 8.0 * g.m as f64 * lg(g.n)).collect();
    let naive_worst = grid
        .iter()
        .filter(|g| g.find == Compaction::Naive)
        .map(|g| g.visits as f64 / (g.m as f64 * lg(g.n)))
        .fold(0.0, f64::max);
    let two: Vec<&GridPoint> = grid.iter().filter(|g| g.find == Compaction::TwoTry).collect();
    let ratio = |g: &GridPoint| g.ratio.expect("splitting ratio");
    let max_ratio = two.iter().map(|g| ratio(g)).fold(0.0, f64::max);
    let smallest = two.iter().min_by_key(|g| (g.n, g.p, g.m)).unwrap();
    let largest = two.iter().max_by_key(|g| (g.n, g.p, g.m)).unwrap();
    let scaling_ok = ratio(largest) <= 2.0 * ratio(smallest);
    verdict(
        naive_over.is_empty() && scaling_ok && secs < 600.0,
        format!(
            "naive: max visits/(m lg n) = {naive_worst:.3} (limit 8); two-try: max ratio {max_ratio:.3}, ratio {:.3} at n = 2^16, p = 16, m = 16n vs {:.3} at n = 2^10, p = 1, m = n (limit 2x); grid {secs:.1}s",
            ratio(largest),
            ratio(smallest)
        ),
    )
}

// ---------------------------------------------------------------------------
// 8: lower-bound scenarios

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let (n, p) = (1 << 12, 64);
    let m = n;
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [Compaction::OneTry, Compaction::TwoTry, Compaction::ConditionalTwoTry] {
        let mut run = SimRun::new(ForestConfig::new(n, p, Linking::RankDcas, c), 1).unwrap();
        run.set_checks(Checks::CHEAP);
        let rep = scenario_log_lowerbound(&mut run, m, 1).unwrap();
        let replay = replay_linearization(n, run.records()).is_ok();
        ok &= rep.ratio >= 0.5 && replay;
        parts.push(format!("{}: {:.0} visits vs bound {:.0} (ratio {:.2})", c.name(), rep.find_visits as f64, rep.bound, rep.ratio));
    }
    let sqrt_p = (p as f64).sqrt();
    let mut depth = [0.0; 2];
    for (i, adversary) in [true, false].into_iter().enumerate() {
        let mut run = SimRun::new(ForestConfig::new(n, p, Linking::Index, Compaction::TwoTry), 2).unwrap();
        run.set_checks(Checks::CHEAP);
        let rep = scenario_sqrt_p_path(&mut run, adversary, 2).unwrap();
        ok &= replay_linearization(n, run.records()).is_ok();
        depth[i] = rep.mean_find_depth;
    }
    ok &= depth[0] >= sqrt_p / 4.0 && depth[1] <= 4.0 * lg(p);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        ok && secs < 120.0,
        format!(
            "n = 4096, p = 64, m = 4096, rank-dcas; {}; sqrt-p path mean find depth {:.2} with adversary (>= {:.1}), {:.2} without (<= {:.0}); {secs:.1}s",
            parts.join(", "),
            depth[0],
            sqrt_p / 4.0,
            depth[1],
            4.0 * lg(p)
        ),
    )
}

// ---------------------------------------------------------------------------
// 9: wake-up

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let k = 8;
    let mut bad = Vec::new();
    let mut true_count = 0usize;
    for seed in 0..1000u64 {
        let l = Linking::ALL[seed as usize % 3];
        let c = Compaction::ALL[(seed as usize / 3) % 4];
        let r = if seed % 2 == 0 { Realization::Helping } else { Realization::Native };
        let mut run = SimRun::new(ForestConfig::new(k + 1, k, l, c).with_realization(r), seed).unwrap();
        let rep = scenario_wakeup(&mut run, k, &mut Policy::random(seed)).unwrap();
        true_count += rep.returns.iter().filter(|&&b| b).count();
        if !rep.some_true || !rep.true_after_all_woke {
            bad.push(seed);
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "1000 random schedules, k = 8, all linkings and finds; {} schedules break a property, {true_count} true returns in total; {:.1}s",
            bad.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 10: helping against native DCAS

fn criterion_10() -> Verdict {
    let start = Instant::now();
    let limits = ExploreLimits { max_states: 1_000_000 };
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for n in [4, 5, 6] {
        let pairs = program_pairs(n, 12, 100 + n as u64, 3);
        for l in [Linking::RankDcas, Linking::RankRandomized] {
            for c in [Compaction::Naive, Compaction::TwoTry] {
                for progs in &pairs {
                    let native = explore_all(ForestConfig::new(n, 2, l, c), progs, limits);
                    let helping =
                        explore_all(ForestConfig::new(n, 2, l, c).with_realization(Realization::Helping), progs, limits);
                    compared += 1;
                    match (native, helping) {
                        (Ok((_, a)), Ok((_, b))) if a == b => {}
                        (a, b) => mismatches.push(format!("{l:?} {c:?} {progs:?}: native {a:?}, helping {b:?}")),
                    }
                }
            }
        }
    }
    let explore_secs = start.elapsed().as_secs_f64();

    let (n, p, m) = (1 << 16, 8, 1 << 20);
    let mut stress_failures = Vec::new();
    for seed in 0..50u64 {
        let spec = WorkloadSpec { n, m, p, mix: Mix::new(2.0, 1.0, 1.0).unwrap(), pairs: PairDist::Uniform, seed };
        let w = generate_workload(&spec).unwrap();
        let mut cfg = RunConfig::new(Linking::RankDcas, Compaction::TwoTry, seed);
        cfg.verify = true;
        let r = run_threads(n, &w, &cfg).unwrap();
        if let Some(Err(e)) = r.verified {
            stress_failures.push(format!("seed {seed}: {e}"));
        }
    }
    let mut d = format!(
        "{compared} program pairs on n = 4..6 explored under both realizations ({} differ, {explore_secs:.1}s); 50 threaded runs p = 8, n = 2^16, m = 2^20 with helping: {} fail partition, order or history checks; {:.1}s total",
        mismatches.len(),
        stress_failures.len(),
        start.elapsed().as_secs_f64()
    );
    if let Some(f) = mismatches.first().or(stress_failures.first()) {
        d += &format!("; first: {f}");
    }
    verdict(mismatches.is_empty() && stress_failures.is_empty(), d)
}

// ---------------------------------------------------------------------------
// 11: scripted constructions

fn path_forest(len: usize, c: Compaction) -> Forest {
    let parents = (0..len).map(|i| (i + 1).min(len - 1)).collect();
    let snap = Snapshot { parents, ranks: vec![0; len] };
    Forest::from_snapshot(ForestConfig::new(len, 1, Linking::Index, c), &snap).unwrap()
}

/// Path from `x` to its root, numbering nodes from 1.
fn one_based_path(parents: &[usize], x: usize) -> Vec<usize> {
    let mut out = vec![x + 1];
    let mut u = x;
    while parents[u] != u {
        u = parents[u];
        out.push(u + 1);
    }
    out
}

fn criterion_11() -> Verdict {
    let mut heights = Vec::new();
    let mut ok = true;
    for k in 0..=10u32 {
        let mut run = SimRun::new(ForestConfig::new(1 << k, 1, Linking::RankDcas, Compaction::Naive), 0).unwrap();
        run.set_checks(Checks::CHEAP);
        build_binomial_tree(&mut run, 1 << k).unwrap();
        let h = run.snapshot().height();
        ok &= h == k as usize;
        heights.push(h);
    }
    // the generated binomial script builds the same tree
    let f = Forest::new(ForestConfig::new(1 << 10, 1, Linking::RankDcas, Compaction::Naive)).unwrap();
    let mut flips = cdsu_core::rng::FlipSource::for_proc(0, ProcId::new(1));
    for (x, y) in binomial_script(1 << 10) {
        cdsu_core::ops::unite(&f, x, y, ProcId::new(1), &mut flips);
    }
    let script_height = f.snapshot().height();
    ok &= script_height == 10;

    let f = path_forest(12, Compaction::TwoTry);
    find_two_try(&f, 0, ProcId::new(1));
    let p = f.snapshot().parents;
    let two = (one_based_path(&p, 0), one_based_path(&p, 1));
    ok &= two.0 == [1, 4, 5, 8, 9, 12] && two.1 == [2, 3, 6, 7, 10, 11, 12];

    let f = path_forest(12, Compaction::OneTry);
    find_one_try(&f, 0, ProcId::new(1));
    let p = f.snapshot().parents;
    let one = (one_based_path(&p, 0), one_based_path(&p, 1));
    ok &= one.0 == [1, 3, 5, 7, 9, 11, 12] && one.1 == [2, 4, 6, 8, 10, 12];

    verdict(
        ok,
        format!(
            "binomial heights for k = 0..10: {heights:?} (script on 2^10: {script_height}); two-try split {:?} / {:?}; one-try split {:?} / {:?}",
            two.0, two.1, one.0, one.1
        ),
    )
}

fn main() {
    // `cargo test -- <filter>` passes arguments; a filter that does not name
    // this target skips it.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let total = Instant::now();
    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut record = |id: u8, name: &'static str, v: Verdict| {
        println!("criterion {id:>2} {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };

    let histories = random_histories();
    record(1, "oracle partition equivalence", criterion_1(&histories));
    record(2, "exhaustive interleavings", criterion_2());
    record(3, "linearization replay", criterion_3(&histories));
    drop(histories);
    record(4, "rank-dcas hard bounds", criterion_4());
    record(5, "randomized rank statistics", criterion_5());
    let (grid, grid_secs) = threaded_grid();
    record(6, "per-operation step bound", criterion_6(&grid));
    record(7, "work bounds", criterion_7(&grid, grid_secs));
    record(8, "lower-bound scenarios", criterion_8());
    record(9, "wake-up properties", criterion_9());
    record(10, "helping equals native DCAS", criterion_10());
    record(11, "scripted constructions", criterion_11());

    let failed: Vec<u8> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        total.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
