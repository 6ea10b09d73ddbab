use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use cdsu_bench::report::emit_csv;
use cdsu_bench::runner::{run_scenario, run_sim, run_sim_recorded, run_threads, RunConfig, ScenarioParams, ScheduleSource, SCENARIOS};
use cdsu_bench::workload::{generate_workload, parse_workload, Mix, PairDist, WorkloadSpec};
use cdsu_bench::RunReport;
use cdsu_core::forest::{Compaction, FlagMode, Linking, Realization};
use cdsu_core::sim::Schedule;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Concurrent disjoint-set union: benchmarks, simulation and checks.
#[derive(Parser)]
#[command(name = "cdsu", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Threaded runs over a parameter grid.
    Bench(BenchArgs),
    /// Simulated runs under a schedule policy, a schedule file or a scenario.
    Sim(SimArgs),
    /// One scripted scenario.
    Scenario(ScenarioArgs),
    /// Random simulated histories checked against the sequential oracle.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LinkArg {
    Index,
    RankDcas,
    RankRand,
}

impl From<LinkArg> for Linking {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Index => Linking::Index,
            LinkArg::RankDcas => Linking::RankDcas,
            LinkArg::RankRand => Linking::RankRandomized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FindArg {
    Naive,
    One,
    Two,
    CondTwo,
}

impl From<FindArg> for Compaction {
    fn from(f: FindArg) -> Self {
        match f {
            FindArg::Naive => Compaction::Naive,
            FindArg::One => Compaction::OneTry,
            FindArg::Two => Compaction::TwoTry,
            FindArg::CondTwo => Compaction::ConditionalTwoTry,
        }
    }
}

/// A size such as `1024`, `2^10`, or for `m` a multiple of `n` like `4n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Size {
    Abs(usize),
    TimesN(usize),
}

impl Size {
    fn resolve(self, n: usize) -> usize {
        match self {
            Size::Abs(v) => v,
            Size::TimesN(k) => k * n,
        }
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad size `{s}`: use 1024, 2^10 or 4n");
        if let Some(k) = s.strip_suffix('n') {
            return if k.is_empty() { Ok(Size::TimesN(1)) } else { k.parse().map(Size::TimesN).map_err(|_| bad()) };
        }
        if let Some((b, e)) = s.split_once('^') {
            let b: usize = b.parse().map_err(|_| bad())?;
            let e: u32 = e.parse().map_err(|_| bad())?;
            return b.checked_pow(e).map(Size::Abs).ok_or_else(bad);
        }
        s.parse().map(Size::Abs).map_err(|_| bad())
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Element counts.
    #[arg(long, value_delimiter = ',', default_value = "2^10")]
    n: Vec<Size>,
    /// Operation counts; `4n` means four times n.
    #[arg(long, value_delimiter = ',', default_value = "4n")]
    m: Vec<Size>,
    /// Process counts.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    p: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "rank-dcas")]
    link: Vec<LinkArg>,
    #[arg(long, value_delimiter = ',', default_value = "two")]
    find: Vec<FindArg>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    /// Relative weights of unite, find and same-set.
    #[arg(long, default_value = "1:1:1")]
    mix: Mix,
    #[arg(long, value_enum, default_value = "uniform")]
    pairs: PairDist,
    /// Workload file with `U x y`, `F x` and `S x y` lines; overrides --m, --mix and --pairs.
    #[arg(long)]
    workload: Option<PathBuf>,
    /// Let the first helper of a randomized link flip its coin.
    #[arg(long)]
    randomized_cas: bool,
    /// Write one CSV row per run.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Append to the CSV file instead of overwriting it.
    #[arg(long)]
    append: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Record the history and check it afterwards.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// round-robin, op-round-robin, lock-step, sequential, random[:seed], or a schedule file.
    #[arg(long, default_value = "random")]
    schedule: String,
    /// Run a scenario instead of a workload.
    #[arg(long)]
    scenario: Option<String>,
    /// Use the simulator's atomic two-word CAS and DCAS for rank links.
    #[arg(long)]
    native: bool,
    /// Accepted for symmetry; simulated runs are always verified.
    #[arg(long)]
    verify: bool,
    /// Store the followed schedule; with a grid, the last run's.
    #[arg(long)]
    save_schedule: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    /// wakeup, log-lowerbound, sqrt-path, sqrt-path-adversary or binomial.
    #[arg(long)]
    scenario: String,
    /// Process count of the wake-up scenario.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    native: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Random histories per configuration.
    #[arg(long, default_value_t = 100)]
    runs: u64,
    #[arg(long)]
    native: bool,
}

/// Distinguishes failed checks (exit 1) from everything else (exit 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct VerificationFailed(String);

struct Point {
    n: usize,
    m: usize,
    p: usize,
    cfg: RunConfig,
}

fn grid(c: &Common, verify: bool, native: bool) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for &n in &c.n {
        let Size::Abs(n) = n else {
            bail!("--n takes absolute sizes, not multiples of n");
        };
        for &m in &c.m {
            for &p in &c.p {
                for &l in &c.link {
                    for &f in &c.find {
                        for &seed in &c.seed {
                            let mut cfg = RunConfig::new(l.into(), f.into(), seed);
                            cfg.verify = verify;
                            if native {
                                cfg.realization = Realization::Native;
                            }
                            if c.randomized_cas {
                                cfg.flag_mode = FlagMode::RandomizedCas;
                            }
                            out.push(Point { n, m: m.resolve(n), p, cfg });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn workload(c: &Common, pt: &Point) -> Result<Vec<Vec<cdsu_core::ops::Op>>> {
    if let Some(path) = &c.workload {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(parse_workload(&text, pt.p)?);
    }
    let spec = WorkloadSpec { n: pt.n, m: pt.m, p: pt.p, mix: c.mix, pairs: c.pairs, seed: pt.cfg.seed };
    if !spec.standing_assumption() {
        eprintln!("warning: m = {} < n = {}; the work bounds assume m >= n", pt.m, pt.n);
    }
    Ok(generate_workload(&spec)?)
}

fn print_report(r: &RunReport) {
    let ratio = r.ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    let status = match &r.verified {
        None => "unchecked".to_string(),
        Some(Ok(())) => "ok".to_string(),
        Some(Err(e)) => format!("FAILED: {e}"),
    };
    println!(
        "n={} m={} p={} link={} find={} seed={} mode={} visits={} cas={} cas_fail={} max_rank={} max_op_visits={} wall_ms={:.1} ratio={} {}",
        r.n,
        r.m,
        r.p,
        r.link.name(),
        r.find.name(),
        r.seed,
        r.mode.label(),
        r.total.visits,
        r.total.cas_attempts,
        r.total.cas_failures,
        r.max_rank,
        r.max_op_visits,
        r.wall_ms,
        ratio,
        status
    );
}

fn finish(c: &Common, reports: &[RunReport]) -> Result<()> {
    if let Some(path) = &c.csv {
        emit_csv(reports, path, c.append)?;
    }
    let failed: Vec<String> = reports
        .iter()
        .filter_map(|r| match &r.verified {
            Some(Err(e)) => Some(format!("{} {} seed {}: {e}", r.link.name(), r.find.name(), r.seed)),
            _ => None,
        })
        .collect();
    if !failed.is_empty() {
        return Err(VerificationFailed(failed.join("; ")).into());
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    let mut reports = Vec::new();
    for pt in grid(&a.common, a.verify, false)? {
        if pt.p > cores {
            eprintln!("warning: p = {} exceeds the {cores} available cores", pt.p);
        }
        let w = workload(&a.common, &pt)?;
        let r = run_threads(pt.n, &w, &pt.cfg)?;
        print_report(&r);
        reports.push(r);
    }
    finish(&a.common, &reports)
}

fn scenario_once(c: &Common, name: &str, k: Option<usize>, native: bool) -> Result<()> {
    let mut reports = Vec::new();
    let mut broken = Vec::new();
    for pt in grid(c, true, native)? {
        let o = run_scenario(name, ScenarioParams { n: pt.n, p: pt.p, m: pt.m, k }, &pt.cfg)?;
        println!("{}", serde_json::to_string(&o.details)?);
        print_report(&o.report);
        if !o.property_held {
            broken.push(format!("{name} seed {}: expected property does not hold", pt.cfg.seed));
        }
        reports.push(o.report);
    }
    finish(c, &reports)?;
    if !broken.is_empty() {
        return Err(VerificationFailed(broken.join("; ")).into());
    }
    Ok(())
}

fn sim(a: SimArgs) -> Result<()> {
    if let Some(name) = &a.scenario {
        return scenario_once(&a.common, name, None, a.native);
    }
    let file = match a.schedule.parse::<ScheduleSource>() {
        Ok(_) => None,
        Err(_) => {
            let text = std::fs::read_to_string(&a.schedule)
                .with_context(|| format!("`{}` is neither a schedule policy nor a readable file", a.schedule))?;
            Some(Schedule::parse(&text)?)
        }
    };
    let mut reports = Vec::new();
    for pt in grid(&a.common, true, a.native)? {
        let source = match (&file, a.schedule.parse::<ScheduleSource>()) {
            (Some(s), _) => ScheduleSource::File(s.clone()),
            (None, Ok(ScheduleSource::Random(0))) if a.schedule == "random" => ScheduleSource::Random(pt.cfg.seed),
            (None, Ok(src)) => src,
            (None, Err(e)) => bail!(e),
        };
        let w = workload(&a.common, &pt)?;
        let (r, followed) = run_sim_recorded(pt.n, &w, &pt.cfg, &source)?;
        if let Some(path) = &a.save_schedule {
            std::fs::write(path, followed.to_text()).with_context(|| format!("writing {}", path.display()))?;
        }
        print_report(&r);
        reports.push(r);
    }
    finish(&a.common, &reports)
}

fn verify(a: VerifyArgs) -> Result<()> {
    let mut reports = Vec::new();
    let mut failures = 0;
    for pt in grid(&a.common, true, a.native)? {
        let mut total = cdsu_core::forest::WorkCounters::default();
        let mut last = None;
        for run in 0..a.runs {
            let seed = pt.cfg.seed.wrapping_mul(1_000_003).wrapping_add(run);
            let cfg = RunConfig { seed, ..pt.cfg };
            let w = workload(&a.common, &Point { cfg, ..pt })?;
            let r = run_sim(pt.n, &w, &cfg, &ScheduleSource::Random(seed))?;
            if let Some(Err(e)) = &r.verified {
                eprintln!("seed {seed}: {e}");
                failures += 1;
            }
            total = total + r.total;
            last = Some(r);
        }
        if let Some(mut r) = last {
            println!(
                "{} {} n={} p={} m={}: {} runs, {} visits",
                r.link.name(),
                r.find.name(),
                pt.n,
                pt.p,
                pt.m,
                a.runs,
                total.visits
            );
            r.total = total;
            r.seed = pt.cfg.seed;
            reports.push(r);
        }
    }
    if let Some(path) = &a.common.csv {
        emit_csv(&reports, path, a.common.append)?;
    }
    if failures > 0 {
        return Err(VerificationFailed(format!("{failures} histories failed")).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Bench(a) => bench(a),
        Cmd::Sim(a) => sim(a),
        Cmd::Scenario(a) => {
            if !SCENARIOS.contains(&a.scenario.as_str()) {
                eprintln!("error: unknown scenario `{}`; expected one of {}", a.scenario, SCENARIOS.join(", "));
                return ExitCode::from(2);
            }
            scenario_once(&a.common, &a.scenario, a.k, a.native)
        }
        Cmd::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("verification failed: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
