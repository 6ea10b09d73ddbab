//! Operation lists for the runners: generated from a [`WorkloadSpec`] or read
//! from a workload file.

use std::fmt::Write as _;
use std::str::FromStr;

use cdsu_core::forest::Node;
use cdsu_core::ops::Op;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("invalid mix `{0}`: expected u:f:s with nonnegative weights, not all zero")]
    Mix(String),
    #[error("invalid workload: {0}")]
    Spec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Relative weights of unite, find and same-set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mix {
    pub unite: f64,
    pub find: f64,
    pub same_set: f64,
}

impl Mix {
    pub const UNITE_ONLY: Mix = Mix { unite: 1.0, find: 0.0, same_set: 0.0 };

    pub fn new(unite: f64, find: f64, same_set: f64) -> Result<Self, WorkloadError> {
        let ws = [unite, find, same_set];
        let total: f64 = ws.iter().sum();
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) || total <= 0.0 {
            return Err(WorkloadError::Mix(format!("{unite}:{find}:{same_set}")));
        }
        Ok(Mix { unite: unite / total, find: find / total, same_set: same_set / total })
    }
}

impl FromStr for Mix {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [u, f, q] = parts[..] else {
            return Err(WorkloadError::Mix(s.into()));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| WorkloadError::Mix(s.into()));
        Mix::new(num(u)?, num(f)?, num(q)?)
    }
}

/// How the two nodes of an operation are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PairDist {
    /// Both nodes uniform.
    Uniform,
    /// One node uniform, the other from the first `⌈√n⌉` nodes half the time.
    /// Produces a few large components early.
    Biased,
    /// Unites follow the binomial-tree script on all `n` nodes, then uniform.
    Binomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub mix: Mix,
    pub pairs: PairDist,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.n == 0 || self.p == 0 {
            return Err(WorkloadError::Spec(format!("n = {} and p = {} must be positive", self.n, self.p)));
        }
        Mix::new(self.mix.unite, self.mix.find, self.mix.same_set)?;
        Ok(())
    }

    /// Whether `m ≥ n`, the regime the work bounds are stated for.
    pub fn standing_assumption(&self) -> bool {
        self.m >= self.n
    }
}

/// Unite pairs of the binomial construction on `0..n`: in round `r`, node
/// `i + 2^(r-1) - 1` joins `i + 2^r - 1` for every multiple `i` of `2^r`
/// below the largest power of two `k ≤ n`; the remaining nodes then join
/// `k - 1`. Under deterministic rank linking the roots after each round are
/// exactly the second nodes of the pairs.
pub fn binomial_script(n: usize) -> Vec<(Node, Node)> {
    if n < 2 {
        return Vec::new();
    }
    let k = 1usize << n.ilog2();
    let mut out = Vec::with_capacity(n - 1);
    for r in 1..=k.ilog2() {
        let step = 1usize << r;
        let half = step / 2;
        for i in (0..k).step_by(step) {
            out.push((i + half - 1, i + step - 1));
        }
    }
    out.extend((k..n).map(|x| (x, k - 1)));
    out
}

fn draw_pair(rng: &mut ChaCha8Rng, n: usize, dist: PairDist) -> (Node, Node) {
    let x = rng.gen_range(0..n);
    let y = match dist {
        PairDist::Biased if rng.gen_bool(0.5) => rng.gen_range(0..(n as f64).sqrt().ceil() as usize),
        _ => rng.gen_range(0..n),
    };
    (x, y)
}

/// Draws `m` operations and deals them round-robin to `p` processes.
pub fn generate_workload(spec: &WorkloadSpec) -> Result<Vec<Vec<Op>>, WorkloadError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let script = if spec.pairs == PairDist::Binomial { binomial_script(spec.n) } else { Vec::new() };
    let mut next_scripted = 0;
    let mut out = vec![Vec::with_capacity(spec.m / spec.p + 1); spec.p];
    for i in 0..spec.m {
        let t: f64 = rng.gen();
        let op = if t < spec.mix.unite {
            let (x, y) = match script.get(next_scripted) {
                Some(&pair) => {
                    next_scripted += 1;
                    pair
                }
                None => draw_pair(&mut rng, spec.n, spec.pairs),
            };
            Op::Unite(x, y)
        } else if t < spec.mix.unite + spec.mix.find {
            Op::Find(draw_pair(&mut rng, spec.n, spec.pairs).0)
        } else {
            let (x, y) = draw_pair(&mut rng, spec.n, spec.pairs);
            Op::SameSet(x, y)
        };
        out[i % spec.p].push(op);
    }
    Ok(out)
}

/// Parses `U x y`, `F x` and `S x y` lines, each optionally prefixed by
/// `@proc`. Unprefixed operations are dealt round-robin to the `p` processes.
pub fn parse_workload(text: &str, p: usize) -> Result<Vec<Vec<Op>>, WorkloadError> {
    if p == 0 {
        return Err(WorkloadError::Spec("p must be positive".into()));
    }
    let mut out = vec![Vec::new(); p];
    let mut dealt = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| WorkloadError::Parse { line: i + 1, msg };
        let mut toks: Vec<&str> = line.split_whitespace().collect();
        let proc = match toks[0].strip_prefix('@') {
            Some(id) => {
                let id: usize = id.parse().map_err(|_| err(format!("bad process `{}`", toks[0])))?;
                if id == 0 || id > p {
                    return Err(err(format!("process {id} outside 1..={p}")));
                }
                toks.remove(0);
                id - 1
            }
            None => {
                dealt += 1;
                (dealt - 1) % p
            }
        };
        let node = |t: Option<&&str>| -> Result<Node, WorkloadError> {
            let t = t.ok_or_else(|| err("missing node".into()))?;
            t.parse().map_err(|_| err(format!("bad node `{t}`")))
        };
        let arity = match toks.first().copied() {
            Some("F") => 1,
            Some("U") | Some("S") => 2,
            other => return Err(err(format!("unknown operation {other:?}"))),
        };
        if toks.len() != arity + 1 {
            return Err(err(format!("expected {arity} node(s)")));
        }
        let op = match toks[0] {
            "F" => Op::Find(node(toks.get(1))?),
            "U" => Op::Unite(node(toks.get(1))?, node(toks.get(2))?),
            _ => Op::SameSet(node(toks.get(1))?, node(toks.get(2))?),
        };
        out[proc].push(op);
    }
    Ok(out)
}

/// Inverse of [`parse_workload`], with explicit process prefixes.
pub fn format_workload(programs: &[Vec<Op>]) -> String {
    let mut s = String::new();
    for (i, prog) in programs.iter().enumerate() {
        for op in prog {
            let _ = match *op {
                Op::Find(x) => writeln!(s, "@{} F {x}", i + 1),
                Op::Unite(x, y) => writeln!(s, "@{} U {x} {y}", i + 1),
                Op::SameSet(x, y) => writeln!(s, "@{} S {x} {y}", i + 1),
            };
        }
    }
    s
}

/// Largest node any operation mentions.
pub fn max_node(programs: &[Vec<Op>]) -> Option<Node> {
    programs.iter().flatten().flat_map(|op| op.nodes()).max()
}
