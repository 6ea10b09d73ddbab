use std::fs::OpenOptions;
use std::path::Path;

use cdsu_core::ackermann::{work_bound, WorkBoundParams};
use cdsu_core::forest::{Compaction, Linking, WorkCounters};
use serde::{Deserialize, Serialize};

/// How a run was driven.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Threads,
    /// Simulated under the named schedule source.
    Sim(String),
    /// A named scripted scenario.
    Scenario(String),
}

impl Mode {
    pub fn label(&self) -> String {
        match self {
            Mode::Threads => "threads".into(),
            Mode::Sim(s) => format!("sim:{s}"),
            Mode::Scenario(s) => format!("scenario:{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub link: Linking,
    pub find: Compaction,
    pub seed: u64,
    pub mode: Mode,
    pub per_proc: Vec<WorkCounters>,
    pub total: WorkCounters,
    /// Most visits made by a single operation.
    pub max_op_visits: u64,
    pub max_rank: u32,
    pub wall_ms: f64,
    /// `total.visits / work_bound`, absent for naive finds.
    pub ratio: Option<f64>,
    /// Result of the post-hoc checks, when they ran.
    pub verified: Option<Result<(), String>>,
}

impl RunReport {
    pub fn verification_failed(&self) -> bool {
        matches!(self.verified, Some(Err(_)))
    }
}

/// `visits / work_bound(n, m, p)` for splitting finds.
pub fn bound_ratio(n: usize, m: usize, p: usize, find: Compaction, visits: u64) -> Option<f64> {
    let params = WorkBoundParams::new(n as u64, m as u64, p as u64, find).ok()?;
    let bound = work_bound(&params).ok()?;
    Some(visits as f64 / bound)
}

/// One CSV row; field order is the column order.
#[derive(Debug, Serialize)]
struct Row<'a> {
    n: usize,
    m: usize,
    p: usize,
    link: &'a str,
    find: &'a str,
    seed: u64,
    mode: String,
    total_visits: u64,
    total_cas: u64,
    cas_failures: u64,
    max_rank: u32,
    wall_ms: String,
    ratio: String,
}

pub const CSV_HEADER: &str = "n,m,p,link,find,seed,mode,total_visits,total_cas,cas_failures,max_rank,wall_ms,ratio";

impl<'a> From<&'a RunReport> for Row<'a> {
    fn from(r: &'a RunReport) -> Self {
        Row {
            n: r.n,
            m: r.m,
            p: r.p,
            link: r.link.name(),
            find: r.find.name(),
            seed: r.seed,
            mode: r.mode.label(),
            total_visits: r.total.visits,
            total_cas: r.total.cas_attempts,
            cas_failures: r.total.cas_failures,
            max_rank: r.max_rank,
            wall_ms: format!("{:.3}", r.wall_ms),
            ratio: r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("no reports to write")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Writes the header and one row per report. With `append`, rows go after an
/// existing file's contents and the header is written only if it is empty.
pub fn emit_csv(reports: &[RunReport], path: &Path, append: bool) -> Result<(), CsvError> {
    if reports.is_empty() {
        return Err(CsvError::Empty);
    }
    let io = |source| CsvError::Io { path: path.display().to_string(), source };
    let file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path).map_err(io)?;
    let fresh = file.metadata().map_err(io)?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in reports {
        w.serialize(Row::from(r))?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
