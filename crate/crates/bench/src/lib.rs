//! Workload generation, threaded and simulated runners, and CSV reports for
//! the `cdsu` command-line harness.

pub mod report;
pub mod runner;
pub mod workload;

pub use report::{emit_csv, Mode, RunReport};
pub use runner::{run_scenario, run_sim, run_threads, RunConfig, RunError, ScenarioParams, ScheduleSource};
pub use workload::{generate_workload, Mix, PairDist, WorkloadSpec};
