//! Concurrent disjoint-set union with splitting finds, three linking rules,
//! a CAS-only helping protocol, and a deterministic step-level simulator.
//!
//! Every operation is written once as a resumable step machine that performs
//! exactly one shared-memory access per step. Real threads drive the machines
//! to completion back to back; the simulator interleaves them under an
//! explicit schedule.

pub mod ackermann;
pub mod error;
pub mod forest;
pub mod helping;
pub mod linking;
pub mod ops;
pub mod rng;
pub mod sim;
pub mod step;
pub mod verify;

pub use error::{Error, Result};
pub use forest::{
    ClaimRole, Compaction, FlagMode, Forest, ForestConfig, Linking, Node, ProcId, Realization,
    RankWord, Snapshot,
};
pub use ops::{Answer, Op, OpRecord};
