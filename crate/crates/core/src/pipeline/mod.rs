//! The full computation: stage searches, the assembled context, its
//! canonical forms, intent counts, maximal monoids and conjugacy classes.
//!
//! A run directory holds `stages/`, `checkpoints/`, `contexts/`,
//! `reports/` and `manifest.json`.

mod context;
mod oracle;
mod report;
mod stage;
mod store;

use thiserror::Error;

pub use context::{
    assemble, canonicalize, conjugacy_partition, list_monoids, map_attributes, maximal_monoids, monoid_orbit_count,
    object_label, standard_attributes, trivial_witness, witness_of_label, AssembledContext, AttributeClass,
    AttributeUniverse, Canonical, ConjugacyPartition, MaximalMonoid, TRIVIAL_WITNESS_SEED,
};
pub use oracle::{all_majority_k3, oracle_k3, OracleReport};
pub use report::{
    assemble_stored, load_all_stages, run_all_stages, verify_report, ExpectedFigures, FigureCheck, IntentCounts,
    PipelineReport, StageSummary,
};
pub use stage::{load_stage, run_stage, StageOptions, StageOutcome, DEFAULT_CHUNK_TARGET};
pub use store::{check_manifest, read_sealed, sha256_hex, write_manifest, write_sealed, Layout};

use crate::algebra::AlgebraError;
use crate::fca::FcaError;
use crate::witness::WitnessError;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "CENTMON_WORKERS";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Fca(#[from] FcaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(String),
    #[error("integrity check failed for {path}: {message}")]
    Integrity { path: String, message: String },
    #[error("stage {0} has not been run")]
    MissingStage(String),
    #[error("{0}")]
    Inconsistent(String),
}

/// Worker threads: `CENTMON_WORKERS` if set to a positive integer, else the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
