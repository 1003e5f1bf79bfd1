//! Online deadline-throughput scheduling on unrelated machines.
//!
//! Two admission policies run on a shared event-driven engine:
//! [`blocking`] commits to every job it admits, [`region`] does not but
//! finishes at least half of what it admits. [`oracle`] computes the exact
//! non-migratory optimum of small instances, and [`verify`] checks runs
//! against the structural guarantees both policies are supposed to satisfy.
//! All times are exact rationals.

pub mod blocking;
pub mod engine;
pub mod export;
pub mod format;
pub mod generate;
pub mod instance;
pub mod interval;
pub mod oracle;
pub mod region;
pub mod time;
pub mod trace;
pub mod verify;

pub use blocking::{derive_params, BlockingParams, BlockingPolicy};
pub use engine::{simulate, EngineError, Policy};
pub use generate::{generate, Profile};
pub use instance::{CommitmentModel, Instance, Job, JobId, MachineId, ProcessingTime};
pub use interval::{Interval, IntervalSet};
pub use region::RegionPolicy;
pub use time::{ratio, Rational, Time};
pub use trace::{Algorithm, AdmissionLog, AdmissionRecord, RunOutput, ScheduleTrace, Threshold};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Params(#[from] blocking::ParamsError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("the region algorithm runs without commitment (got model `{0}`)")]
    RegionNeedsNoCommitment(String),
}

/// Runs `algorithm` on `instance` under `model`.
pub fn run(instance: &Instance, algorithm: Algorithm, model: &CommitmentModel) -> Result<RunOutput, RunError> {
    match algorithm {
        Algorithm::Blocking => blocking::run(instance, model),
        Algorithm::Region => match model {
            CommitmentModel::None => region::run(instance),
            other => Err(RunError::RegionNeedsNoCommitment(other.to_string())),
        },
    }
}
