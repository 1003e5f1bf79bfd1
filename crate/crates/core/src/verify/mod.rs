//! Retrospective verification of finished runs.
//!
//! [`threshold`] rebuilds the per-machine threshold function from the final
//! admission log, [`checks`] holds the individual checks, [`bounds`]
//! compares against the offline optimum, [`mutate`] perturbs artifacts to
//! show the checks are not vacuous, and [`suite`] drives seeded batches.

pub mod bounds;
pub mod checks;
pub mod mutate;
pub mod suite;
pub mod threshold;

use serde::Serialize;

use crate::instance::{CommitmentModel, Instance};
use crate::oracle::Witness;
use crate::trace::{Algorithm, AdmissionLog, ScheduleTrace, ThresholdSample};

pub use bounds::{check_bounds, BoundReport};
pub use checks::Finding;
pub use mutate::Mutation;
pub use threshold::{extract, live_timeline, ThresholdTimeline, TimelineError};

/// Everything a run leaves behind.
#[derive(Debug, Clone, Copy)]
pub struct Artifacts<'a> {
    pub instance: &'a Instance,
    pub model: &'a CommitmentModel,
    pub trace: &'a ScheduleTrace,
    pub log: &'a AdmissionLog,
    pub samples: &'a [ThresholdSample],
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub findings: Vec<Finding>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Runs every applicable check against `timeline`. The volume lemma needs a
/// feasible offline schedule and is skipped without one.
pub fn run_checks(art: &Artifacts<'_>, timeline: &ThresholdTimeline, witness: Option<&Witness>) -> CheckOutcome {
    let Artifacts { instance, model, trace, log, samples } = *art;
    let mut findings = Vec::new();
    findings.extend(checks::check_p1(instance, log));
    findings.extend(checks::check_p2(instance, log, timeline));
    if let Some(w) = witness {
        findings.extend(checks::check_volume_lemma(instance, log, timeline, w));
    }
    findings.extend(checks::check_trace(instance, trace));
    findings.extend(checks::check_log_matches_trace(log, trace));
    let live = live_timeline(instance.machines, samples);
    findings.extend(checks::check_live_thresholds(&live, timeline));
    findings.extend(checks::check_timeline_shape(instance, trace, log, timeline));
    match log.algorithm {
        Algorithm::Blocking => {
            findings.extend(checks::check_blocking_structure(instance, log));
            findings.extend(checks::check_commitment(instance, trace, log, model));
            findings.extend(checks::check_sibling_overlap(log));
        }
        Algorithm::Region => findings.extend(checks::check_half_completion(instance, trace)),
    }
    CheckOutcome { findings }
}

/// Extracts the threshold timeline from the log and runs every check.
pub fn verify_artifacts(
    art: &Artifacts<'_>,
    witness: Option<&Witness>,
) -> Result<(ThresholdTimeline, CheckOutcome), TimelineError> {
    let timeline = extract(art.instance, art.trace, art.log, art.log.algorithm)?;
    let outcome = run_checks(art, &timeline, witness);
    Ok((timeline, outcome))
}

/// True if some check rejects the artifacts after `mutation`. Log mutations
/// rebuild the timeline from the mutated log; an unreadable log counts as
/// caught.
pub fn mutant_caught(
    art: &Artifacts<'_>,
    timeline: &ThresholdTimeline,
    mutation: &Mutation,
    witness: Option<&Witness>,
) -> bool {
    let log = mutation.apply_to_log(art.log);
    let timeline = if mutation.touches_log() {
        match extract(art.instance, art.trace, &log, log.algorithm) {
            Ok(t) => t,
            Err(_) => return true,
        }
    } else {
        mutation.apply_to_timeline(timeline)
    };
    let mutated = Artifacts { log: &log, ..*art };
    !run_checks(&mutated, &timeline, witness).passed()
}
