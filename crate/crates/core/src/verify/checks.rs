//! Executable checks over a finished run.
//!
//! Every check is a pure function of the instance, the schedule trace, the
//! admission log and (where needed) a threshold timeline or an offline
//! witness. Each returns the list of counterexamples it found.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::blocking::{commit_check, CommitViolation};
use crate::instance::{CommitmentModel, Instance, JobId, MachineId};
use crate::oracle::{witness_completions, Witness};
use crate::time::{ratio, Rational, Time};
use crate::trace::{Algorithm, AdmissionLog, ScheduleTrace, Threshold};

use super::threshold::ThresholdTimeline;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum Finding {
    /// Admitted to a machine the job cannot run on.
    Ineligible { job: JobId, machine: MachineId },
    /// Admitted while not available (P1).
    NotAvailable { job: JobId, machine: MachineId, at: Time, reason: String },
    /// An available, non-admitted job below the threshold (P2).
    BelowThreshold { job: JobId, machine: MachineId, at: Time, p: Time, threshold: Threshold },
    VolumeLemma {
        machine: MachineId,
        x: JobId,
        y: Vec<JobId>,
        theta1: Time,
        theta2: Time,
        p: Time,
        threshold: Threshold,
    },
    IntervalLength { job: JobId, length: Time, lower: Time, upper: Time },
    MissingInterval { job: JobId },
    BlockingShape { job: JobId, detail: String },
    BlockingTooLong { job: JobId, length: Time, cap: Time },
    ParentMachine { job: JobId, parent: JobId },
    NotContained { job: JobId, parent: JobId, detail: String },
    ParentTooShort { job: JobId, parent: JobId },
    IntervalEndOrigin { job: JobId, end: Time },
    UnknownParent { job: JobId, parent: JobId },
    Commitment { violation: CommitViolation },
    SegmentOverlap { machine: MachineId, at: Time },
    EmptySegment { machine: MachineId, job: JobId, at: Time },
    Migration { job: JobId },
    RunsBeforeAdmission { job: JobId, start: Time, admitted: Time },
    WorkMismatch { job: JobId, expected: Time, processed: Time },
    CompletionMismatch { job: JobId, detail: String },
    LogTraceMismatch { job: JobId, detail: String },
    LiveThresholdMismatch { machine: MachineId, at: Time, live: Threshold, retrospective: Threshold },
    TimelineShape { machine: MachineId, detail: String },
    TooManyPieces { machine: MachineId, pieces: usize, cap: usize },
    HalfCompletion { admitted: usize, finished: usize },
    SiblingOverlap { first: JobId, second: JobId },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Ineligible { job, machine } => {
                write!(f, "job {job} admitted to machine {machine} where it is not eligible")
            }
            Finding::NotAvailable { job, machine, at, reason } => {
                write!(f, "job {job} admitted to machine {machine} at {at} while unavailable: {reason}")
            }
            Finding::BelowThreshold { job, machine, at, p, threshold } => write!(
                f,
                "job {job} available for machine {machine} at {at} with p = {p} < u = {threshold} but not admitted"
            ),
            Finding::VolumeLemma { machine, x, y, theta1, theta2, p, threshold } => write!(
                f,
                "machine {machine}: x = {x}, Y = {y:?}, [{theta1}, {theta2}] satisfy the volume hypotheses but p = {p} < u = {threshold}"
            ),
            Finding::IntervalLength { job, length, lower, upper } => {
                write!(f, "job {job}: |S| = {length} outside [{lower}, {upper}]")
            }
            Finding::MissingInterval { job } => write!(f, "job {job}: record lacks a scheduling interval"),
            Finding::BlockingShape { job, detail } => write!(f, "job {job}: blocking period {detail}"),
            Finding::BlockingTooLong { job, length, cap } => {
                write!(f, "job {job}: |B| = {length} exceeds beta*p = {cap}")
            }
            Finding::ParentMachine { job, parent } => {
                write!(f, "job {job} and its parent {parent} are on different machines")
            }
            Finding::NotContained { job, parent, detail } => {
                write!(f, "job {job}: {detail} not inside S({parent})")
            }
            Finding::ParentTooShort { job, parent } => {
                write!(f, "job {job} is not shorter than gamma times its parent {parent}")
            }
            Finding::IntervalEndOrigin { job, end } => write!(
                f,
                "job {job}: e = {end} is not a_k + (1+delta)p_k for any k in its subtree"
            ),
            Finding::UnknownParent { job, parent } => write!(f, "job {job}: parent {parent} has no record"),
            Finding::Commitment { violation } => write!(f, "{violation}"),
            Finding::SegmentOverlap { machine, at } => write!(f, "machine {machine}: segments overlap at {at}"),
            Finding::EmptySegment { machine, job, at } => {
                write!(f, "machine {machine}: empty segment of job {job} at {at}")
            }
            Finding::Migration { job } => write!(f, "job {job} runs on more than one machine"),
            Finding::RunsBeforeAdmission { job, start, admitted } => {
                write!(f, "job {job} runs at {start} before its admission at {admitted}")
            }
            Finding::WorkMismatch { job, expected, processed } => {
                write!(f, "job {job}: processed {processed}, expected {expected}")
            }
            Finding::CompletionMismatch { job, detail } => write!(f, "job {job}: completion {detail}"),
            Finding::LogTraceMismatch { job, detail } => write!(f, "job {job}: log and trace disagree ({detail})"),
            Finding::LiveThresholdMismatch { machine, at, live, retrospective } => write!(
                f,
                "machine {machine} at {at}: live threshold {live} but retrospective {retrospective}"
            ),
            Finding::TimelineShape { machine, detail } => write!(f, "machine {machine}: threshold timeline {detail}"),
            Finding::TooManyPieces { machine, pieces, cap } => {
                write!(f, "machine {machine}: {pieces} threshold pieces exceed {cap}")
            }
            Finding::HalfCompletion { admitted, finished } => {
                write!(f, "only {finished} of {admitted} admitted jobs finished on time")
            }
            Finding::SiblingOverlap { first, second } => {
                write!(f, "siblings {first} and {second} have overlapping intervals")
            }
        }
    }
}

fn admission_times(log: &AdmissionLog) -> BTreeMap<JobId, Time> {
    log.records.iter().map(|r| (r.job, r.admitted_at.clone())).collect()
}

/// Every admission respects eligibility and availability at `a_j`.
pub fn check_p1(instance: &Instance, log: &AdmissionLog) -> Vec<Finding> {
    let delta = &log.params.delta;
    let admitted = admission_times(log);
    let mut out = Vec::new();
    for rec in &log.records {
        let job = &instance.jobs[rec.job];
        let Some(p) = job.processing(rec.machine) else {
            out.push(Finding::Ineligible { job: rec.job, machine: rec.machine });
            continue;
        };
        let at = &rec.admitted_at;
        let reason = if job.release > *at {
            Some(format!("released at {}", job.release))
        } else if !crate::instance::fits_before_deadline(job, p, at, delta) {
            Some(format!("d - a = {} < (1+delta)p", &job.deadline - at))
        } else if admitted[&rec.job] != *at {
            Some("admitted twice".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            out.push(Finding::NotAvailable { job: rec.job, machine: rec.machine, at: at.clone(), reason });
        }
    }
    out
}

/// Jobs available but not admitted at `τ` are no shorter than `u_τ`.
///
/// Availability and `u` are both constant between consecutive points of
/// timeline breakpoints, releases and admission times, so checking there is
/// exhaustive. A job admitted at `τ` counts as admitted at `τ`.
pub fn check_p2(instance: &Instance, log: &AdmissionLog, timeline: &ThresholdTimeline) -> Vec<Finding> {
    let delta = &log.params.delta;
    let admitted = admission_times(log);
    let mut grid: BTreeSet<Time> = instance.jobs.iter().map(|j| j.release.clone()).collect();
    grid.extend(admitted.values().cloned());
    for tl in &timeline.machines {
        grid.extend(tl.breakpoints().cloned());
    }
    let mut out = Vec::new();
    for tau in &grid {
        for (machine, tl) in timeline.machines.iter().enumerate() {
            let u = tl.value_at(tau);
            for job in &instance.jobs {
                let Some(p) = job.processing(machine) else { continue };
                let taken = |j: JobId| admitted.get(&j).is_some_and(|a| a <= tau);
                let available = instance
                    .available(job.id, machine, tau, delta, taken)
                    .expect("eligible");
                if available && !u.admits_not(p) {
                    out.push(Finding::BelowThreshold {
                        job: job.id,
                        machine,
                        at: tau.clone(),
                        p: p.clone(),
                        threshold: u.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Non-admitted jobs of a feasible schedule are large wherever that
/// schedule was busy with jobs released later.
///
/// For each machine `i`, each witness job `x` on `i` that the algorithm never
/// admitted and each candidate `ϑ₁` (a release of a non-admitted witness job
/// on `i`, at most `r_x`), `Y` is the maximal set of non-admitted witness
/// jobs on `i` other than `x` released at or after `ϑ₁` and completing (in
/// the EDF realization) no later than `x`. Every `ϑ₂ ∈ [max(ϑ₁, r_x),
/// ϑ₁ + vol(Y)·(ε−δ)/ε]` must then satisfy `p_x ≥ u(ϑ₂)`; it suffices to
/// test the left end of each constant piece of `u` in that range. Any
/// smaller `Y` or earlier `ϑ₁` only shrinks the range, so this covers every
/// subset. `ϑ₂ < r_x` is excluded: the argument needs `x` to be released.
pub fn check_volume_lemma(
    instance: &Instance,
    log: &AdmissionLog,
    timeline: &ThresholdTimeline,
    witness: &Witness,
) -> Vec<Finding> {
    let eps = &log.params.epsilon;
    let shrink = (eps - &log.params.delta) / eps;
    let admitted: BTreeSet<JobId> = log.records.iter().map(|r| r.job).collect();
    let completion = witness_completions(instance, witness);
    let mut out = Vec::new();
    for (&machine, jobs) in witness {
        let free: Vec<JobId> = jobs.iter().copied().filter(|j| !admitted.contains(j)).collect();
        let tl = &timeline.machines[machine];
        for &x in &free {
            let p = instance.processing(x, machine).expect("eligible");
            let r_x = &instance.jobs[x].release;
            let starts: BTreeSet<&Time> = free
                .iter()
                .map(|&j| &instance.jobs[j].release)
                .filter(|r| *r <= r_x)
                .collect();
            for theta1 in starts {
                let y: Vec<JobId> = free
                    .iter()
                    .copied()
                    .filter(|&j| j != x && instance.jobs[j].release >= *theta1 && completion[&j] <= completion[&x])
                    .collect();
                let volume: Time = y
                    .iter()
                    .map(|&j| instance.processing(j, machine).expect("eligible").clone())
                    .sum();
                let last = theta1 + &volume.scale(&shrink);
                if *r_x > last {
                    continue;
                }
                let first = r_x.clone();
                let mut probes = vec![first.clone()];
                probes.extend(tl.breakpoints().filter(|b| **b > first && **b <= last).cloned());
                for theta2 in probes {
                    let u = tl.value_at(&theta2);
                    if !u.admits_not(p) {
                        out.push(Finding::VolumeLemma {
                            machine,
                            x,
                            y: y.clone(),
                            theta1: theta1.clone(),
                            theta2,
                            p: p.clone(),
                            threshold: u.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Scheduling-interval and blocking-period structure of a blocking run.
pub fn check_blocking_structure(instance: &Instance, log: &AdmissionLog) -> Vec<Finding> {
    let params = &log.params;
    let one = Rational::one();
    let delta = &params.delta;
    let gamma = &params.admit_factor;
    let beta = params.beta.clone().unwrap_or_else(|| ratio(0, 1));
    let by_job: BTreeMap<JobId, &crate::trace::AdmissionRecord> = log.records.iter().map(|r| (r.job, r)).collect();
    let p_of = |job: JobId, machine: MachineId| instance.processing(job, machine).cloned();
    let mut children: BTreeMap<JobId, Vec<JobId>> = BTreeMap::new();
    for rec in &log.records {
        if let Some(parent) = rec.parent {
            children.entry(parent).or_default().push(rec.job);
        }
    }
    let mut out = Vec::new();
    for rec in &log.records {
        let Some(p) = p_of(rec.job, rec.machine) else {
            out.push(Finding::Ineligible { job: rec.job, machine: rec.machine });
            continue;
        };
        let Some(e) = rec.interval_end.clone() else {
            out.push(Finding::MissingInterval { job: rec.job });
            continue;
        };
        let length = &e - &rec.admitted_at;
        let lower = p.scale(&(&one + delta));
        let upper = p.scale(&(&one + delta + delta));
        if length < lower || length > upper {
            out.push(Finding::IntervalLength { job: rec.job, length, lower, upper });
        }

        let mut previous_end: Option<&Time> = None;
        for b in &rec.blocking {
            let shape = if b.is_empty() {
                Some(format!("has an empty part [{}, {})", b.start, b.end))
            } else if b.start < e {
                Some(format!("starts at {} before e = {e}", b.start))
            } else if previous_end.is_some_and(|pe| b.start <= *pe) {
                Some("parts are not sorted and separated".to_string())
            } else {
                None
            };
            if let Some(detail) = shape {
                out.push(Finding::BlockingShape { job: rec.job, detail });
            }
            previous_end = Some(&b.end);
        }
        let blocked: Time = rec.blocking.iter().map(|b| b.len()).sum();
        let cap = p.scale(&beta);
        if blocked > cap {
            out.push(Finding::BlockingTooLong { job: rec.job, length: blocked, cap });
        }

        // e_j is the natural end of some job in j's subtree.
        let mut stack = vec![rec.job];
        let mut origin = false;
        while let Some(k) = stack.pop() {
            let rk = by_job[&k];
            if let Some(pk) = p_of(k, rk.machine) {
                if rk.admitted_at.clone() + pk.scale(&(&one + delta)) == e {
                    origin = true;
                    break;
                }
            }
            stack.extend(children.get(&k).into_iter().flatten().copied());
        }
        if !origin {
            out.push(Finding::IntervalEndOrigin { job: rec.job, end: e.clone() });
        }

        let Some(parent) = rec.parent else { continue };
        let Some(prec) = by_job.get(&parent) else {
            out.push(Finding::UnknownParent { job: rec.job, parent });
            continue;
        };
        if prec.machine != rec.machine {
            out.push(Finding::ParentMachine { job: rec.job, parent });
            continue;
        }
        if let Some(pp) = p_of(parent, prec.machine) {
            if p >= pp.scale(gamma) {
                out.push(Finding::ParentTooShort { job: rec.job, parent });
            }
        }
        let Some(pe) = prec.interval_end.as_ref() else { continue };
        if rec.admitted_at < prec.admitted_at || e > *pe {
            out.push(Finding::NotContained {
                job: rec.job,
                parent,
                detail: format!("S = [{}, {e})", rec.admitted_at),
            });
        }
        for b in &rec.blocking {
            if b.start < prec.admitted_at || b.end > *pe {
                out.push(Finding::NotContained {
                    job: rec.job,
                    parent,
                    detail: format!("blocking part [{}, {})", b.start, b.end),
                });
            }
        }
    }
    out
}

/// Children of one parent claim pairwise disjoint parts of its scheduling
/// interval: neither scheduling intervals nor blocking periods of siblings
/// overlap.
pub fn check_sibling_overlap(log: &AdmissionLog) -> Vec<Finding> {
    let mut by_parent: BTreeMap<Option<JobId>, Vec<&crate::trace::AdmissionRecord>> = BTreeMap::new();
    for rec in &log.records {
        if rec.parent.is_some() {
            by_parent.entry(rec.parent).or_default().push(rec);
        }
    }
    let mut out = Vec::new();
    for kids in by_parent.values() {
        let claims: Vec<(JobId, Vec<crate::interval::Interval>)> = kids
            .iter()
            .map(|r| {
                let mut parts: Vec<_> = r.scheduling_interval().into_iter().collect();
                parts.extend(r.blocking.iter().cloned());
                (r.job, parts)
            })
            .collect();
        for (i, (a, pa)) in claims.iter().enumerate() {
            for (b, pb) in &claims[i + 1..] {
                if pa.iter().any(|x| pb.iter().any(|y| x.overlaps(y))) {
                    out.push(Finding::SiblingOverlap { first: *a, second: *b });
                }
            }
        }
    }
    out
}

pub fn check_commitment(
    instance: &Instance,
    trace: &ScheduleTrace,
    log: &AdmissionLog,
    model: &CommitmentModel,
) -> Vec<Finding> {
    commit_check(instance, trace, log, model)
        .into_iter()
        .map(|violation| Finding::Commitment { violation })
        .collect()
}

/// Segments are disjoint per machine, non-migratory, start after admission,
/// and add up to exactly the processing time of every completed job.
pub fn check_trace(instance: &Instance, trace: &ScheduleTrace) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut machine_of: BTreeMap<JobId, MachineId> = BTreeMap::new();
    let mut processed: BTreeMap<JobId, Time> = BTreeMap::new();
    let mut last_end: BTreeMap<JobId, Time> = BTreeMap::new();
    for machine in 0..trace.machines {
        let mut previous: Option<&Time> = None;
        for seg in trace.segments_on(machine) {
            if seg.end <= seg.start {
                out.push(Finding::EmptySegment { machine, job: seg.job, at: seg.start.clone() });
            }
            if previous.is_some_and(|pe| seg.start < *pe) {
                out.push(Finding::SegmentOverlap { machine, at: seg.start.clone() });
            }
            previous = Some(&seg.end);
            if *machine_of.entry(seg.job).or_insert(machine) != machine {
                out.push(Finding::Migration { job: seg.job });
            }
            match trace.admissions.get(&seg.job) {
                Some(adm) if adm.machine != machine => out.push(Finding::Migration { job: seg.job }),
                Some(adm) if seg.start < adm.at => out.push(Finding::RunsBeforeAdmission {
                    job: seg.job,
                    start: seg.start.clone(),
                    admitted: adm.at.clone(),
                }),
                None => out.push(Finding::LogTraceMismatch {
                    job: seg.job,
                    detail: "runs without an admission".into(),
                }),
                _ => {}
            }
            *processed.entry(seg.job).or_insert_with(Time::zero) += &(&seg.end - &seg.start);
            let end = last_end.entry(seg.job).or_insert_with(|| seg.end.clone());
            if seg.end > *end {
                *end = seg.end.clone();
            }
        }
    }
    for (&job, adm) in &trace.admissions {
        let Some(p) = instance.processing(job, adm.machine) else {
            out.push(Finding::Ineligible { job, machine: adm.machine });
            continue;
        };
        let done = processed.get(&job).cloned().unwrap_or_else(Time::zero);
        match trace.completions.get(&job) {
            Some(c) => {
                if done != *p {
                    out.push(Finding::WorkMismatch { job, expected: p.clone(), processed: done });
                }
                if last_end.get(&job) != Some(c) {
                    out.push(Finding::CompletionMismatch {
                        job,
                        detail: format!("{c} is not the end of its last segment"),
                    });
                }
            }
            None => out.push(Finding::CompletionMismatch { job, detail: "missing".into() }),
        }
    }
    for &job in trace.completions.keys() {
        if !trace.admissions.contains_key(&job) {
            out.push(Finding::CompletionMismatch { job, detail: "recorded for a job never admitted".into() });
        }
    }
    out
}

/// The admission log and the trace describe the same admissions.
pub fn check_log_matches_trace(log: &AdmissionLog, trace: &ScheduleTrace) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in &log.records {
        if !seen.insert(rec.job) {
            out.push(Finding::LogTraceMismatch { job: rec.job, detail: "logged twice".into() });
        }
        match trace.admissions.get(&rec.job) {
            None => out.push(Finding::LogTraceMismatch { job: rec.job, detail: "not admitted in the trace".into() }),
            Some(adm) if adm.machine != rec.machine || adm.at != rec.admitted_at => {
                out.push(Finding::LogTraceMismatch {
                    job: rec.job,
                    detail: format!(
                        "log says machine {} at {}, trace says machine {} at {}",
                        rec.machine, rec.admitted_at, adm.machine, adm.at
                    ),
                })
            }
            _ => {}
        }
    }
    for &job in trace.admissions.keys() {
        if !seen.contains(&job) {
            out.push(Finding::LogTraceMismatch { job, detail: "missing from the log".into() });
        }
    }
    out
}

/// The thresholds the policy reported while running equal the ones rebuilt
/// from the final log, at every instant.
pub fn check_live_thresholds(live: &ThresholdTimeline, retrospective: &ThresholdTimeline) -> Vec<Finding> {
    let mut out = Vec::new();
    for (machine, (a, b)) in live.machines.iter().zip(&retrospective.machines).enumerate() {
        let points: BTreeSet<&Time> = a.breakpoints().chain(b.breakpoints()).collect();
        for t in points {
            let (l, r) = (a.value_at(t), b.value_at(t));
            if l != r {
                out.push(Finding::LiveThresholdMismatch {
                    machine,
                    at: t.clone(),
                    live: l.clone(),
                    retrospective: r.clone(),
                });
                break;
            }
        }
    }
    out
}

/// Breakpoints sit only where the definition allows them, values are drawn
/// from the admitted jobs' size classes, and the piece count is bounded.
pub fn check_timeline_shape(
    instance: &Instance,
    trace: &ScheduleTrace,
    log: &AdmissionLog,
    timeline: &ThresholdTimeline,
) -> Vec<Finding> {
    let half = ratio(1, 2);
    let factor = &log.params.admit_factor;
    let mut out = Vec::new();
    for (machine, tl) in timeline.machines.iter().enumerate() {
        let mut times: BTreeSet<Time> = BTreeSet::from([Time::zero()]);
        let mut values: BTreeSet<Threshold> = BTreeSet::from([Threshold::Infinite]);
        let mut admitted = 0usize;
        match log.algorithm {
            Algorithm::Blocking => {
                for rec in log.on_machine(machine) {
                    admitted += 1;
                    times.insert(rec.admitted_at.clone());
                    times.extend(rec.interval_end.iter().cloned());
                    for b in &rec.blocking {
                        times.insert(b.start.clone());
                        times.insert(b.end.clone());
                    }
                    if let Some(p) = instance.processing(rec.job, machine) {
                        values.insert(Threshold::Finite(p.scale(factor)));
                        values.insert(Threshold::Finite(p.scale(&half)));
                    }
                }
            }
            Algorithm::Region => {
                admitted = log.on_machine(machine).count();
                for seg in trace.segments_on(machine) {
                    times.insert(seg.start.clone());
                    times.insert(seg.end.clone());
                    if let Some(p) = instance.processing(seg.job, machine) {
                        values.insert(Threshold::Finite(p.scale(factor)));
                    }
                }
            }
        }
        if tl.steps.first().map(|(t, _)| t) != Some(&Time::zero()) {
            out.push(Finding::TimelineShape { machine, detail: "does not start at 0".into() });
        }
        for w in tl.steps.windows(2) {
            if w[0].0 >= w[1].0 {
                out.push(Finding::TimelineShape { machine, detail: format!("breakpoints unsorted at {}", w[1].0) });
            }
            if w[0].1 == w[1].1 {
                out.push(Finding::TimelineShape { machine, detail: format!("redundant breakpoint at {}", w[1].0) });
            }
        }
        for (t, u) in &tl.steps {
            if !times.contains(t) {
                out.push(Finding::TimelineShape { machine, detail: format!("breakpoint at {t} has no cause") });
            }
            if !values.contains(u) {
                out.push(Finding::TimelineShape { machine, detail: format!("value {u} at {t} is not a size class") });
            }
        }
        let cap = match log.algorithm {
            Algorithm::Blocking => 3 * admitted + 1,
            Algorithm::Region => 2 * admitted + 1,
        };
        if tl.pieces() > cap {
            out.push(Finding::TooManyPieces { machine, pieces: tl.pieces(), cap });
        }
    }
    out
}

/// At least half of the admitted jobs finish by their deadline.
pub fn check_half_completion(instance: &Instance, trace: &ScheduleTrace) -> Vec<Finding> {
    let admitted = trace.admissions.len();
    let finished = trace.on_time_count(instance);
    if 2 * finished < admitted {
        vec![Finding::HalfCompletion { admitted, finished }]
    } else {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Job, ProcessingTime};
    use crate::verify::threshold::{extract, MachineTimeline};

    fn one_machine(jobs: Vec<(Time, Time, Time)>) -> Instance {
        Instance::new(
            1,
            ratio(1, 1),
            jobs.into_iter()
                .enumerate()
                .map(|(id, (r, d, p))| Job { id, release: r, deadline: d, proc: vec![ProcessingTime::Finite(p)] })
                .collect(),
        )
    }

    fn t(n: i64, d: i64) -> Time {
        Time::new(n, d)
    }

    #[test]
    fn doubled_threshold_is_caught_by_p2() {
        // Job 1 (p = 1) is rejected while job 0 (p = 4) runs: u = 1 ≤ 1.
        let inst = one_machine(vec![(t(0, 1), t(20, 1), t(4, 1)), (t(1, 1), t(4, 1), t(1, 1))]);
        let out = crate::run(&inst, Algorithm::Region, &CommitmentModel::None).unwrap();
        let tl = extract(&inst, &out.trace, &out.log, Algorithm::Region).unwrap();
        assert!(check_p2(&inst, &out.log, &tl).is_empty());
        let doubled = ThresholdTimeline {
            machines: vec![MachineTimeline {
                machine: 0,
                steps: tl.machines[0]
                    .steps
                    .iter()
                    .map(|(s, u)| (s.clone(), match u {
                        Threshold::Finite(v) => Threshold::Finite(v + v),
                        inf => inf.clone(),
                    }))
                    .collect(),
            }],
        };
        let found = check_p2(&inst, &out.log, &doubled);
        assert!(matches!(found[0], Finding::BelowThreshold { job: 1, .. }));
    }

    #[test]
    fn early_admission_is_caught_by_p1() {
        let inst = one_machine(vec![(t(2, 1), t(20, 1), t(4, 1))]);
        let mut out = crate::run(&inst, Algorithm::Region, &CommitmentModel::None).unwrap();
        assert!(check_p1(&inst, &out.log).is_empty());
        out.log.records[0].admitted_at = t(1, 1);
        assert!(matches!(check_p1(&inst, &out.log)[0], Finding::NotAvailable { .. }));
    }

    #[test]
    fn infinite_threshold_with_hypotheses_is_flagged() {
        // A witness job never admitted while the timeline claims ∞.
        let inst = one_machine(vec![(t(0, 1), t(4, 1), t(1, 1))]);
        let log = AdmissionLog {
            algorithm: Algorithm::Region,
            params: crate::trace::PolicyParams {
                epsilon: ratio(1, 1),
                delta: ratio(1, 2),
                admit_factor: ratio(1, 4),
                beta: None,
            },
            records: vec![],
        };
        let tl = ThresholdTimeline {
            machines: vec![MachineTimeline { machine: 0, steps: vec![(Time::zero(), Threshold::Infinite)] }],
        };
        let witness = Witness::from([(0, BTreeSet::from([0]))]);
        let found = check_volume_lemma(&inst, &log, &tl, &witness);
        assert_eq!(found.len(), 1);
        match &found[0] {
            Finding::VolumeLemma { y, theta1, theta2, .. } => {
                assert!(y.is_empty());
                assert_eq!(theta1, theta2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn trace_checks_catch_lost_work() {
        let inst = one_machine(vec![(t(0, 1), t(20, 1), t(4, 1))]);
        let mut out = crate::run(&inst, Algorithm::Blocking, &CommitmentModel::UponAdmission).unwrap();
        assert!(check_trace(&inst, &out.trace).is_empty());
        out.trace.segments[0].end = t(7, 2);
        let found = check_trace(&inst, &out.trace);
        assert!(found.iter().any(|f| matches!(f, Finding::WorkMismatch { .. })));
    }

    #[test]
    fn late_root_interval_end_has_no_origin() {
        let inst = one_machine(vec![(t(0, 1), t(40, 1), t(16, 1))]);
        let mut out = crate::run(&inst, Algorithm::Blocking, &CommitmentModel::UponAdmission).unwrap();
        assert!(check_blocking_structure(&inst, &out.log).is_empty());
        out.log.records[0].interval_end = Some(t(24001, 1000));
        let found = check_blocking_structure(&inst, &out.log);
        assert!(found.iter().any(|f| matches!(f, Finding::IntervalEndOrigin { .. })));
    }
}
