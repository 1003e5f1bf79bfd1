//! Retrospective threshold functions.
//!
//! For the blocking policy the threshold on machine `i` at time `τ` is
//! `½·p_k` if `τ` lies in the blocking period of some job `k` on `i` (the
//! smallest such), otherwise `γ·p_j` for the shortest job `j` on `i` whose
//! scheduling interval contains `τ`, otherwise ∞. For the region policy it is
//! `ε/4` times the processing time of the job running at `τ`, or ∞ when idle.
//! Both are read off the final admission log and trace, never from policy
//! state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, JobId, MachineId};
use crate::time::{ratio, Rational, Time};
use crate::trace::{Algorithm, AdmissionLog, ScheduleTrace, Threshold, ThresholdSample};

/// Right-continuous step function on `[0, ∞)`: `steps[k].1` holds on
/// `[steps[k].0, steps[k+1].0)`. Consecutive values differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineTimeline {
    pub machine: MachineId,
    pub steps: Vec<(Time, Threshold)>,
}

impl MachineTimeline {
    /// Builds a timeline from values at candidate breakpoints, merging equal
    /// neighbours. `points` must be sorted and start at 0.
    pub fn from_points(machine: MachineId, points: impl IntoIterator<Item = (Time, Threshold)>) -> Self {
        let mut steps: Vec<(Time, Threshold)> = Vec::new();
        for (t, u) in points {
            match steps.last() {
                Some((_, last)) if *last == u => {}
                _ => steps.push((t, u)),
            }
        }
        MachineTimeline { machine, steps }
    }

    pub fn value_at(&self, t: &Time) -> &Threshold {
        let idx = self.steps.partition_point(|(s, _)| s <= t);
        if idx == 0 {
            &Threshold::Infinite
        } else {
            &self.steps[idx - 1].1
        }
    }

    /// Number of maximal constant pieces.
    pub fn pieces(&self) -> usize {
        self.steps.len()
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Time> {
        self.steps.iter().map(|(t, _)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdTimeline {
    pub machines: Vec<MachineTimeline>,
}

impl ThresholdTimeline {
    pub fn value_at(&self, machine: MachineId, t: &Time) -> &Threshold {
        self.machines[machine].value_at(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimelineError {
    #[error("log record for job {job} names machine {machine}, which is not eligible")]
    NotEligible { job: JobId, machine: MachineId },
    #[error("blocking log record for job {job} has no interval end")]
    MissingIntervalEnd { job: JobId },
    #[error("log algorithm `{log}` does not match requested `{requested}`")]
    AlgorithmMismatch { log: Algorithm, requested: Algorithm },
}

pub fn extract(
    instance: &Instance,
    trace: &ScheduleTrace,
    log: &AdmissionLog,
    algorithm: Algorithm,
) -> Result<ThresholdTimeline, TimelineError> {
    if log.algorithm != algorithm {
        return Err(TimelineError::AlgorithmMismatch {
            log: log.algorithm,
            requested: algorithm,
        });
    }
    match algorithm {
        Algorithm::Blocking => extract_blocking(instance, log),
        Algorithm::Region => extract_region(instance, trace, &log.params.admit_factor),
    }
}

struct Claim {
    p: Time,
    a: Time,
    e: Time,
    blocking: Vec<(Time, Time)>,
}

fn extract_blocking(instance: &Instance, log: &AdmissionLog) -> Result<ThresholdTimeline, TimelineError> {
    let gamma = &log.params.admit_factor;
    let half = ratio(1, 2);
    let mut per_machine: Vec<Vec<Claim>> = (0..instance.machines).map(|_| Vec::new()).collect();
    for rec in &log.records {
        let p = instance
            .processing(rec.job, rec.machine)
            .ok_or(TimelineError::NotEligible {
                job: rec.job,
                machine: rec.machine,
            })?
            .clone();
        let e = rec
            .interval_end
            .clone()
            .ok_or(TimelineError::MissingIntervalEnd { job: rec.job })?;
        per_machine[rec.machine].push(Claim {
            p,
            a: rec.admitted_at.clone(),
            e,
            blocking: rec
                .blocking
                .iter()
                .map(|b| (b.start.clone(), b.end.clone()))
                .collect(),
        });
    }
    let machines = per_machine
        .into_iter()
        .enumerate()
        .map(|(machine, claims)| {
            let mut points: BTreeSet<Time> = BTreeSet::from([Time::zero()]);
            for c in &claims {
                points.insert(c.a.clone());
                points.insert(c.e.clone());
                for (s, f) in &c.blocking {
                    points.insert(s.clone());
                    points.insert(f.clone());
                }
            }
            let value = |t: &Time| -> Threshold {
                let blocked = claims
                    .iter()
                    .filter(|c| c.blocking.iter().any(|(s, f)| s <= t && t < f))
                    .map(|c| c.p.scale(&half))
                    .min();
                if let Some(u) = blocked {
                    return Threshold::Finite(u);
                }
                claims
                    .iter()
                    .filter(|c| c.a <= *t && *t < c.e)
                    .map(|c| c.p.scale(gamma))
                    .min()
                    .map_or(Threshold::Infinite, Threshold::Finite)
            };
            MachineTimeline::from_points(machine, points.into_iter().map(|t| {
                let u = value(&t);
                (t, u)
            }))
        })
        .collect();
    Ok(ThresholdTimeline { machines })
}

fn extract_region(
    instance: &Instance,
    trace: &ScheduleTrace,
    factor: &Rational,
) -> Result<ThresholdTimeline, TimelineError> {
    let machines = (0..instance.machines)
        .map(|machine| {
            let mut points: Vec<(Time, Threshold)> = vec![(Time::zero(), Threshold::Infinite)];
            for seg in trace.segments_on(machine) {
                let p = instance.processing(seg.job, machine).ok_or(TimelineError::NotEligible {
                    job: seg.job,
                    machine,
                })?;
                // Segments are chronological; an idle gap ends at the next start.
                if points.last().is_some_and(|(t, _)| *t == seg.start) {
                    points.pop();
                }
                points.push((seg.start.clone(), Threshold::Finite(p.scale(factor))));
                points.push((seg.end.clone(), Threshold::Infinite));
            }
            Ok(MachineTimeline::from_points(machine, points))
        })
        .collect::<Result<_, _>>()?;
    Ok(ThresholdTimeline { machines })
}

/// Step function traced by the thresholds the policy reported live. Before
/// the first sample nothing has been admitted, so the value is ∞.
pub fn live_timeline(machines: usize, samples: &[ThresholdSample]) -> ThresholdTimeline {
    let mut per: Vec<Vec<(Time, Threshold)>> = (0..machines)
        .map(|_| vec![(Time::zero(), Threshold::Infinite)])
        .collect();
    for s in samples {
        let points = &mut per[s.machine];
        if points.last().is_some_and(|(t, _)| *t == s.time) {
            points.pop();
        }
        points.push((s.time.clone(), s.value.clone()));
    }
    ThresholdTimeline {
        machines: per
            .into_iter()
            .enumerate()
            .map(|(i, points)| MachineTimeline::from_points(i, points))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CommitmentModel, Job, ProcessingTime};
    use crate::trace::Algorithm;

    fn inst(jobs: Vec<(i64, i64, Time)>) -> Instance {
        Instance::new(
            1,
            ratio(1, 1),
            jobs.into_iter()
                .enumerate()
                .map(|(id, (r, d, p))| Job {
                    id,
                    release: Time::from_int(r),
                    deadline: Time::from_int(d),
                    proc: vec![ProcessingTime::Finite(p)],
                })
                .collect(),
        )
    }

    #[test]
    fn idle_machine_is_infinite_throughout() {
        let i = Instance::new(1, ratio(1, 1), vec![]);
        for alg in [Algorithm::Blocking, Algorithm::Region] {
            let out = crate::run(&i, alg, &CommitmentModel::None).unwrap();
            let tl = extract(&i, &out.trace, &out.log, alg).unwrap();
            assert_eq!(tl.machines[0].steps, vec![(Time::zero(), Threshold::Infinite)]);
        }
    }

    #[test]
    fn single_root_blocking() {
        let i = inst(vec![(0, 40, Time::from_int(16))]);
        let out = crate::run(&i, Algorithm::Blocking, &CommitmentModel::UponAdmission).unwrap();
        let tl = extract(&i, &out.trace, &out.log, Algorithm::Blocking).unwrap();
        assert_eq!(
            tl.machines[0].steps,
            vec![
                (Time::zero(), Threshold::Finite(Time::new(1, 2))),
                (Time::from_int(24), Threshold::Infinite),
            ]
        );
    }

    #[test]
    fn region_running_job() {
        let i = inst(vec![(0, 40, Time::from_int(4))]);
        let out = crate::run(&i, Algorithm::Region, &CommitmentModel::None).unwrap();
        let tl = extract(&i, &out.trace, &out.log, Algorithm::Region).unwrap();
        assert_eq!(tl.value_at(0, &Time::new(7, 2)), &Threshold::Finite(Time::from_int(1)));
        assert_eq!(tl.value_at(0, &Time::from_int(4)), &Threshold::Infinite);
        assert_eq!(tl.machines[0].pieces(), 2);
    }

    #[test]
    fn merging_drops_repeated_values() {
        let tl = MachineTimeline::from_points(
            0,
            [
                (Time::zero(), Threshold::Infinite),
                (Time::from_int(1), Threshold::Infinite),
                (Time::from_int(2), Threshold::Finite(Time::from_int(1))),
            ],
        );
        assert_eq!(tl.pieces(), 2);
        assert_eq!(tl.value_at(&Time::new(3, 2)), &Threshold::Infinite);
    }
}
