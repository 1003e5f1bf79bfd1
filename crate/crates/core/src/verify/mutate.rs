//! Fault injection: nudge one recorded number by ±1/1000 and see whether
//! the checks notice.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::instance::{JobId, MachineId};
use crate::time::Time;
use crate::trace::{AdmissionLog, Threshold};

use super::threshold::ThresholdTimeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    AdmissionTime { job: JobId },
    IntervalEnd { job: JobId },
    BlockingStart { job: JobId, part: usize },
    BlockingEnd { job: JobId, part: usize },
    StepTime { machine: MachineId, step: usize },
    StepValue { machine: MachineId, step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mutation {
    pub target: Target,
    /// `+1` or `-1`, in units of 1/1000.
    pub sign: i8,
}

impl Mutation {
    fn nudge(&self, t: &Time) -> Time {
        t + &Time::new(self.sign as i64, 1000)
    }

    pub fn touches_log(&self) -> bool {
        !matches!(self.target, Target::StepTime { .. } | Target::StepValue { .. })
    }

    /// Mutated log; unchanged for timeline mutations.
    pub fn apply_to_log(&self, log: &AdmissionLog) -> AdmissionLog {
        let mut log = log.clone();
        let rec = |log: &mut AdmissionLog, job: JobId| -> usize {
            log.records.iter().position(|r| r.job == job).expect("mutation targets a logged job")
        };
        match self.target {
            Target::AdmissionTime { job } => {
                let k = rec(&mut log, job);
                log.records[k].admitted_at = self.nudge(&log.records[k].admitted_at);
            }
            Target::IntervalEnd { job } => {
                let k = rec(&mut log, job);
                let e = log.records[k].interval_end.as_ref().expect("blocking record");
                log.records[k].interval_end = Some(self.nudge(e));
            }
            Target::BlockingStart { job, part } => {
                let k = rec(&mut log, job);
                let b = &mut log.records[k].blocking[part];
                b.start = self.nudge(&b.start);
            }
            Target::BlockingEnd { job, part } => {
                let k = rec(&mut log, job);
                let b = &mut log.records[k].blocking[part];
                b.end = self.nudge(&b.end);
            }
            Target::StepTime { .. } | Target::StepValue { .. } => {}
        }
        log
    }

    /// Mutated timeline; unchanged for log mutations.
    pub fn apply_to_timeline(&self, timeline: &ThresholdTimeline) -> ThresholdTimeline {
        let mut timeline = timeline.clone();
        match self.target {
            Target::StepTime { machine, step } => {
                let s = &mut timeline.machines[machine].steps[step];
                s.0 = self.nudge(&s.0);
            }
            Target::StepValue { machine, step } => {
                let s = &mut timeline.machines[machine].steps[step];
                if let Threshold::Finite(v) = &s.1 {
                    s.1 = Threshold::Finite(self.nudge(v));
                }
            }
            _ => {}
        }
        timeline
    }
}

/// Every single-number mutation of `log` and `timeline`, in a fixed order.
pub fn candidates(log: &AdmissionLog, timeline: &ThresholdTimeline) -> Vec<Mutation> {
    let mut targets = Vec::new();
    for rec in &log.records {
        targets.push(Target::AdmissionTime { job: rec.job });
        if rec.interval_end.is_some() {
            targets.push(Target::IntervalEnd { job: rec.job });
        }
        for part in 0..rec.blocking.len() {
            targets.push(Target::BlockingStart { job: rec.job, part });
            targets.push(Target::BlockingEnd { job: rec.job, part });
        }
    }
    for (machine, tl) in timeline.machines.iter().enumerate() {
        for (step, (_, u)) in tl.steps.iter().enumerate() {
            targets.push(Target::StepTime { machine, step });
            if matches!(u, Threshold::Finite(_)) {
                targets.push(Target::StepValue { machine, step });
            }
        }
    }
    targets
        .into_iter()
        .flat_map(|target| [1, -1].map(|sign| Mutation { target, sign }))
        .collect()
}

/// `count` distinct mutations chosen with a seeded RNG (fewer if the run
/// has fewer candidates).
pub fn sample(log: &AdmissionLog, timeline: &ThresholdTimeline, seed: u64, count: usize) -> Vec<Mutation> {
    let mut all = candidates(log, timeline);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.shuffle(&mut rng);
    all.truncate(count);
    all
}
