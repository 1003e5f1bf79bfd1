//! Jobs, instances, slack validation and the availability predicate.

use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::time::{format_rational, Rational, Time};

pub type JobId = usize;
pub type MachineId = usize;

/// Processing time of a job on one machine. `NonEligible` stands for `p_ij = ∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcessingTime {
    Finite(Time),
    NonEligible,
}

impl ProcessingTime {
    pub fn finite(&self) -> Option<&Time> {
        match self {
            ProcessingTime::Finite(p) => Some(p),
            ProcessingTime::NonEligible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Job {
    pub id: JobId,
    pub release: Time,
    pub deadline: Time,
    /// One entry per machine.
    pub proc: Vec<ProcessingTime>,
}

impl Job {
    /// `p_ij` if machine `i` is eligible.
    pub fn processing(&self, machine: MachineId) -> Option<&Time> {
        self.proc.get(machine).and_then(ProcessingTime::finite)
    }

    pub fn eligible_machines(&self) -> impl Iterator<Item = MachineId> + '_ {
        self.proc
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.finite().map(|_| i))
    }

    pub fn max_processing(&self) -> Option<&Time> {
        self.proc.iter().filter_map(ProcessingTime::finite).max()
    }

    pub fn window(&self) -> Time {
        &self.deadline - &self.release
    }
}

/// An immutable problem instance: `m` machines, jobs, and the slack class ε.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub machines: usize,
    pub epsilon: Rational,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoMachines,
    NonPositiveEpsilon,
    IdNotDense { position: usize, id: JobId },
    ProcLength { job: JobId, len: usize },
    NegativeRelease { job: JobId },
    DeadlineNotAfterRelease { job: JobId },
    NoEligibleMachine { job: JobId },
    NonPositiveProcessing { job: JobId, machine: MachineId },
    Slack { job: JobId, machine: MachineId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoMachines => write!(f, "instance has no machines"),
            Violation::NonPositiveEpsilon => write!(f, "epsilon must be positive"),
            Violation::IdNotDense { position, id } => {
                write!(f, "job at position {position} has id {id}; ids must be 0..n-1 in order")
            }
            Violation::ProcLength { job, len } => {
                write!(f, "job {job}: processing table has {len} entries")
            }
            Violation::NegativeRelease { job } => write!(f, "job {job}: negative release date"),
            Violation::DeadlineNotAfterRelease { job } => {
                write!(f, "job {job}: deadline not after release")
            }
            Violation::NoEligibleMachine { job } => write!(f, "job {job}: no eligible machine"),
            Violation::NonPositiveProcessing { job, machine } => {
                write!(f, "job {job}: non-positive processing time on machine {machine}")
            }
            Violation::Slack { job, machine } => {
                write!(f, "job {job}: slack violated on machine {machine}")
            }
        }
    }
}

/// Outcome of [`Instance::validate`]. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("machine {machine} is not eligible for job {job}")]
pub struct NotEligible {
    pub job: JobId,
    pub machine: MachineId,
}

impl Instance {
    pub fn new(machines: usize, epsilon: Rational, jobs: Vec<Job>) -> Self {
        Instance {
            machines,
            epsilon,
            jobs,
        }
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id]
    }

    /// `p_ij`, or `None` when `j` is not eligible on `i`.
    pub fn processing(&self, job: JobId, machine: MachineId) -> Option<&Time> {
        self.jobs[job].processing(machine)
    }

    /// Same jobs under a different slack class. Used when an algorithm is run
    /// with another ε than the instance was generated for; jobs lacking the
    /// new slack are then never available to it.
    pub fn with_epsilon(&self, epsilon: Rational) -> Instance {
        Instance {
            machines: self.machines,
            epsilon,
            jobs: self.jobs.clone(),
        }
    }

    /// Checks every structural invariant and the slack condition
    /// `d_j − r_j ≥ (1 + ε)·p_ij` for all eligible pairs.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.machines == 0 {
            violations.push(Violation::NoMachines);
        }
        if !self.epsilon.is_positive() {
            violations.push(Violation::NonPositiveEpsilon);
        }
        let one_plus_eps = Rational::one() + &self.epsilon;
        for (position, job) in self.jobs.iter().enumerate() {
            if job.id != position {
                violations.push(Violation::IdNotDense {
                    position,
                    id: job.id,
                });
            }
            if job.proc.len() != self.machines {
                violations.push(Violation::ProcLength {
                    job: job.id,
                    len: job.proc.len(),
                });
            }
            if job.release.is_negative() {
                violations.push(Violation::NegativeRelease { job: job.id });
            }
            if job.deadline <= job.release {
                violations.push(Violation::DeadlineNotAfterRelease { job: job.id });
            }
            if job.eligible_machines().next().is_none() {
                violations.push(Violation::NoEligibleMachine { job: job.id });
            }
            let window = job.window();
            for (machine, p) in job.proc.iter().enumerate() {
                if let ProcessingTime::Finite(p) = p {
                    if !p.is_positive() {
                        violations.push(Violation::NonPositiveProcessing {
                            job: job.id,
                            machine,
                        });
                    } else if window < p.scale(&one_plus_eps) {
                        violations.push(Violation::Slack {
                            job: job.id,
                            machine,
                        });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Availability of `job` for `machine` at time `now` with slack
    /// parameter `delta`: released, not admitted, and
    /// `d_j − now ≥ (1 + δ)·p_ij`.
    pub fn available(
        &self,
        job: JobId,
        machine: MachineId,
        now: &Time,
        delta: &Rational,
        admitted: impl Fn(JobId) -> bool,
    ) -> Result<bool, NotEligible> {
        let j = &self.jobs[job];
        let p = j.processing(machine).ok_or(NotEligible { job, machine })?;
        Ok(j.release <= *now && !admitted(job) && fits_before_deadline(j, p, now, delta))
    }
}

/// `d_j − now ≥ (1 + δ)·p`.
pub fn fits_before_deadline(job: &Job, p: &Time, now: &Time, delta: &Rational) -> bool {
    let latest = &job.deadline - &p.scale(&(Rational::one() + delta));
    *now <= latest
}

/// Commitment requirement the online scheduler operates under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommitmentModel {
    None,
    UponAdmission,
    /// Commit no later than `d_j − (1 + δ)·p_ij`. Requires `0 < δ < ε`.
    Delta(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("delta-commitment requires 0 < delta < epsilon (delta = {delta}, epsilon = {epsilon})")]
    DeltaOutOfRange { delta: String, epsilon: String },
}

impl CommitmentModel {
    pub fn check(&self, epsilon: &Rational) -> Result<(), ModelError> {
        if let CommitmentModel::Delta(delta) = self {
            if !delta.is_positive() || delta >= epsilon {
                return Err(ModelError::DeltaOutOfRange {
                    delta: format_rational(delta),
                    epsilon: format_rational(epsilon),
                });
            }
        }
        Ok(())
    }

    pub fn delta(&self) -> Option<&Rational> {
        match self {
            CommitmentModel::Delta(d) => Some(d),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CommitmentModel::None => "none",
            CommitmentModel::UponAdmission => "admission",
            CommitmentModel::Delta(_) => "delta",
        }
    }
}

impl fmt::Display for CommitmentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommitmentModel::Delta(d) => write!(f, "delta({})", format_rational(d)),
            other => f.write_str(other.name()),
        }
    }
}

/// Smallest finite ε that every algorithm actually runs with.
pub fn clamp_epsilon(epsilon: &Rational) -> Rational {
    if *epsilon > Rational::one() {
        Rational::one()
    } else {
        epsilon.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::ratio;

    fn job(id: JobId, r: Time, d: Time, p: Vec<Option<Time>>) -> Job {
        Job {
            id,
            release: r,
            deadline: d,
            proc: p
                .into_iter()
                .map(|p| p.map_or(ProcessingTime::NonEligible, ProcessingTime::Finite))
                .collect(),
        }
    }

    #[test]
    fn slack_boundary_equality_is_valid() {
        let inst = Instance::new(
            1,
            ratio(1, 1),
            vec![job(0, Time::zero(), Time::from_int(2), vec![Some(Time::from_int(1))])],
        );
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn slack_violation_is_reported_per_pair() {
        let inst = Instance::new(
            1,
            ratio(1, 1),
            vec![job(0, Time::zero(), Time::new(19, 10), vec![Some(Time::from_int(1))])],
        );
        let report = inst.validate();
        assert_eq!(report.violations, vec![Violation::Slack { job: 0, machine: 0 }]);
    }

    #[test]
    fn no_eligible_machine_is_reported() {
        let inst = Instance::new(
            2,
            ratio(1, 1),
            vec![job(0, Time::zero(), Time::from_int(2), vec![None, None])],
        );
        assert_eq!(
            inst.validate().violations,
            vec![Violation::NoEligibleMachine { job: 0 }]
        );
    }

    #[test]
    fn deadline_and_id_violations() {
        let inst = Instance::new(
            1,
            ratio(1, 2),
            vec![job(3, Time::from_int(2), Time::from_int(2), vec![Some(Time::from_int(1))])],
        );
        let v = inst.validate().violations;
        assert!(v.contains(&Violation::IdNotDense { position: 0, id: 3 }));
        assert!(v.contains(&Violation::DeadlineNotAfterRelease { job: 3 }));
    }

    #[test]
    fn availability_predicate() {
        let inst = Instance::new(
            1,
            ratio(1, 1),
            vec![job(0, Time::zero(), Time::from_int(3), vec![Some(Time::from_int(2))])],
        );
        let half = ratio(1, 2);
        // 3 - 0 >= 1.5 * 2
        assert!(inst.available(0, 0, &Time::zero(), &half, |_| false).unwrap());
        // 3 - 0.1 < 3
        assert!(!inst.available(0, 0, &Time::new(1, 10), &half, |_| false).unwrap());
        assert!(!inst.available(0, 0, &Time::zero(), &half, |_| true).unwrap());
    }

    #[test]
    fn availability_on_ineligible_machine_is_an_error() {
        let inst = Instance::new(
            2,
            ratio(1, 1),
            vec![job(0, Time::zero(), Time::from_int(3), vec![Some(Time::from_int(1)), None])],
        );
        assert_eq!(
            inst.available(0, 1, &Time::zero(), &ratio(1, 2), |_| false),
            Err(NotEligible { job: 0, machine: 1 })
        );
    }

    #[test]
    fn availability_not_before_release() {
        let inst = Instance::new(
            1,
            ratio(1, 1),
            vec![job(0, Time::from_int(1), Time::from_int(5), vec![Some(Time::from_int(1))])],
        );
        assert!(!inst.available(0, 0, &Time::zero(), &ratio(1, 2), |_| false).unwrap());
        assert!(inst.available(0, 0, &Time::from_int(1), &ratio(1, 2), |_| false).unwrap());
    }

    #[test]
    fn delta_model_must_be_below_epsilon() {
        let eps = ratio(1, 2);
        assert!(CommitmentModel::Delta(ratio(1, 4)).check(&eps).is_ok());
        assert!(CommitmentModel::Delta(ratio(1, 2)).check(&eps).is_err());
        assert!(CommitmentModel::Delta(ratio(0, 1)).check(&eps).is_err());
    }

    #[test]
    fn epsilon_clamp() {
        assert_eq!(clamp_epsilon(&ratio(3, 1)), ratio(1, 1));
        assert_eq!(clamp_epsilon(&ratio(1, 4)), ratio(1, 4));
    }
}
