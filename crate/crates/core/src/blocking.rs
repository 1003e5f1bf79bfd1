//! Admission with commitment: scheduling intervals and blocking periods.
//!
//! Every admitted job `j` owns a scheduling interval `S(j) = [a_j, e_j)` in
//! which it and all jobs it admits must finish, and possibly a blocking period
//! `B(j)` right after it during which jobs of similar size are kept out.
//! A job is only admitted into `S(j)` if it is much smaller than `j`
//! (`p < γ·p_j`), and its own interval plus blocking period are carved out of
//! `S(j)` by shifting the blocking periods of `j`'s other children.

use std::collections::BTreeMap;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::engine::{EventKind, Policy, World};
use crate::instance::{clamp_epsilon, CommitmentModel, Instance, JobId, MachineId, ModelError};
use crate::interval::{Interval, IntervalSet};
use crate::time::{format_rational, ratio, Rational, Time};
use crate::trace::{
    Algorithm, AdmissionLog, AdmissionRecord, PolicyParams, ScheduleTrace, Threshold,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingParams {
    /// ε after clamping to at most 1 (kept above δ′ when a large δ is given).
    pub epsilon: Rational,
    pub delta_input: Option<Rational>,
    /// δ′ = max(δ, ε/2).
    pub delta: Rational,
    /// γ = δ′/16.
    pub gamma: Rational,
    /// β = 16/δ′.
    pub beta: Rational,
    /// Left-hand side of the completion inequality; at least 1.
    pub inequality: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("parameters violate the completion inequality: {0} < 1")]
    Inequality(String),
}

/// `(β/2)/(β/2 + 1 + 2δ) · (1 + δ − 2(1 + 2δ)γ)`
pub fn completion_inequality(delta: &Rational, gamma: &Rational, beta: &Rational) -> Rational {
    let one = Rational::one();
    let two = ratio(2, 1);
    let half_beta = beta / &two;
    let widen = &one + &two * delta;
    &half_beta / (&half_beta + &widen) * (&one + delta - &two * &widen * gamma)
}

pub fn derive_params(epsilon: &Rational, model: &CommitmentModel) -> Result<BlockingParams, ParamsError> {
    if !epsilon.is_positive() {
        return Err(ParamsError::NonPositiveEpsilon);
    }
    model.check(epsilon)?;
    let clamped = clamp_epsilon(epsilon);
    let half = &clamped / ratio(2, 1);
    let delta_input = model.delta().cloned();
    let delta = match &delta_input {
        Some(d) if *d > half => d.clone(),
        _ => half,
    };
    // With ε > 1 and δ ≥ 1 clamping would leave no room between δ and ε.
    let epsilon = if delta >= clamped { epsilon.clone() } else { clamped };
    let gamma = &delta / ratio(16, 1);
    let beta = ratio(16, 1) / &delta;
    let inequality = completion_inequality(&delta, &gamma, &beta);
    if inequality < Rational::one() {
        return Err(ParamsError::Inequality(format_rational(&inequality)));
    }
    Ok(BlockingParams {
        epsilon,
        delta_input,
        delta,
        gamma,
        beta,
        inequality,
    })
}

impl BlockingParams {
    /// `α = (ε/(ε−δ′))·(2β + (1+2δ′)/γ)`
    pub fn alpha(&self) -> Rational {
        let one = Rational::one();
        let two = ratio(2, 1);
        &self.epsilon / (&self.epsilon - &self.delta)
            * (&two * &self.beta + (&one + &two * &self.delta) / &self.gamma)
    }

    /// Competitive bound `α + 5`.
    pub fn bound_factor(&self) -> Rational {
        self.alpha() + ratio(5, 1)
    }

    pub fn to_policy_params(&self) -> PolicyParams {
        PolicyParams {
            epsilon: self.epsilon.clone(),
            delta: self.delta.clone(),
            admit_factor: self.gamma.clone(),
            beta: Some(self.beta.clone()),
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    job: JobId,
    machine: MachineId,
    p: Time,
    parent: Option<usize>,
    children: Vec<usize>,
    a: Time,
    e: Time,
    blocking: IntervalSet,
    stamp: u64,
}

impl Node {
    fn in_interval(&self, t: &Time) -> bool {
        self.a <= *t && *t < self.e
    }
}

pub struct BlockingPolicy {
    params: BlockingParams,
    nodes: Vec<Node>,
    slot: BTreeMap<JobId, usize>,
    by_machine: Vec<Vec<usize>>,
    timers: Vec<(Time, EventKind)>,
    watch: Vec<Time>,
}

impl BlockingPolicy {
    pub fn new(params: BlockingParams, machines: usize) -> Self {
        BlockingPolicy {
            params,
            nodes: Vec::new(),
            slot: BTreeMap::new(),
            by_machine: vec![Vec::new(); machines],
            timers: Vec::new(),
            watch: Vec::new(),
        }
    }

    pub fn for_instance(instance: &Instance, model: &CommitmentModel) -> Result<Self, ParamsError> {
        Ok(BlockingPolicy::new(
            derive_params(&instance.epsilon, model)?,
            instance.machines,
        ))
    }

    pub fn params(&self) -> &BlockingParams {
        &self.params
    }

    /// Jobs on `machine` whose scheduling interval contains `t`.
    fn active(&self, machine: MachineId, t: &Time) -> impl Iterator<Item = usize> + '_ {
        let t = t.clone();
        self.by_machine[machine]
            .iter()
            .copied()
            .filter(move |&s| self.nodes[s].in_interval(&t))
    }

    fn blocked(&self, machine: MachineId, t: &Time, p_star: &Time) -> bool {
        let twice = p_star + p_star;
        self.by_machine[machine].iter().any(|&s| {
            let node = &self.nodes[s];
            node.p <= twice && node.blocking.contains(t)
        })
    }

    fn touch(&mut self, slot: usize, now: &Time) {
        let node = &mut self.nodes[slot];
        node.stamp += 1;
        let (machine, job, stamp) = (node.machine, node.job, node.stamp);
        if node.e > *now {
            self.timers.push((
                node.e.clone(),
                EventKind::EndSchedulingInterval { machine, job, stamp },
            ));
        }
        for part in node.blocking.parts() {
            if part.start > *now {
                self.watch.push(part.start.clone());
            }
            if part.end > *now {
                self.timers.push((
                    part.end.clone(),
                    EventKind::EndBlockingPeriod { machine, job, stamp },
                ));
            }
        }
    }

    /// Makes room for a new child of `parent` occupying
    /// `[now, now + (1 + δ′ + β)·p_star)`: blocking periods of the other children
    /// are split at `now` and their later parts shifted right, clipped at `e_parent`.
    fn shift_siblings(&mut self, parent: usize, now: &Time, p_star: &Time) -> Vec<usize> {
        let shift = p_star.scale(&(Rational::one() + &self.params.delta + &self.params.beta));
        let clip = self.nodes[parent].e.clone();
        let mut children = self.nodes[parent].children.clone();
        children.sort_by(|&x, &y| {
            let (a, b) = (&self.nodes[x], &self.nodes[y]);
            a.p.cmp(&b.p).then(a.job.cmp(&b.job))
        });
        let mut changed = Vec::new();
        for child in children {
            let node = &mut self.nodes[child];
            if !node.blocking.reaches(now) {
                continue;
            }
            let mut parts = Vec::with_capacity(node.blocking.parts().len() + 1);
            for part in node.blocking.parts() {
                if part.end <= *now {
                    parts.push(part.clone());
                    continue;
                }
                if part.start < *now {
                    parts.push(Interval::new(part.start.clone(), now.clone()));
                    parts.push(Interval::new(now + &shift, (&part.end + &shift).min(clip.clone())));
                } else {
                    parts.push(Interval::new(&part.start + &shift, (&part.end + &shift).min(clip.clone())));
                }
            }
            let updated = IntervalSet::from_intervals(parts);
            if updated != node.blocking {
                node.blocking = updated;
                changed.push(child);
            }
        }
        changed
    }

    fn admit(&mut self, job: JobId, machine: MachineId, p: Time, parent: Option<usize>, now: &Time) {
        let e_star = now + &p.scale(&(Rational::one() + &self.params.delta));
        let slot = self.nodes.len();
        self.nodes.push(Node {
            job,
            machine,
            p: p.clone(),
            parent,
            children: Vec::new(),
            a: now.clone(),
            e: e_star.clone(),
            blocking: IntervalSet::new(),
            stamp: 0,
        });
        self.slot.insert(job, slot);
        let mut changed = Vec::new();
        if let Some(j) = parent {
            if e_star <= self.nodes[j].e {
                let f_star = (&e_star + &p.scale(&self.params.beta)).min(self.nodes[j].e.clone());
                self.nodes[slot].blocking = IntervalSet::single(Interval::new(e_star.clone(), f_star));
                changed.extend(self.shift_siblings(j, now, &p));
            } else {
                let extended: Vec<usize> = self
                    .active(machine, now)
                    .filter(|&k| self.nodes[k].e < e_star)
                    .collect();
                for &k in &extended {
                    self.nodes[k].e = e_star.clone();
                }
                for &k in &extended {
                    let node = &self.nodes[k];
                    let blocking = match node.parent {
                        None => IntervalSet::new(),
                        Some(up) => {
                            let end = (&node.e + &node.p.scale(&self.params.beta)).min(self.nodes[up].e.clone());
                            IntervalSet::single(Interval::new(node.e.clone(), end))
                        }
                    };
                    self.nodes[k].blocking = blocking;
                }
                changed.extend(extended);
                changed.extend(self.shift_siblings(j, now, &p));
            }
            self.nodes[j].children.push(slot);
        }
        self.by_machine[machine].push(slot);
        changed.push(slot);
        changed.sort_unstable();
        changed.dedup();
        for s in changed {
            self.touch(s, now);
        }
    }

    fn record(&self, node: &Node) -> AdmissionRecord {
        AdmissionRecord {
            job: node.job,
            machine: node.machine,
            parent: node.parent.map(|s| self.nodes[s].job),
            admitted_at: node.a.clone(),
            interval_end: Some(node.e.clone()),
            blocking: node.blocking.parts().to_vec(),
            commit_time: Some(node.a.clone()),
        }
    }
}

impl Policy for BlockingPolicy {
    fn availability_delta(&self) -> &Rational {
        &self.params.delta
    }

    fn wakes_on_completion(&self) -> bool {
        false
    }

    fn admit_one(&mut self, world: &World<'_>) -> Option<(JobId, MachineId)> {
        let now = world.now();
        for machine in 0..self.by_machine.len() {
            let Some(star) = world.shortest_available(machine, &self.params.delta) else {
                continue;
            };
            let p_star = world
                .instance()
                .processing(star, machine)
                .expect("available implies eligible")
                .clone();
            let host = self.active(machine, now).min_by(|&x, &y| {
                let (a, b) = (&self.nodes[x], &self.nodes[y]);
                a.p.cmp(&b.p).then(a.job.cmp(&b.job))
            });
            match host {
                None => {
                    self.admit(star, machine, p_star, None, now);
                    return Some((star, machine));
                }
                Some(j) => {
                    let small = p_star < self.nodes[j].p.scale(&self.params.gamma);
                    if small && !self.blocked(machine, now, &p_star) {
                        self.admit(star, machine, p_star, Some(j), now);
                        return Some((star, machine));
                    }
                }
            }
        }
        None
    }

    fn take_timers(&mut self) -> Vec<(Time, EventKind)> {
        std::mem::take(&mut self.timers)
    }

    fn take_watch_points(&mut self) -> Vec<Time> {
        std::mem::take(&mut self.watch)
    }

    fn timer_is_current(&self, kind: &EventKind) -> bool {
        match kind {
            EventKind::EndBlockingPeriod { job, stamp, .. }
            | EventKind::EndSchedulingInterval { job, stamp, .. } => self
                .slot
                .get(job)
                .is_some_and(|&s| self.nodes[s].stamp == *stamp),
            _ => true,
        }
    }

    fn threshold(&self, world: &World<'_>, machine: MachineId) -> Threshold {
        let now = world.now();
        let half = ratio(1, 2);
        let blocked = self.by_machine[machine]
            .iter()
            .map(|&s| &self.nodes[s])
            .filter(|n| n.blocking.contains(now))
            .map(|n| n.p.scale(&half))
            .min();
        if let Some(u) = blocked {
            return Threshold::Finite(u);
        }
        self.active(machine, now)
            .map(|s| self.nodes[s].p.scale(&self.params.gamma))
            .min()
            .map_or(Threshold::Infinite, Threshold::Finite)
    }

    fn into_log(self) -> AdmissionLog {
        AdmissionLog {
            algorithm: Algorithm::Blocking,
            params: self.params.to_policy_params(),
            records: self.nodes.iter().map(|n| self.record(n)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CommitViolation {
    NotCompleted { job: JobId },
    Late { job: JobId, completion: Time, deadline: Time },
    OutsideWindow { job: JobId, completion: Time, bound: Time },
    CommitTime { job: JobId },
    LateCommit { job: JobId, admitted: Time, latest: Time },
}

impl std::fmt::Display for CommitViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommitViolation::NotCompleted { job } => write!(f, "job {job} admitted but never completed"),
            CommitViolation::Late { job, completion, deadline } => {
                write!(f, "job {job} completed at {completion} after its deadline {deadline}")
            }
            CommitViolation::OutsideWindow { job, completion, bound } => {
                write!(f, "job {job} completed at {completion} after a_j + (1+δ′)p = {bound}")
            }
            CommitViolation::CommitTime { job } => write!(f, "job {job} committed at a time other than its admission"),
            CommitViolation::LateCommit { job, admitted, latest } => {
                write!(f, "job {job} admitted at {admitted}, later than the commitment point {latest}")
            }
        }
    }
}

/// Checks that every admitted job finished on time, inside its window
/// `a_j + (1+δ′)p_ij`, and that commitment happened at admission (and early
/// enough under δ-commitment).
pub fn commit_check(
    instance: &Instance,
    trace: &ScheduleTrace,
    log: &AdmissionLog,
    model: &CommitmentModel,
) -> Vec<CommitViolation> {
    let one = Rational::one();
    let mut out = Vec::new();
    for rec in &log.records {
        let job = &instance.jobs[rec.job];
        let Some(p) = job.processing(rec.machine) else {
            continue;
        };
        match trace.completions.get(&rec.job) {
            None => out.push(CommitViolation::NotCompleted { job: rec.job }),
            Some(c) => {
                if *c > job.deadline {
                    out.push(CommitViolation::Late {
                        job: rec.job,
                        completion: c.clone(),
                        deadline: job.deadline.clone(),
                    });
                }
                let bound = &rec.admitted_at + &p.scale(&(&one + &log.params.delta));
                if *c > bound {
                    out.push(CommitViolation::OutsideWindow {
                        job: rec.job,
                        completion: c.clone(),
                        bound,
                    });
                }
            }
        }
        if rec.commit_time.as_ref() != Some(&rec.admitted_at) {
            out.push(CommitViolation::CommitTime { job: rec.job });
        }
        if let CommitmentModel::Delta(delta) = model {
            let latest = &job.deadline - &p.scale(&(&one + delta));
            if rec.admitted_at > latest {
                out.push(CommitViolation::LateCommit {
                    job: rec.job,
                    admitted: rec.admitted_at.clone(),
                    latest,
                });
            }
        }
    }
    out
}

/// Convenience: run the blocking policy on `instance`.
pub fn run(
    instance: &Instance,
    model: &CommitmentModel,
) -> Result<crate::trace::RunOutput, crate::RunError> {
    let policy = BlockingPolicy::for_instance(instance, model)?;
    Ok(crate::engine::simulate(instance, policy)?)
}
