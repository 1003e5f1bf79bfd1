//! Event-driven simulation clock.
//!
//! Between events every machine runs the admitted, uncompleted job with the
//! smallest processing time (ties by job id). Admission decisions are made by
//! a [`Policy`]; the engine only owns time, dispatch and the trace.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::instance::{fits_before_deadline, Instance, JobId, MachineId};
use crate::time::{Rational, Time};
use crate::trace::{
    Admission, AdmissionLog, RunOutput, ScheduleTrace, Segment, Threshold, ThresholdSample,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventKind {
    Release(JobId),
    EndBlockingPeriod {
        machine: MachineId,
        job: JobId,
        stamp: u64,
    },
    EndSchedulingInterval {
        machine: MachineId,
        job: JobId,
        stamp: u64,
    },
    AdmissionFollowUp,
}

impl EventKind {
    fn priority(&self) -> u8 {
        match self {
            EventKind::Release(_) => 0,
            EventKind::EndBlockingPeriod { .. } => 1,
            EventKind::EndSchedulingInterval { .. } => 2,
            EventKind::AdmissionFollowUp => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: Time,
    pub kind: EventKind,
    pub seq: u64,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .cmp(&other.time)
            .then(self.kind.priority().cmp(&other.kind.priority()))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("policy admitted job {job} to machine {machine}, which is not eligible")]
    NotEligible { job: JobId, machine: MachineId },
    #[error("policy admitted job {job} twice")]
    AlreadyAdmitted { job: JobId },
    #[error("policy admitted job {job} before its release")]
    NotReleased { job: JobId },
    /// Times are kept formatted: these only ever surface as messages.
    #[error("timer at {at} scheduled in the past (now = {now})")]
    TimerInPast { at: String, now: String },
    #[error("machine {machine} advanced past the completion of job {job}")]
    AdvancePastCompletion { machine: MachineId, job: JobId },
    #[error("admission of job {job} on machine {machine} at {at} does not decrease the recursion measure")]
    RecursionMeasure {
        job: JobId,
        machine: MachineId,
        at: String,
    },
}

/// Engine-side state of one machine.
#[derive(Debug, Clone, Default)]
pub struct MachineState {
    /// Admitted, uncompleted jobs keyed by `(p_ij, id)`: the first entry runs.
    pending: BTreeSet<(Time, JobId)>,
    remaining: BTreeMap<JobId, Time>,
    open: Option<(JobId, Time)>,
}

impl MachineState {
    pub fn running(&self) -> Option<JobId> {
        self.pending.first().map(|(_, j)| *j)
    }

    pub fn remaining(&self, job: JobId) -> Option<&Time> {
        self.remaining.get(&job)
    }

    fn admit(&mut self, job: JobId, p: Time) {
        self.remaining.insert(job, p.clone());
        self.pending.insert((p, job));
    }

    fn completion_time(&self, now: &Time) -> Option<Time> {
        self.running().map(|j| now + &self.remaining[&j])
    }

    /// Runs the current job over `[from, to)`. Returns the job if it finished
    /// exactly at `to`.
    fn advance(&mut self, machine: MachineId, from: &Time, to: &Time) -> Result<Option<JobId>, EngineError> {
        let Some(job) = self.running() else {
            return Ok(None);
        };
        let elapsed = to - from;
        let rem = self.remaining.get_mut(&job).expect("running job has remaining work");
        if elapsed > *rem {
            return Err(EngineError::AdvancePastCompletion { machine, job });
        }
        *rem -= &elapsed;
        if rem.is_zero() {
            self.remaining.remove(&job);
            self.pending.pop_first();
            return Ok(Some(job));
        }
        Ok(None)
    }

    /// Closes the open segment if the running job changed and opens a new one.
    fn sync(&mut self, machine: MachineId, now: &Time, segments: &mut Vec<Segment>) {
        let head = self.running();
        if self.open.as_ref().map(|(j, _)| *j) == head {
            return;
        }
        if let Some((job, start)) = self.open.take() {
            if start < *now {
                segments.push(Segment {
                    machine,
                    job,
                    start,
                    end: now.clone(),
                });
            }
        }
        self.open = head.map(|j| (j, now.clone()));
    }
}

/// Read-only view of the simulation handed to a policy.
pub struct World<'a> {
    instance: &'a Instance,
    now: &'a Time,
    admitted_to: &'a [Option<MachineId>],
    machines: &'a [MachineState],
}

impl<'a> World<'a> {
    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn now(&self) -> &'a Time {
        self.now
    }

    pub fn is_admitted(&self, job: JobId) -> bool {
        self.admitted_to[job].is_some()
    }

    pub fn running(&self, machine: MachineId) -> Option<JobId> {
        self.machines[machine].running()
    }

    /// Shortest job available for `machine` now under slack `delta`, ties by id.
    pub fn shortest_available(&self, machine: MachineId, delta: &Rational) -> Option<JobId> {
        self.instance
            .jobs
            .iter()
            .filter(|job| job.release <= *self.now && !self.is_admitted(job.id))
            .filter_map(|job| {
                let p = job.processing(machine)?;
                fits_before_deadline(job, p, self.now, delta).then_some((p, job.id))
            })
            .min()
            .map(|(_, id)| id)
    }
}

/// An admission policy driven by the engine.
pub trait Policy {
    /// δ in the availability predicate.
    fn availability_delta(&self) -> &Rational;

    /// Whether job completions trigger the admission routine.
    fn wakes_on_completion(&self) -> bool;

    /// Performs at most one admission at `world.now()`.
    fn admit_one(&mut self, world: &World<'_>) -> Option<(JobId, MachineId)>;

    /// Timers requested since the last call.
    fn take_timers(&mut self) -> Vec<(Time, EventKind)>;

    /// Times at which the threshold may change without any event firing.
    /// The engine records a threshold sample there.
    fn take_watch_points(&mut self) -> Vec<Time> {
        Vec::new()
    }

    /// False for timers invalidated by a later interval update.
    fn timer_is_current(&self, kind: &EventKind) -> bool;

    fn threshold(&self, world: &World<'_>, machine: MachineId) -> Threshold;

    /// Whether the engine should enforce that admissions within one instant
    /// move to later machines or strictly shorter jobs.
    fn bounded_recursion(&self) -> bool {
        true
    }

    fn into_log(self) -> AdmissionLog;
}

struct Engine<'a> {
    instance: &'a Instance,
    now: Time,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    machines: Vec<MachineState>,
    admitted_to: Vec<Option<MachineId>>,
    trace: ScheduleTrace,
    samples: BTreeMap<(Time, MachineId), Threshold>,
    watch: BTreeSet<Time>,
    /// Last admission at the current instant, for the termination measure.
    last_admission: Option<(Time, MachineId, Time)>,
}

impl<'a> Engine<'a> {
    fn push(&mut self, time: Time, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Reverse(Event {
            time,
            kind,
            seq: self.seq,
        }));
    }

    fn world(&self) -> World<'_> {
        World {
            instance: self.instance,
            now: &self.now,
            admitted_to: &self.admitted_to,
            machines: &self.machines,
        }
    }

    fn admit(&mut self, job: JobId, machine: MachineId, measured: bool) -> Result<(), EngineError> {
        let p = self
            .instance
            .processing(job, machine)
            .ok_or(EngineError::NotEligible { job, machine })?
            .clone();
        if self.admitted_to[job].is_some() {
            return Err(EngineError::AlreadyAdmitted { job });
        }
        if self.instance.jobs[job].release > self.now {
            return Err(EngineError::NotReleased { job });
        }
        // Within one instant, admissions move to later machines or to strictly
        // shorter jobs on the same machine, so the routine terminates.
        if let Some((at, last_machine, last_p)) = self.last_admission.as_ref().filter(|_| measured) {
            if *at == self.now && (machine < *last_machine || (machine == *last_machine && p >= *last_p)) {
                return Err(EngineError::RecursionMeasure {
                    job,
                    machine,
                    at: self.now.to_string(),
                });
            }
        }
        self.last_admission = Some((self.now.clone(), machine, p.clone()));
        self.admitted_to[job] = Some(machine);
        self.machines[machine].admit(job, p);
        self.machines[machine].sync(machine, &self.now, &mut self.trace.segments);
        self.trace.admissions.insert(
            job,
            Admission {
                machine,
                at: self.now.clone(),
            },
        );
        Ok(())
    }

    fn routine<P: Policy>(&mut self, policy: &mut P) -> Result<(), EngineError> {
        loop {
            let decision = policy.admit_one(&self.world());
            for (at, kind) in policy.take_timers() {
                if at < self.now {
                    return Err(EngineError::TimerInPast {
                        at: at.to_string(),
                        now: self.now.to_string(),
                    });
                }
                self.push(at, kind);
            }
            for at in policy.take_watch_points() {
                if at > self.now {
                    self.watch.insert(at);
                }
            }
            match decision {
                Some((job, machine)) => {
                    self.admit(job, machine, policy.bounded_recursion())?;
                    self.push(self.now.clone(), EventKind::AdmissionFollowUp);
                }
                None => break,
            }
        }
        self.sample(policy);
        Ok(())
    }

    fn sample<P: Policy>(&mut self, policy: &P) {
        for machine in 0..self.machines.len() {
            let value = policy.threshold(&self.world(), machine);
            self.samples.insert((self.now.clone(), machine), value);
        }
    }
}

/// Runs `policy` on `instance` until no events remain and every admitted job
/// has completed.
pub fn simulate<P: Policy>(instance: &Instance, mut policy: P) -> Result<RunOutput, EngineError> {
    let mut engine = Engine {
        instance,
        now: Time::zero(),
        queue: BinaryHeap::new(),
        seq: 0,
        machines: vec![MachineState::default(); instance.machines],
        admitted_to: vec![None; instance.len()],
        trace: ScheduleTrace {
            machines: instance.machines,
            ..ScheduleTrace::default()
        },
        samples: BTreeMap::new(),
        watch: BTreeSet::new(),
        last_admission: None,
    };
    for job in &instance.jobs {
        engine.push(job.release.clone(), EventKind::Release(job.id));
    }

    loop {
        let next_event = engine.queue.peek().map(|e| e.0.time.clone());
        let next_completion = engine
            .machines
            .iter()
            .filter_map(|m| m.completion_time(&engine.now))
            .min();
        let next_watch = engine.watch.first().cloned();
        let Some(t) = [next_event, next_completion, next_watch].into_iter().flatten().min() else {
            break;
        };

        let mut completed = Vec::new();
        for (i, machine) in engine.machines.iter_mut().enumerate() {
            if let Some(job) = machine.advance(i, &engine.now, &t)? {
                completed.push(job);
            }
        }
        engine.now = t;
        for (i, machine) in engine.machines.iter_mut().enumerate() {
            machine.sync(i, &engine.now, &mut engine.trace.segments);
        }
        for &job in &completed {
            engine.trace.completions.insert(job, engine.now.clone());
        }
        if !completed.is_empty() && policy.wakes_on_completion() {
            engine.routine(&mut policy)?;
        }

        while engine.queue.peek().is_some_and(|e| e.0.time == engine.now) {
            let Reverse(event) = engine.queue.pop().expect("peeked");
            let live = match &event.kind {
                EventKind::Release(_) | EventKind::AdmissionFollowUp => true,
                timer => policy.timer_is_current(timer),
            };
            if live {
                engine.routine(&mut policy)?;
            }
        }
        if engine.watch.first() == Some(&engine.now) {
            engine.watch.pop_first();
            engine.sample(&policy);
        }
    }

    let mut trace = engine.trace;
    trace
        .segments
        .sort_by(|a, b| a.machine.cmp(&b.machine).then(a.start.cmp(&b.start)));
    let samples = engine
        .samples
        .into_iter()
        .map(|((time, machine), value)| ThresholdSample {
            time,
            machine,
            value,
        })
        .collect();
    Ok(RunOutput {
        trace,
        log: policy.into_log(),
        samples,
    })
}
