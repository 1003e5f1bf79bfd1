//! Exact offline optimum for small instances.
//!
//! Preemptive earliest-deadline-first is an exact feasibility test for one
//! machine with release dates, so the non-migratory optimum is the largest
//! assignment of jobs to machines whose per-machine sets pass EDF. The search
//! is a depth-first branch and bound over jobs with memoized per-machine
//! feasibility. Feasibility is downward closed, which gives the bound: a job
//! that fits on no machine now will not fit later in the same branch.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::instance::{Instance, JobId, MachineId};
use crate::time::Time;

/// Default job cap for the exact search.
pub const DEFAULT_CAP: usize = 14;
/// Largest job count the memo table is ever sized for, whatever the cap.
const HARD_CAP: usize = 20;
/// Machine cap for the exact search.
pub const MAX_MACHINES: usize = 3;

/// Numbers the EDF simulation can run on.
pub trait Scalar: Clone + Ord {
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
}

impl Scalar for i128 {
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
}

impl Scalar for Time {
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdfJob<T> {
    pub release: T,
    pub deadline: T,
    pub processing: T,
}

/// Preemptive EDF on one machine, ties by input index. Returns completion
/// times in input order. With `stop_on_miss`, returns `None` as soon as a
/// job finishes after its deadline.
fn edf<T: Scalar>(jobs: &[EdfJob<T>], stop_on_miss: bool) -> Option<Vec<T>> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| jobs[a].release.cmp(&jobs[b].release).then(a.cmp(&b)));
    let mut completion: Vec<Option<T>> = vec![None; jobs.len()];
    let mut remaining: Vec<T> = jobs.iter().map(|j| j.processing.clone()).collect();
    let mut ready: BinaryHeap<Reverse<(T, usize)>> = BinaryHeap::new();
    let mut next = 0;
    let Some(&first) = order.first() else {
        return Some(Vec::new());
    };
    let mut now = jobs[first].release.clone();
    loop {
        while next < order.len() && jobs[order[next]].release <= now {
            let i = order[next];
            ready.push(Reverse((jobs[i].deadline.clone(), i)));
            next += 1;
        }
        let Some(Reverse((deadline, i))) = ready.pop() else {
            match order.get(next) {
                Some(&i) => {
                    now = jobs[i].release.clone();
                    continue;
                }
                None => break,
            }
        };
        let finish = now.plus(&remaining[i]);
        match order.get(next).map(|&k| &jobs[k].release) {
            Some(release) if *release < finish => {
                remaining[i] = remaining[i].minus(&release.minus(&now));
                now = release.clone();
                ready.push(Reverse((deadline, i)));
            }
            _ => {
                if stop_on_miss && finish > deadline {
                    return None;
                }
                now = finish.clone();
                completion[i] = Some(finish);
            }
        }
    }
    Some(completion.into_iter().map(|c| c.expect("every job completes")).collect())
}

/// True iff all jobs can meet their deadlines on one machine with preemption.
pub fn edf_feasible<T: Scalar>(jobs: &[EdfJob<T>]) -> bool {
    edf(jobs, true).is_some()
}

/// EDF completion times, in input order (jobs may be late).
pub fn edf_completions<T: Scalar>(jobs: &[EdfJob<T>]) -> Vec<T> {
    edf(jobs, false).expect("runs to completion")
}

/// Jobs assigned to each machine.
pub type Witness = BTreeMap<MachineId, BTreeSet<JobId>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub opt: usize,
    pub witness: Witness,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("instance with {jobs} jobs on {machines} machines exceeds the exact cap ({cap} jobs, {max_machines} machines); use the upper bound")]
pub struct CapExceeded {
    pub jobs: usize,
    pub machines: usize,
    pub cap: usize,
    pub max_machines: usize,
}

/// Instance times as integers over a common denominator, when that fits.
struct Scaled {
    release: Vec<i128>,
    deadline: Vec<i128>,
    proc: Vec<Vec<Option<i128>>>,
}

fn scale_instance(instance: &Instance) -> Option<Scaled> {
    let mut lcm = BigInt::one();
    let mut times: Vec<&Time> = Vec::new();
    for job in &instance.jobs {
        times.push(&job.release);
        times.push(&job.deadline);
        times.extend(job.proc.iter().filter_map(|p| p.finite()));
    }
    for t in &times {
        lcm = lcm.lcm(t.denom());
    }
    // Leave headroom for sums of up to n values.
    let limit = BigInt::from(1u128 << 100);
    let conv = |t: &Time| -> Option<i128> {
        let v = t.numer() * (&lcm / t.denom());
        if v.magnitude() > limit.magnitude() {
            return None;
        }
        v.to_i128()
    };
    let mut scaled = Scaled {
        release: Vec::new(),
        deadline: Vec::new(),
        proc: Vec::new(),
    };
    for job in &instance.jobs {
        scaled.release.push(conv(&job.release)?);
        scaled.deadline.push(conv(&job.deadline)?);
        let mut row = Vec::with_capacity(job.proc.len());
        for p in &job.proc {
            row.push(match p.finite() {
                Some(p) => Some(conv(p)?),
                None => None,
            });
        }
        scaled.proc.push(row);
    }
    Some(scaled)
}

/// Feasibility of `mask` on `machine`, memoized.
trait Feasibility {
    fn feasible(&mut self, machine: MachineId, mask: u32) -> bool;
}

struct Memo<T: Scalar> {
    release: Vec<T>,
    deadline: Vec<T>,
    proc: Vec<Vec<Option<T>>>,
    n: usize,
    /// 0 unknown, 1 feasible, 2 infeasible; indexed `machine << n | mask`.
    cache: Vec<u8>,
}

impl<T: Scalar> Memo<T> {
    fn new(release: Vec<T>, deadline: Vec<T>, proc: Vec<Vec<Option<T>>>, machines: usize) -> Self {
        let n = release.len();
        Memo {
            release,
            deadline,
            proc,
            n,
            cache: vec![0; machines << n],
        }
    }
}

impl<T: Scalar> Feasibility for Memo<T> {
    fn feasible(&mut self, machine: MachineId, mask: u32) -> bool {
        let key = (machine << self.n) | mask as usize;
        match self.cache[key] {
            1 => return true,
            2 => return false,
            _ => {}
        }
        let mut jobs = Vec::new();
        let mut ok = true;
        for j in 0..self.n {
            if mask & (1 << j) == 0 {
                continue;
            }
            match &self.proc[j][machine] {
                Some(p) => jobs.push(EdfJob {
                    release: self.release[j].clone(),
                    deadline: self.deadline[j].clone(),
                    processing: p.clone(),
                }),
                None => ok = false,
            }
        }
        let ok = ok && edf_feasible(&jobs);
        self.cache[key] = if ok { 1 } else { 2 };
        ok
    }
}

struct Search<'a, F: Feasibility> {
    memo: &'a mut F,
    order: Vec<JobId>,
    eligible: Vec<Vec<MachineId>>,
    best: usize,
    best_masks: Vec<u32>,
}

impl<F: Feasibility> Search<'_, F> {
    fn dfs(&mut self, depth: usize, masks: &mut Vec<u32>, count: usize) {
        if count > self.best {
            self.best = count;
            self.best_masks = masks.clone();
        }
        let rest = self.order.len() - depth;
        if count + rest <= self.best {
            return;
        }
        // Jobs that no machine can take now cannot be taken deeper either.
        let mut insertable = 0;
        for &j in &self.order[depth..] {
            let fits = self.eligible[j]
                .iter()
                .any(|&i| self.memo.feasible(i, masks[i] | (1 << j)));
            insertable += usize::from(fits);
        }
        if count + insertable <= self.best {
            return;
        }
        let j = self.order[depth];
        for idx in 0..self.eligible[j].len() {
            let i = self.eligible[j][idx];
            let with = masks[i] | (1 << j);
            if self.memo.feasible(i, with) {
                let old = masks[i];
                masks[i] = with;
                self.dfs(depth + 1, masks, count + 1);
                masks[i] = old;
            }
        }
        self.dfs(depth + 1, masks, count);
    }
}

fn search<F: Feasibility>(instance: &Instance, memo: &mut F) -> (usize, Witness) {
    let n = instance.len();
    let m = instance.machines;
    let mut order: Vec<JobId> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&instance.jobs[a], &instance.jobs[b]);
        x.deadline.cmp(&y.deadline).then(a.cmp(&b))
    });
    let eligible = instance
        .jobs
        .iter()
        .map(|j| j.eligible_machines().collect())
        .collect();
    let mut s = Search {
        memo,
        order,
        eligible,
        best: 0,
        best_masks: vec![0; m],
    };
    let mut masks = vec![0u32; m];
    s.dfs(0, &mut masks, 0);
    let witness = (0..m)
        .map(|i| {
            let set = (0..n).filter(|&j| s.best_masks[i] & (1 << j) != 0).collect();
            (i, set)
        })
        .collect();
    (s.best, witness)
}

/// Maximum number of jobs a non-migratory schedule completes on time.
pub fn opt_throughput(instance: &Instance, cap: usize) -> Result<OracleResult, CapExceeded> {
    let n = instance.len();
    let m = instance.machines;
    if n > cap.min(HARD_CAP) || m > MAX_MACHINES {
        return Err(CapExceeded {
            jobs: n,
            machines: m,
            cap,
            max_machines: MAX_MACHINES,
        });
    }
    let (opt, witness) = match scale_instance(instance) {
        Some(s) => search(instance, &mut Memo::new(s.release, s.deadline, s.proc, m)),
        None => {
            let release = instance.jobs.iter().map(|j| j.release.clone()).collect();
            let deadline = instance.jobs.iter().map(|j| j.deadline.clone()).collect();
            let proc = instance
                .jobs
                .iter()
                .map(|j| j.proc.iter().map(|p| p.finite().cloned()).collect())
                .collect();
            search(instance, &mut Memo::new(release, deadline, proc, m))
        }
    };
    Ok(OracleResult {
        opt,
        witness,
        exact: true,
    })
}

/// Per machine, the most jobs whose processing times fit into the span from
/// the earliest release to the latest deadline of its eligible jobs; summed
/// over machines and capped at `n`.
pub fn opt_upper_bound(instance: &Instance) -> usize {
    let total: usize = (0..instance.machines)
        .map(|i| {
            let eligible: Vec<_> = instance
                .jobs
                .iter()
                .filter_map(|j| j.processing(i).map(|p| (j, p)))
                .collect();
            let (Some(start), Some(end)) = (
                eligible.iter().map(|(j, _)| &j.release).min(),
                eligible.iter().map(|(j, _)| &j.deadline).max(),
            ) else {
                return 0;
            };
            let span = end - start;
            let mut sizes: Vec<&Time> = eligible.iter().map(|(_, p)| *p).collect();
            sizes.sort();
            let mut used = Time::zero();
            let mut count = 0;
            for p in sizes {
                used += p;
                if used > span {
                    break;
                }
                count += 1;
            }
            count
        })
        .sum();
    total.min(instance.len())
}

/// Exact optimum within the cap, otherwise the upper bound with `exact: false`.
pub fn solve(instance: &Instance, cap: usize) -> OracleResult {
    opt_throughput(instance, cap).unwrap_or_else(|_| OracleResult {
        opt: opt_upper_bound(instance),
        witness: Witness::new(),
        exact: false,
    })
}

/// EDF completion times of the witness jobs on their machines.
pub fn witness_completions(instance: &Instance, witness: &Witness) -> BTreeMap<JobId, Time> {
    let mut out = BTreeMap::new();
    for (&machine, jobs) in witness {
        let ids: Vec<JobId> = jobs.iter().copied().collect();
        let edf_jobs: Vec<EdfJob<Time>> = ids
            .iter()
            .map(|&j| EdfJob {
                release: instance.jobs[j].release.clone(),
                deadline: instance.jobs[j].deadline.clone(),
                processing: instance
                    .processing(j, machine)
                    .expect("witness respects eligibility")
                    .clone(),
            })
            .collect();
        for (j, c) in ids.into_iter().zip(edf_completions(&edf_jobs)) {
            out.insert(j, c);
        }
    }
    out
}

/// True iff every witness set is eligible and EDF-feasible on its machine
/// and no job appears twice.
pub fn witness_is_valid(instance: &Instance, witness: &Witness) -> bool {
    let mut seen = BTreeSet::new();
    witness.iter().all(|(&machine, jobs)| {
        jobs.iter().all(|&j| seen.insert(j))
            && jobs.iter().all(|&j| instance.processing(j, machine).is_some())
            && edf_feasible(
                &jobs
                    .iter()
                    .map(|&j| EdfJob {
                        release: instance.jobs[j].release.clone(),
                        deadline: instance.jobs[j].deadline.clone(),
                        processing: instance.processing(j, machine).expect("checked").clone(),
                    })
                    .collect::<Vec<_>>(),
            )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Profile};
    use crate::instance::{Job, ProcessingTime};
    use crate::time::ratio;
    use proptest::prelude::*;

    fn ej(r: (i64, i64), d: (i64, i64), p: (i64, i64)) -> EdfJob<Time> {
        EdfJob {
            release: Time::new(r.0, r.1),
            deadline: Time::new(d.0, d.1),
            processing: Time::new(p.0, p.1),
        }
    }

    #[test]
    fn edf_examples() {
        assert!(edf_feasible(&[ej((0, 1), (1, 1), (1, 1)), ej((0, 1), (2, 1), (1, 1))]));
        assert!(!edf_feasible(&[ej((0, 1), (1, 1), (1, 1)), ej((0, 1), (1, 1), (1, 2))]));
        let jobs = [ej((0, 1), (2, 1), (1, 1)), ej((1, 1), (2, 1), (1, 1))];
        assert!(edf_feasible(&jobs));
        assert_eq!(edf_completions(&jobs), vec![Time::from_int(1), Time::from_int(2)]);
    }

    #[test]
    fn edf_preempts_for_earlier_deadline() {
        let jobs = [ej((0, 1), (10, 1), (4, 1)), ej((1, 1), (3, 1), (1, 1))];
        assert_eq!(edf_completions(&jobs), vec![Time::from_int(5), Time::from_int(2)]);
    }

    fn identical(m: usize) -> Instance {
        let jobs = (0..3)
            .map(|id| Job {
                id,
                release: Time::zero(),
                deadline: Time::from_int(2),
                proc: vec![ProcessingTime::Finite(Time::from_int(1)); m],
            })
            .collect();
        Instance::new(m, ratio(1, 1), jobs)
    }

    #[test]
    fn identical_jobs() {
        // d = 2 so the slack condition holds; two fit by time 2 on one machine.
        assert_eq!(opt_throughput(&identical(1), DEFAULT_CAP).unwrap().opt, 2);
        assert_eq!(opt_throughput(&identical(2), DEFAULT_CAP).unwrap().opt, 3);
    }

    #[test]
    fn unit_windows() {
        let mk = |m: usize| {
            let jobs = (0..3)
                .map(|id| Job {
                    id,
                    release: Time::zero(),
                    deadline: Time::from_int(1),
                    proc: vec![ProcessingTime::Finite(Time::from_int(1)); m],
                })
                .collect();
            Instance::new(m, ratio(0, 1), jobs)
        };
        assert_eq!(opt_throughput(&mk(1), DEFAULT_CAP).unwrap().opt, 1);
        assert_eq!(opt_throughput(&mk(2), DEFAULT_CAP).unwrap().opt, 2);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = generate(1, 15, 1, &ratio(1, 2), Profile::Uniform);
        assert!(opt_throughput(&inst, DEFAULT_CAP).is_err());
        let r = solve(&inst, DEFAULT_CAP);
        assert!(!r.exact);
        assert!(r.opt <= 15);
        let wide = generate(1, 4, 4, &ratio(1, 2), Profile::Uniform);
        assert!(opt_throughput(&wide, DEFAULT_CAP).is_err());
    }

    #[test]
    fn upper_bound_edge_cases() {
        assert_eq!(opt_upper_bound(&Instance::new(2, ratio(1, 1), vec![])), 0);
        let one = generate(5, 1, 2, &ratio(1, 1), Profile::Uniform);
        assert_eq!(opt_upper_bound(&one), 1);
    }

    #[test]
    fn nested_seed_three_single_machine() {
        let inst = generate(3, 8, 1, &ratio(1, 2), Profile::Nested);
        let r = opt_throughput(&inst, DEFAULT_CAP).unwrap();
        assert!(witness_is_valid(&inst, &r.witness));
        assert_eq!(r.opt, NESTED_SEED_THREE_OPT);
        let jobs: Vec<EdfJob<Time>> = inst
            .jobs
            .iter()
            .map(|j| EdfJob {
                release: j.release.clone(),
                deadline: j.deadline.clone(),
                processing: inst.processing(j.id, 0).unwrap().clone(),
            })
            .collect();
        let best = (0u32..1 << jobs.len())
            .filter(|mask| {
                let subset: Vec<_> = (0..jobs.len())
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| jobs[k].clone())
                    .collect();
                edf_feasible(&subset)
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap();
        assert_eq!(best, NESTED_SEED_THREE_OPT);
    }

    const NESTED_SEED_THREE_OPT: usize = 7;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn removing_a_job_keeps_feasibility(
            seed in 0u64..5_000,
            n in 1usize..8,
            drop in 0usize..8,
        ) {
            let inst = generate(seed, n, 1, &ratio(1, 2), Profile::Bursty);
            let jobs: Vec<EdfJob<Time>> = inst.jobs.iter().map(|j| EdfJob {
                release: j.release.clone(),
                deadline: j.deadline.clone(),
                processing: j.processing(0).unwrap().clone(),
            }).collect();
            if edf_feasible(&jobs) {
                let mut fewer = jobs.clone();
                fewer.remove(drop % jobs.len());
                prop_assert!(edf_feasible(&fewer));
            }
        }

        #[test]
        fn witness_revalidates_and_bound_dominates(
            seed in 0u64..5_000,
            n in 1usize..10,
            m in 1usize..4,
            profile in prop::sample::select(Profile::ALL.to_vec()),
        ) {
            let inst = generate(seed, n, m, &ratio(1, 4), profile);
            let r = opt_throughput(&inst, DEFAULT_CAP).unwrap();
            prop_assert!(witness_is_valid(&inst, &r.witness));
            let count: usize = r.witness.values().map(BTreeSet::len).sum();
            prop_assert_eq!(count, r.opt);
            prop_assert!(opt_upper_bound(&inst) >= r.opt);
        }

        #[test]
        fn integer_and_rational_edf_agree(seed in 0u64..5_000, n in 1usize..10) {
            let inst = generate(seed, n, 1, &ratio(1, 8), Profile::TightSlack);
            let exact: Vec<EdfJob<Time>> = inst.jobs.iter().map(|j| EdfJob {
                release: j.release.clone(),
                deadline: j.deadline.clone(),
                processing: j.processing(0).unwrap().clone(),
            }).collect();
            let s = scale_instance(&inst).unwrap();
            let ints: Vec<EdfJob<i128>> = (0..n).map(|j| EdfJob {
                release: s.release[j],
                deadline: s.deadline[j],
                processing: s.proc[j][0].unwrap(),
            }).collect();
            prop_assert_eq!(edf_feasible(&exact), edf_feasible(&ints));
        }
    }
}
