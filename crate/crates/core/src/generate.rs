//! Seeded instance generators.
//!
//! All processing times are whole multiples of `1/10000`, which keeps
//! denominators small for the exact oracle. Deadlines are derived from the
//! largest eligible processing time so every generated instance satisfies
//! the slack condition for the requested ε.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, Job, ProcessingTime};
use crate::time::{ratio, Rational, Time};

/// Ticks per time unit.
pub const TICKS: i64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Independent releases over a horizon proportional to `n / m`.
    Uniform,
    /// Releases clustered around a few burst instants.
    Bursty,
    /// Jobs released inside the windows of earlier, larger jobs, with sizes
    /// scaled down so they preempt or get admitted as children. Mostly tight
    /// deadlines; this is the adversarial profile.
    Nested,
    /// Uniform releases with `d_j − r_j = (1 + ε)·max_i p_ij` exactly.
    TightSlack,
}

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::Uniform,
        Profile::Bursty,
        Profile::Nested,
        Profile::TightSlack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Uniform => "uniform",
            Profile::Bursty => "bursty",
            Profile::Nested => "nested",
            Profile::TightSlack => "tight-slack",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown profile `{0}` (expected uniform, bursty, nested or tight-slack)")]
pub struct UnknownProfile(String);

impl FromStr for Profile {
    type Err = UnknownProfile;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownProfile(s.to_string()))
    }
}

fn ticks(k: i64) -> Time {
    Time::new(k, TICKS)
}

/// `max(1, ⌊t · factor⌋)`
fn scale_ticks(t: i64, factor: &Rational) -> i64 {
    let scaled = Rational::from_integer(BigInt::from(t)) * factor;
    scaled.floor().to_integer().to_i64().unwrap_or(i64::MAX).max(1)
}

struct Draft {
    release: i64,
    base: i64,
}

/// Generates a valid instance; the same arguments always give the same instance.
///
/// Panics if `n` or `m` is zero or `epsilon` is not positive.
pub fn generate(seed: u64, n: usize, m: usize, epsilon: &Rational, profile: Profile) -> Instance {
    assert!(n >= 1 && m >= 1, "n and m must be at least 1");
    assert!(
        *epsilon > Rational::from_integer(0.into()),
        "epsilon must be positive"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_i = n as i64;
    let m_i = m as i64;

    let drafts: Vec<Draft> = match profile {
        Profile::Uniform | Profile::TightSlack => {
            let horizon = (n_i * TICKS / m_i).max(TICKS);
            (0..n)
                .map(|_| Draft {
                    release: rng.gen_range(0..=horizon),
                    base: rng.gen_range(1_000..=30_000),
                })
                .collect()
        }
        Profile::Bursty => {
            let horizon = (n_i * TICKS / m_i).max(TICKS);
            let bursts: Vec<i64> = (0..1 + n / 8).map(|_| rng.gen_range(0..=horizon)).collect();
            (0..n)
                .map(|_| {
                    let at = bursts[rng.gen_range(0..bursts.len())];
                    Draft {
                        release: at + rng.gen_range(0..=1_000),
                        base: rng.gen_range(1_000..=30_000),
                    }
                })
                .collect()
        }
        Profile::Nested => nested_drafts(&mut rng, n, m, epsilon),
    };

    let factors = [ratio(1, 2), ratio(3, 4), ratio(1, 1), ratio(3, 2), ratio(2, 1)];
    let one_plus_eps = Rational::one() + epsilon;
    let jobs = drafts
        .into_iter()
        .enumerate()
        .map(|(id, draft)| {
            let mut eligible: Vec<bool> = (0..m).map(|_| m == 1 || rng.gen_bool(0.75)).collect();
            if !eligible.iter().any(|&e| e) {
                eligible[rng.gen_range(0..m)] = true;
            }
            let proc: Vec<ProcessingTime> = eligible
                .iter()
                .map(|&e| {
                    if !e {
                        return ProcessingTime::NonEligible;
                    }
                    let p = match profile {
                        // Keep the size ladder intact across machines.
                        Profile::Nested => draft.base,
                        _ => scale_ticks(draft.base, &factors[rng.gen_range(0..factors.len())]),
                    };
                    ProcessingTime::Finite(ticks(p))
                })
                .collect();
            let pmax = proc
                .iter()
                .filter_map(ProcessingTime::finite)
                .max()
                .cloned()
                .expect("at least one eligible machine");
            let pmax_ticks = (pmax.numer() * TICKS / pmax.denom()).to_i64().unwrap_or(1);
            let extra = match profile {
                Profile::Uniform => rng.gen_range(0..=2 * pmax_ticks),
                Profile::Bursty => rng.gen_range(0..=pmax_ticks),
                Profile::Nested => {
                    if rng.gen_bool(0.25) {
                        rng.gen_range(0..=pmax_ticks)
                    } else {
                        0
                    }
                }
                Profile::TightSlack => 0,
            };
            let release = ticks(draft.release);
            let deadline = &release + &pmax.scale(&one_plus_eps) + ticks(extra);
            Job {
                id,
                release,
                deadline,
                proc,
            }
        })
        .collect();

    Instance::new(m, epsilon.clone(), jobs)
}

fn nested_drafts(rng: &mut ChaCha8Rng, n: usize, m: usize, epsilon: &Rational) -> Vec<Draft> {
    let eps = crate::instance::clamp_epsilon(epsilon);
    // Shrink factors: one that preempts under the ε/4 rule, one small enough
    // to be a child under the blocking rule (γ = δ/16 ≥ ε/32), and a
    // similar-size one.
    let shrink = [
        &eps * ratio(1, 5),
        &eps * ratio(1, 40),
        ratio(1, 3),
    ];
    let horizon = ((n as i64) * TICKS / (2 * m as i64)).max(TICKS);
    let mut drafts: Vec<Draft> = Vec::with_capacity(n);
    for k in 0..n {
        if k == 0 || rng.gen_bool(0.2) {
            drafts.push(Draft {
                release: rng.gen_range(0..=horizon),
                base: rng.gen_range(10_000..=20_000),
            });
            continue;
        }
        // Prefer recent hosts so chains form.
        let back = rng.gen_range(0..k.min(3));
        let host = &drafts[k - 1 - back];
        let pick = rng.gen_range(0..10);
        let factor = match pick {
            0..=5 => &shrink[0],
            6..=8 => &shrink[1],
            _ => &shrink[2],
        };
        let jitter = ratio(rng.gen_range(60..=100), 100);
        let base = scale_ticks(host.base, &(factor * &jitter));
        let offset = rng.gen_range(0..=host.base.max(1));
        drafts.push(Draft {
            release: host.release + offset,
            base,
        });
    }
    drafts
}

/// `gcd`-free check used by tests: every processing time has denominator
/// dividing [`TICKS`].
pub fn denominators_bounded(instance: &Instance) -> bool {
    let ticks = BigInt::from(TICKS);
    instance.jobs.iter().all(|j| {
        j.proc
            .iter()
            .filter_map(ProcessingTime::finite)
            .all(|p| ticks.is_multiple_of(p.denom()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_job_instance_is_valid() {
        let inst = generate(1, 1, 1, &ratio(1, 1), Profile::Uniform);
        assert_eq!(inst.len(), 1);
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(1, 1, 1, &ratio(1, 1), Profile::Uniform);
        let b = generate(1, 1, 1, &ratio(1, 1), Profile::Uniform);
        assert_eq!(a, b);
        let c = generate(9, 25, 3, &ratio(1, 4), Profile::Bursty);
        let d = generate(9, 25, 3, &ratio(1, 4), Profile::Bursty);
        assert_eq!(c, d);
    }

    #[test]
    fn nested_seed_seven_is_valid() {
        let inst = generate(7, 20, 3, &ratio(1, 4), Profile::Nested);
        assert_eq!(inst.len(), 20);
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn tight_slack_is_exactly_tight() {
        let eps = ratio(1, 2);
        let inst = generate(4, 12, 2, &eps, Profile::TightSlack);
        for job in &inst.jobs {
            let pmax = job.max_processing().unwrap();
            assert_eq!(job.window(), pmax.scale(&(Rational::one() + &eps)));
        }
    }

    #[test]
    fn profile_names_round_trip() {
        for p in Profile::ALL {
            assert_eq!(p.name().parse::<Profile>().unwrap(), p);
        }
        assert!("zipf".parse::<Profile>().is_err());
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        prop::sample::select(Profile::ALL.to_vec())
    }

    fn arb_eps() -> impl Strategy<Value = Rational> {
        prop::sample::select(vec![ratio(1, 8), ratio(1, 4), ratio(1, 2), ratio(1, 1), ratio(3, 1)])
    }

    proptest! {
        #[test]
        fn generated_instances_are_valid(
            seed in 0u64..10_000,
            n in 1usize..40,
            m in 1usize..5,
            eps in arb_eps(),
            profile in arb_profile(),
        ) {
            let inst = generate(seed, n, m, &eps, profile);
            prop_assert!(inst.validate().is_ok(), "{}", inst.validate());
            prop_assert!(denominators_bounded(&inst));
        }

        #[test]
        fn availability_never_returns_after_deadline_test_fails(
            seed in 0u64..1_000,
            eps in arb_eps(),
            steps in prop::collection::vec(0i64..5_000, 1..20),
        ) {
            let inst = generate(seed, 4, 2, &eps, Profile::Uniform);
            let delta = &crate::instance::clamp_epsilon(&eps) / Rational::from_integer(2.into());
            for job in &inst.jobs {
                for machine in job.eligible_machines() {
                    let mut now = job.release.clone();
                    let mut lost = false;
                    for step in &steps {
                        now = &now + &ticks(*step);
                        let ok = inst.available(job.id, machine, &now, &delta, |_| false).unwrap();
                        prop_assert!(!(lost && ok));
                        lost |= !ok;
                    }
                }
            }
        }
    }
}
