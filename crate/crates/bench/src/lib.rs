//! Fixed workloads for the criterion benches.

use sched_sim::{generate, ratio, Instance, Profile};

/// `count` instances of the given shape with seeds `0..count`.
pub fn workload(count: u64, n: usize, m: usize, epsilon: (i64, i64), profile: Profile) -> Vec<Instance> {
    let eps = ratio(epsilon.0, epsilon.1);
    (0..count).map(|seed| generate(seed, n, m, &eps, profile)).collect()
}
