//! Competitive-ratio bounds against the offline optimum.

use num_traits::One;
use serde::Serialize;

use crate::instance::Instance;
use crate::time::{ratio, rational_str, Rational};
use crate::trace::{Algorithm, AdmissionLog, PolicyParams, ScheduleTrace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub algorithm: Algorithm,
    pub admitted: usize,
    pub finished: usize,
    pub opt: usize,
    /// False when `opt` is only an upper bound on the optimum.
    pub opt_exact: bool,
    #[serde(with = "rational_str")]
    pub factor: Rational,
    #[serde(with = "rational_str")]
    pub bound: Rational,
    /// `OPT / |F|`; absent when nothing finished.
    #[serde(serialize_with = "opt_ratio")]
    pub ratio: Option<Rational>,
    pub satisfied: bool,
}

fn opt_ratio<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&crate::time::format_rational(r)),
        None => s.serialize_none(),
    }
}

/// `(ε/(ε−δ))·(2β + (1+2δ)/γ)` for the blocking policy's parameters.
pub fn blocking_alpha(params: &PolicyParams) -> Rational {
    let eps = &params.epsilon;
    let delta = &params.delta;
    let beta = params.beta.clone().unwrap_or_else(|| ratio(0, 1));
    let lead = eps / (eps - delta);
    let two = ratio(2, 1);
    lead * (&two * beta + (Rational::one() + &two * delta) / &params.admit_factor)
}

/// Multiplier on `|J|` that bounds the optimum.
pub fn bound_factor(log: &AdmissionLog) -> Rational {
    match log.algorithm {
        Algorithm::Blocking => blocking_alpha(&log.params) + ratio(5, 1),
        Algorithm::Region => ratio(8, 1) / &log.params.epsilon + ratio(4, 1),
    }
}

/// Blocking: every admitted job finishes and `OPT ≤ (α+5)|J|`.
/// Region: `2|F| ≥ |J|` and `OPT ≤ (8/ε+4)|J|`. When `opt` is only an upper
/// bound, exceeding the ceiling proves nothing and only the completion part
/// counts.
pub fn check_bounds(
    instance: &Instance,
    trace: &ScheduleTrace,
    log: &AdmissionLog,
    opt: usize,
    opt_exact: bool,
) -> BoundReport {
    let admitted = log.records.len();
    let finished = log
        .records
        .iter()
        .filter(|r| trace.on_time(instance, r.job))
        .count();
    let factor = bound_factor(log);
    let bound = &factor * Rational::from_integer(admitted.into());
    let within = Rational::from_integer(opt.into()) <= bound;
    let completion = match log.algorithm {
        Algorithm::Blocking => finished == admitted,
        Algorithm::Region => 2 * finished >= admitted,
    };
    BoundReport {
        algorithm: log.algorithm,
        admitted,
        finished,
        opt,
        opt_exact,
        ratio: (finished > 0).then(|| Rational::new(opt.into(), finished.into())),
        factor,
        bound,
        satisfied: completion && (within || !opt_exact),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocking::derive_params;
    use crate::instance::CommitmentModel;
    use crate::region::RegionPolicy;

    #[test]
    fn alpha_at_epsilon_one() {
        let params = derive_params(&ratio(1, 1), &CommitmentModel::UponAdmission)
            .unwrap()
            .to_policy_params();
        assert_eq!(blocking_alpha(&params), ratio(256, 1));
    }

    #[test]
    fn region_factor_matches_policy() {
        for eps in [ratio(1, 8), ratio(1, 4), ratio(1, 2), ratio(1, 1)] {
            let log = AdmissionLog {
                algorithm: Algorithm::Region,
                params: PolicyParams {
                    epsilon: eps.clone(),
                    delta: &eps / ratio(2, 1),
                    admit_factor: &eps / ratio(4, 1),
                    beta: None,
                },
                records: vec![],
            };
            assert_eq!(bound_factor(&log), RegionPolicy::bound_factor(&eps));
        }
    }

    #[test]
    fn empty_instance_is_satisfied() {
        let inst = Instance::new(1, ratio(1, 1), vec![]);
        for alg in [Algorithm::Blocking, Algorithm::Region] {
            let out = crate::run(&inst, alg, &CommitmentModel::None).unwrap();
            let report = check_bounds(&inst, &out.trace, &out.log, 0, true);
            assert!(report.satisfied);
            assert_eq!((report.admitted, report.opt), (0, 0));
            assert_eq!(report.ratio, None);
        }
    }
}
