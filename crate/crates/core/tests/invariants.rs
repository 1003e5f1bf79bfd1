//! Randomized invariants over generated instances. The acceptance binary
//! sweeps fixed seed ranges; these explore shapes proptest can shrink.

use proptest::prelude::*;

use sched_sim::oracle::{solve, DEFAULT_CAP};
use sched_sim::verify::suite::verify_instance;
use sched_sim::verify::{extract, mutant_caught, mutate, Artifacts};
use sched_sim::{generate, ratio, run, Algorithm, CommitmentModel, Instance, Profile, Rational};

fn arb_eps() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![ratio(1, 8), ratio(1, 4), ratio(1, 2), ratio(1, 1)])
}

fn arb_profile() -> impl Strategy<Value = Profile> {
    prop::sample::select(Profile::ALL.to_vec())
}

fn arb_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (any::<u64>(), 1..=max_n, 1..=max_m, arb_eps(), arb_profile())
        .prop_map(|(seed, n, m, eps, profile)| generate(seed, n, m, &eps, profile))
}

fn arb_blocking_model(eps: &Rational) -> impl Strategy<Value = CommitmentModel> {
    let half = eps / ratio(2, 1);
    prop::sample::select(vec![CommitmentModel::None, CommitmentModel::UponAdmission, CommitmentModel::Delta(half)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn blocking_runs_pass_every_check(
        (inst, model) in arb_instance(10, 3).prop_flat_map(|i| {
            let models = arb_blocking_model(&i.epsilon);
            (Just(i), models)
        })
    ) {
        let v = verify_instance(&inst, Algorithm::Blocking, &model, Some(DEFAULT_CAP)).unwrap();
        prop_assert!(v.report.pass, "{:?}", v.report.findings);
        let admitted = v.output.log.records.len();
        prop_assert_eq!(v.output.trace.on_time_count(&inst), admitted);
    }

    #[test]
    fn region_runs_pass_every_check(inst in arb_instance(10, 3)) {
        let v = verify_instance(&inst, Algorithm::Region, &CommitmentModel::None, Some(DEFAULT_CAP)).unwrap();
        prop_assert!(v.report.pass, "{:?}", v.report.findings);
    }

    #[test]
    fn nobody_beats_the_offline_optimum(inst in arb_instance(9, 2)) {
        let opt = solve(&inst, DEFAULT_CAP);
        prop_assert!(opt.exact);
        for (alg, model) in [
            (Algorithm::Blocking, CommitmentModel::UponAdmission),
            (Algorithm::Region, CommitmentModel::None),
        ] {
            let out = run(&inst, alg, &model).unwrap();
            prop_assert!(out.trace.on_time_count(&inst) <= opt.opt);
        }
    }

    #[test]
    fn runs_are_deterministic(inst in arb_instance(12, 3)) {
        for alg in [Algorithm::Blocking, Algorithm::Region] {
            let model = if alg == Algorithm::Blocking { CommitmentModel::UponAdmission } else { CommitmentModel::None };
            let a = run(&inst, alg, &model).unwrap();
            let b = run(&inst, alg, &model).unwrap();
            prop_assert_eq!(serde_json::to_string(&a.log).unwrap(), serde_json::to_string(&b.log).unwrap());
            prop_assert_eq!(a.trace.segments, b.trace.segments);
        }
    }

    #[test]
    fn perturbed_logs_are_rejected(inst in arb_instance(8, 2), seed in any::<u64>()) {
        let model = CommitmentModel::UponAdmission;
        let out = run(&inst, Algorithm::Blocking, &model).unwrap();
        let witness = solve(&inst, DEFAULT_CAP).witness;
        let art = Artifacts { instance: &inst, model: &model, trace: &out.trace, log: &out.log, samples: &out.samples };
        let timeline = extract(&inst, &out.trace, &out.log, Algorithm::Blocking).unwrap();
        for m in mutate::sample(&out.log, &timeline, seed, 3) {
            prop_assert!(mutant_caught(&art, &timeline, &m, Some(&witness)), "escaped: {:?}", m);
        }
    }
}
