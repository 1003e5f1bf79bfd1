//! Seeded verification batches and their report formats.

use serde::Serialize;

use crate::generate::{generate, Profile};
use crate::instance::{CommitmentModel, Instance};
use crate::oracle::{opt_upper_bound, solve, Witness};
use crate::time::{format_rational, rational_str, Rational};
use crate::trace::{Algorithm, RunOutput};
use crate::RunError;

use super::{check_bounds, verify_artifacts, Artifacts, BoundReport, Finding};

/// One generated instance and the configuration to run it under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub epsilon: Rational,
    pub profile: Profile,
    pub algorithm: Algorithm,
    pub model: CommitmentModel,
}

impl Case {
    pub fn instance(&self) -> Instance {
        generate(self.seed, self.n, self.m, &self.epsilon, self.profile)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceReport {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    #[serde(with = "rational_str")]
    pub delta: Rational,
    pub profile: String,
    pub model: String,
    pub bound: BoundReport,
    pub findings: Vec<Finding>,
    pub pass: bool,
}

/// A run together with its verification report and, when the optimum was
/// computed exactly, the offline witness it was checked against.
#[derive(Debug, Clone)]
pub struct Verified {
    pub output: RunOutput,
    pub report: InstanceReport,
    pub witness: Option<Witness>,
}

/// Runs and verifies one instance. With `oracle_cap`, the optimum comes from
/// the exact oracle when the instance is small enough (and the volume lemma
/// is checked against its witness); otherwise OPT is the volume upper bound.
pub fn verify_instance(
    instance: &Instance,
    algorithm: Algorithm,
    model: &CommitmentModel,
    oracle_cap: Option<usize>,
) -> Result<Verified, RunError> {
    let out = crate::run(instance, algorithm, model)?;
    let art = Artifacts {
        instance,
        model,
        trace: &out.trace,
        log: &out.log,
        samples: &out.samples,
    };
    let oracle = oracle_cap.map(|cap| solve(instance, cap));
    let (opt, exact) = match &oracle {
        Some(o) => (o.opt, o.exact),
        None => (opt_upper_bound(instance), false),
    };
    let witness = oracle.filter(|o| o.exact).map(|o| o.witness);
    let findings = match verify_artifacts(&art, witness.as_ref()) {
        Ok((_, outcome)) => outcome.findings,
        Err(e) => vec![Finding::TimelineShape { machine: 0, detail: format!("cannot be extracted: {e}") }],
    };
    let bound = check_bounds(instance, &out.trace, &out.log, opt, exact);
    let pass = findings.is_empty() && bound.satisfied;
    let report = InstanceReport {
        seed: 0,
        n: instance.len(),
        m: instance.machines,
        epsilon: instance.epsilon.clone(),
        delta: out.log.params.delta.clone(),
        profile: String::new(),
        model: model.to_string(),
        bound,
        findings,
        pass,
    };
    Ok(Verified { output: out, report, witness })
}

pub fn verify_case(case: &Case, oracle_cap: Option<usize>) -> Result<InstanceReport, RunError> {
    let instance = case.instance();
    let mut report = verify_instance(&instance, case.algorithm, &case.model, oracle_cap)?.report;
    report.seed = case.seed;
    report.n = case.n;
    report.m = case.m;
    report.profile = case.profile.name().to_string();
    Ok(report)
}

pub const SUMMARY_HEADER: &str = "seed,n,m,epsilon,delta,admitted,finished,opt,ratio,bound,pass,algorithm,model,profile,opt_exact";

pub fn summary_row(r: &InstanceReport) -> String {
    let ratio = r.bound.ratio.as_ref().map(format_rational).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.seed,
        r.n,
        r.m,
        format_rational(&r.epsilon),
        format_rational(&r.delta),
        r.bound.admitted,
        r.bound.finished,
        r.bound.opt,
        ratio,
        format_rational(&r.bound.bound),
        r.pass,
        r.bound.algorithm,
        r.model,
        r.profile,
        r.bound.opt_exact,
    )
}

pub fn summary_csv(reports: &[InstanceReport]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&summary_row(r));
        out.push('\n');
    }
    out
}
