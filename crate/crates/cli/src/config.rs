use std::collections::BTreeSet;

use anyhow::{anyhow, bail};
use num_traits::Signed;

use sched_sim::blocking::derive_params;
use sched_sim::time::parse_rational;
use sched_sim::instance::Violation;
use sched_sim::{Algorithm, CommitmentModel, Instance, Profile, Rational};

use crate::{CliError, PolicyArgs};

pub fn parse_ratio(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

pub fn parse_profile(text: &str) -> Result<Profile, String> {
    text.parse::<Profile>().map_err(|e| e.to_string())
}

pub fn check_epsilon(eps: &Rational) -> anyhow::Result<()> {
    if !eps.is_positive() {
        bail!("epsilon must be positive");
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelArg {
    None,
    Admission,
    Delta,
}

/// Resolves the commitment model for `alg`. Region runs without commitment;
/// `delta` is accepted only together with `--model delta`.
pub fn resolve_model(
    alg: Algorithm,
    model: Option<ModelArg>,
    delta: Option<&Rational>,
) -> anyhow::Result<CommitmentModel> {
    let model = model.unwrap_or(match alg {
        Algorithm::Blocking => ModelArg::Admission,
        Algorithm::Region => ModelArg::None,
    });
    let resolved = match (model, delta) {
        (ModelArg::Delta, Some(d)) => CommitmentModel::Delta(d.clone()),
        (ModelArg::Delta, None) => bail!("--model delta needs --delta"),
        (_, Some(_)) => bail!("--delta is only meaningful with --model delta"),
        (ModelArg::None, None) => CommitmentModel::None,
        (ModelArg::Admission, None) => CommitmentModel::UponAdmission,
    };
    if alg == Algorithm::Region && resolved != CommitmentModel::None {
        bail!("the region algorithm runs without commitment; use --model none");
    }
    Ok(resolved)
}

/// Checks that `model` is compatible with slack `eps` for `alg`.
pub fn check_params(alg: Algorithm, eps: &Rational, model: &CommitmentModel) -> anyhow::Result<()> {
    check_epsilon(eps)?;
    if alg == Algorithm::Blocking {
        derive_params(eps, model).map_err(|e| anyhow!(e))?;
    }
    Ok(())
}

pub struct RunConfig {
    pub algorithm: Algorithm,
    pub model: CommitmentModel,
    pub instance: Instance,
}

/// How an `--epsilon` override treats jobs that lack the new slack.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Override {
    /// Reject the instance: the competitive bounds assume every job has it.
    Strict,
    /// Run anyway; such jobs are never available to the policy.
    Lenient,
}

impl RunConfig {
    pub fn new(
        policy: &PolicyArgs,
        instance: &Instance,
        epsilon: Option<&Rational>,
        mode: Override,
    ) -> Result<Self, CliError> {
        let algorithm: Algorithm = policy.alg.into();
        let model = resolve_model(algorithm, policy.model, policy.delta.as_ref())?;
        let instance = match epsilon {
            Some(eps) => {
                check_epsilon(eps)?;
                let inst = instance.with_epsilon(eps.clone());
                let report = inst.validate();
                let short: BTreeSet<usize> = report
                    .violations
                    .iter()
                    .filter_map(|v| match v {
                        Violation::Slack { job, .. } => Some(*job),
                        _ => None,
                    })
                    .collect();
                let structural = report.violations.iter().any(|v| !matches!(v, Violation::Slack { .. }));
                if structural || (mode == Override::Strict && !report.is_ok()) {
                    return Err(CliError::Usage(anyhow!("instance does not have slack {eps}: {report}")));
                }
                if !short.is_empty() {
                    eprintln!("note: {} of {} jobs lack slack {eps} on some machine and are never available there", short.len(), inst.len());
                }
                inst
            }
            None => instance.clone(),
        };
        check_params(algorithm, &instance.epsilon, &model)?;
        Ok(RunConfig { algorithm, model, instance })
    }
}
