use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;

use sched_sim::oracle::{solve, Witness, DEFAULT_CAP, MAX_MACHINES};
use sched_sim::trace::{Admission, Segment, ThresholdSample};
use sched_sim::verify::suite::{summary_csv, verify_instance, InstanceReport};
use sched_sim::verify::{check_bounds, extract, mutant_caught, mutate, verify_artifacts, Artifacts, Mutation};
use sched_sim::{format, generate, AdmissionLog, Algorithm, CommitmentModel, Instance, Rational, RunOutput, ScheduleTrace};

use crate::config::{check_params, parse_ratio, resolve_model, Override, RunConfig};
use crate::{write_file, CliError, CliResult, GeneratorArgs, PolicyArgs};

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    /// Verify this instance (runs the policy unless --run-dir is given).
    #[arg(short = 'i', long = "input")]
    input: Option<PathBuf>,
    /// Verify the artifacts `run` wrote to this directory instead of
    /// re-running; needs --input.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Without --input: verify this many generated instances with seeds
    /// seed, seed+1, ...
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Slack for generated instances, or override for --input.
    #[arg(long, value_parser = parse_ratio)]
    epsilon: Option<Rational>,
    /// Largest job count for the exact oracle.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Skip the offline optimum (and with it the volume lemma).
    #[arg(long)]
    no_oracle: bool,
    /// Fault-injection mutants per run; any that passes every check fails
    /// verification.
    #[arg(long, default_value_t = 0)]
    mutants: usize,
    /// Directory for report.json / summary.csv.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

const DUMP_LIMIT: usize = 20;

fn oracle_cap(args: &VerifyArgs) -> Option<usize> {
    (!args.no_oracle).then_some(args.cap)
}

/// Mutations that no check rejects.
fn escaped_mutants(
    instance: &Instance,
    model: &CommitmentModel,
    out: &RunOutput,
    witness: Option<&Witness>,
    seed: u64,
    count: usize,
) -> anyhow::Result<Vec<Mutation>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let art = Artifacts { instance, model, trace: &out.trace, log: &out.log, samples: &out.samples };
    let timeline = extract(instance, &out.trace, &out.log, out.log.algorithm)?;
    Ok(mutate::sample(&out.log, &timeline, seed, count)
        .into_iter()
        .filter(|m| !mutant_caught(&art, &timeline, m, witness))
        .collect())
}

fn exact_witness(instance: &Instance, cap: Option<usize>) -> Option<Witness> {
    let cap = cap?;
    (instance.machines <= MAX_MACHINES && instance.len() <= cap)
        .then(|| solve(instance, cap))
        .filter(|r| r.exact)
        .map(|r| r.witness)
}

fn report_line(label: &str, r: &InstanceReport) -> String {
    let b = &r.bound;
    let ratio = b.ratio.as_ref().map(sched_sim::time::format_rational).unwrap_or_else(|| "-".into());
    format!(
        "{} {label}: admitted {}, on time {}, OPT {}{}, OPT/|F| {ratio}, bound {}, {} findings",
        if r.pass { "ok  " } else { "FAIL" },
        b.admitted,
        b.finished,
        b.opt,
        if b.opt_exact { "" } else { " (upper bound)" },
        sched_sim::time::format_rational(&b.bound),
        r.findings.len()
    )
}

fn dump(label: &str, r: &InstanceReport, escaped: &[Mutation]) {
    for f in r.findings.iter().take(DUMP_LIMIT) {
        eprintln!("  {label}: {f}");
    }
    if r.findings.len() > DUMP_LIMIT {
        eprintln!("  {label}: ... {} more", r.findings.len() - DUMP_LIMIT);
    }
    for m in escaped {
        eprintln!("  {label}: mutant escaped every check: {m:?}");
    }
}

fn read_trace(dir: &Path, log: &AdmissionLog, machines: usize, completions: BTreeMap<usize, sched_sim::Time>) -> anyhow::Result<ScheduleTrace> {
    let path = dir.join("trace.csv");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next() != Some(sched_sim::export::TRACE_HEADER) {
        bail!("{} does not start with `{}`", path.display(), sched_sim::export::TRACE_HEADER);
    }
    let mut segments = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let [machine, job, start, end] = fields[..] else {
            bail!("{}:{}: expected 4 fields", path.display(), k + 2);
        };
        let parse = |s: &str| s.parse::<sched_sim::Time>().map_err(|e| anyhow!("{}:{}: {e}", path.display(), k + 2));
        segments.push(Segment {
            machine: machine.parse()?,
            job: job.parse()?,
            start: parse(start)?,
            end: parse(end)?,
        });
    }
    let admissions = log
        .records
        .iter()
        .map(|r| (r.job, Admission { machine: r.machine, at: r.admitted_at.clone() }))
        .collect();
    Ok(ScheduleTrace { machines, segments, completions, admissions })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verify_run_dir(args: &VerifyArgs, input: &Path, dir: &Path) -> CliResult {
    let cfg = RunConfig::new(&args.policy, &format::load(input)?, args.epsilon.as_ref(), Override::Strict)?;
    let instance = &cfg.instance;
    let log: AdmissionLog = read_json(&dir.join("admission_log.json"))?;
    let samples: Vec<ThresholdSample> = read_json(&dir.join("thresholds.json"))?;
    let summary: sched_sim::export::Summary = read_json(&dir.join("summary.json"))?;
    let trace = read_trace(dir, &log, instance.machines, summary.completions)?;
    if cfg.algorithm != log.algorithm {
        return Err(CliError::Usage(anyhow!("--alg {} but the stored log is from {}", cfg.algorithm, log.algorithm)));
    }
    let witness = exact_witness(instance, oracle_cap(args));
    let art = Artifacts { instance, model: &cfg.model, trace: &trace, log: &log, samples: &samples };
    let (_, outcome) = verify_artifacts(&art, witness.as_ref()).map_err(|e| CliError::Failed(e.into()))?;
    let (opt, exact) = match &witness {
        Some(w) => (w.values().map(|s| s.len()).sum(), true),
        None => (sched_sim::oracle::opt_upper_bound(instance), false),
    };
    let bound = check_bounds(instance, &trace, &log, opt, exact);
    let report = InstanceReport {
        seed: 0,
        n: instance.len(),
        m: instance.machines,
        epsilon: instance.epsilon.clone(),
        delta: log.params.delta.clone(),
        profile: String::new(),
        model: cfg.model.to_string(),
        pass: outcome.passed() && bound.satisfied,
        bound,
        findings: outcome.findings,
    };
    finish_single(args, &dir.display().to_string(), report, &[])
}

fn finish_single(args: &VerifyArgs, label: &str, report: InstanceReport, escaped: &[Mutation]) -> CliResult {
    println!("{}", report_line(label, &report));
    if !escaped.is_empty() {
        println!("{} of the injected mutants escaped", escaped.len());
    }
    if let Some(dir) = &args.output {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write_file(&dir.join("report.json"), &text)?;
    }
    if report.pass && escaped.is_empty() {
        Ok(())
    } else {
        dump(label, &report, escaped);
        Err(CliError::Failed(anyhow!("verification failed for {label}")))
    }
}

fn verify_input(args: &VerifyArgs, input: &Path) -> CliResult {
    let instance = format::load(input)?;
    let cfg = RunConfig::new(&args.policy, &instance, args.epsilon.as_ref(), Override::Strict)?;
    let v = verify_instance(&cfg.instance, cfg.algorithm, &cfg.model, oracle_cap(args))
        .map_err(|e| CliError::Failed(e.into()))?;
    let escaped = escaped_mutants(&cfg.instance, &cfg.model, &v.output, v.witness.as_ref(), args.generator.seed, args.mutants)?;
    finish_single(args, &input.display().to_string(), v.report, &escaped)
}

fn verify_suite(args: &VerifyArgs) -> CliResult {
    let eps = args
        .epsilon
        .clone()
        .ok_or_else(|| CliError::Usage(anyhow!("generated suites need --epsilon (or pass --input)")))?;
    let algorithm: Algorithm = args.policy.alg.into();
    let model = resolve_model(algorithm, args.policy.model, args.policy.delta.as_ref())?;
    check_params(algorithm, &eps, &model)?;
    let g = &args.generator;
    if g.m == 0 {
        return Err(CliError::Usage(anyhow!("--m must be at least 1")));
    }
    let mut reports = Vec::new();
    let mut failed = 0;
    let mut escaped_total = 0;
    for seed in g.seed..g.seed + args.count {
        let instance = generate(seed, g.n, g.m, &eps, g.profile);
        let v = verify_instance(&instance, algorithm, &model, oracle_cap(args))
            .map_err(|e| CliError::Failed(anyhow!("seed {seed}: {e}")))?;
        let escaped = escaped_mutants(&instance, &model, &v.output, v.witness.as_ref(), seed, args.mutants)?;
        let mut report = v.report;
        report.seed = seed;
        report.profile = g.profile.name().to_string();
        escaped_total += escaped.len();
        let label = format!("seed {seed}");
        if !report.pass || !escaped.is_empty() {
            failed += 1;
            println!("{}", report_line(&label, &report));
            dump(&label, &report, &escaped);
        }
        reports.push(report);
    }
    let worst = reports.iter().filter_map(|r| r.bound.ratio.clone()).max();
    println!(
        "{} instances, {failed} failed, {escaped_total} escaped mutants; worst OPT/|F| {}",
        reports.len(),
        worst.as_ref().map(sched_sim::time::format_rational).unwrap_or_else(|| "-".into())
    );
    if let Some(dir) = &args.output {
        write_file(&dir.join("summary.csv"), &summary_csv(&reports))?;
        let mut text = serde_json::to_string_pretty(&reports)?;
        text.push('\n');
        write_file(&dir.join("reports.json"), &text)?;
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(anyhow!("{failed} of {} instances failed verification", reports.len())))
    }
}

pub fn cmd_verify(args: VerifyArgs) -> CliResult {
    match (&args.input, &args.run_dir) {
        (Some(input), Some(dir)) => verify_run_dir(&args, input, dir),
        (None, Some(_)) => Err(CliError::Usage(anyhow!("--run-dir needs --input with the instance"))),
        (Some(input), None) => verify_input(&args, input),
        (None, None) => verify_suite(&args),
    }
}
