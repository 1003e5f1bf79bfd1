mod bench;
mod config;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use sched_sim::export::{log_json, samples_json, summary_json, trace_csv};
use sched_sim::oracle::{solve, DEFAULT_CAP};
use sched_sim::{format, generate, Algorithm, Rational};

use config::{parse_profile, parse_ratio, ModelArg, Override, RunConfig};

/// Online deadline scheduling on unrelated machines: generate instances, run
/// the blocking and region policies, compute offline optima, verify runs and
/// sweep parameters.
#[derive(Parser)]
#[command(name = "sched-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Simulate one policy and write its trace, summary and admission log.
    Run(RunArgs),
    /// Compute the offline non-migratory optimum of a small instance.
    Oracle(OracleArgs),
    /// Run every verification check on one instance, a stored run, or a
    /// seeded batch.
    Verify(verify::VerifyArgs),
    /// Sweep epsilon (and delta) over a grid and tabulate OPT/|F|.
    Bench(bench::BenchArgs),
}

#[derive(Args, Clone)]
pub struct GeneratorArgs {
    /// Number of jobs.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Number of machines.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// uniform, bursty, nested or tight-slack.
    #[arg(long, default_value = "uniform", value_parser = parse_profile)]
    profile: sched_sim::Profile,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Slack of the generated instance.
    #[arg(long, value_parser = parse_ratio)]
    epsilon: Rational,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args, Clone)]
pub struct PolicyArgs {
    /// blocking or region.
    #[arg(long = "alg", value_enum)]
    alg: AlgArg,
    /// Commitment model; blocking defaults to admission, region to none.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Commitment slack for `--model delta`.
    #[arg(long, value_parser = parse_ratio)]
    delta: Option<Rational>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AlgArg {
    Blocking,
    Region,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::Blocking => Algorithm::Blocking,
            AlgArg::Region => Algorithm::Region,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    /// Run the policy with this slack instead of the instance's own; jobs
    /// lacking it are never admitted.
    #[arg(long, value_parser = parse_ratio)]
    epsilon: Option<Rational>,
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output directory.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Largest job count solved exactly; above it the volume bound is
    /// reported with `exact: false`.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Write the result here instead of stdout.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

/// Errors map to exit code 2 (bad input) or 1 (a run or check failed).
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Failed(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Usage(e.into())
    }
}

pub type CliResult = Result<(), CliError>;

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> CliResult {
    let g = &args.generator;
    if g.m == 0 {
        return Err(CliError::Usage(anyhow::anyhow!("--m must be at least 1")));
    }
    config::check_epsilon(&args.epsilon)?;
    let inst = generate(g.seed, g.n, g.m, &args.epsilon, g.profile);
    format::save(&inst, &args.output)?;
    println!("wrote {} jobs on {} machines to {}", inst.len(), inst.machines, args.output.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> CliResult {
    let inst = format::load(&args.input)?;
    let cfg = RunConfig::new(&args.policy, &inst, args.epsilon.as_ref(), Override::Lenient)?;
    let out = sched_sim::run(&cfg.instance, cfg.algorithm, &cfg.model)
        .map_err(|e| CliError::Failed(e.into()))?;
    let dir = &args.output;
    write_file(&dir.join("trace.csv"), &trace_csv(&out.trace))?;
    write_file(&dir.join("summary.json"), &summary_json(&cfg.instance, &out.trace))?;
    write_file(&dir.join("admission_log.json"), &log_json(&out.log))?;
    write_file(&dir.join("thresholds.json"), &samples_json(&out.samples))?;
    println!(
        "{} under {}: admitted {}, on time {}; artifacts in {}",
        cfg.algorithm,
        cfg.model,
        out.trace.admissions.len(),
        out.trace.on_time_count(&cfg.instance),
        dir.display()
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    let inst = format::load(&args.input)?;
    let result = solve(&inst, args.cap);
    let mut text = serde_json::to_string_pretty(&result)?;
    text.push('\n');
    match &args.output {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => verify::cmd_verify(a),
        Command::Bench(a) => bench::cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(e)) => {
            eprintln!("failed: {e:#}");
            ExitCode::from(1)
        }
    }
}
