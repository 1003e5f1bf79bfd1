//! Parameter sweeps: every (ε, δ) grid point runs the same seeds, and each
//! run is compared with the offline optimum.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use rayon::prelude::*;

use sched_sim::oracle::{solve, DEFAULT_CAP};
use sched_sim::time::format_rational;
use sched_sim::verify::bounds::bound_factor;
use sched_sim::{generate, Algorithm, CommitmentModel, Profile, Rational, Time};

use crate::config::{check_params, parse_profile, parse_ratio, resolve_model, ModelArg};
use crate::{write_file, AlgArg, CliError, CliResult};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long = "alg", value_enum)]
    alg: AlgArg,
    /// Commitment model; blocking defaults to admission, region to none.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Comma-separated slack values, e.g. 1/8,1/4,1/2,1.
    #[arg(long, value_parser = parse_ratio, value_delimiter = ',', default_value = "1/8,1/4,1/2,1")]
    epsilon_grid: Vec<Rational>,
    /// With --model delta: comma-separated fractions f, run at δ = f·ε.
    #[arg(long, value_parser = parse_ratio, value_delimiter = ',', default_value = "1/2")]
    delta_fracs: Vec<Rational>,
    /// Instances per grid point (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 20)]
    per_point: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// A generator profile, or `mixed` to cycle through all of them by seed.
    #[arg(long, default_value = "mixed")]
    profile: String,
    /// Largest job count solved exactly by the oracle.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Output directory.
    #[arg(short = 'o', long = "output", default_value = "bench-out")]
    output: PathBuf,
}

struct Point {
    epsilon: Rational,
    model: CommitmentModel,
}

struct Row {
    point: usize,
    seed: u64,
    profile: Profile,
    delta: Rational,
    admitted: usize,
    finished: usize,
    opt: usize,
    opt_exact: bool,
    factor: Rational,
}

impl Row {
    fn ratio_f(&self) -> Option<f64> {
        (self.finished > 0).then(|| self.opt as f64 / self.finished as f64)
    }

    fn ratio_j(&self) -> Option<f64> {
        (self.admitted > 0).then(|| self.opt as f64 / self.admitted as f64)
    }

    /// `OPT ≤ factor·|J|`, decided exactly.
    fn bound_ok(&self) -> bool {
        Rational::from_integer(self.opt.into()) <= &self.factor * Rational::from_integer(self.admitted.into())
    }
}

fn decimal(r: &Rational) -> String {
    format!("{:.6}", Time::from_rational(r.clone()).to_f64())
}

/// The δ of a delta-commitment model; blank for the others.
fn commit_delta(model: &CommitmentModel) -> String {
    match model {
        CommitmentModel::Delta(d) => format_rational(d),
        _ => String::new(),
    }
}

fn opt_decimal(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn thread_count() -> anyhow::Result<Option<usize>> {
    match std::env::var("SCHED_SIM_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| anyhow!("SCHED_SIM_THREADS must be a positive integer"))?;
            if n == 0 {
                return Err(anyhow!("SCHED_SIM_THREADS must be a positive integer"));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

const LONG_HEADER: &str =
    "alg,model,commit_delta,epsilon,epsilon_value,delta,delta_value,profile,seed,n,m,admitted,finished,opt,opt_exact,ratio_f,ratio_j,factor,bound_ok";

fn long_csv(args: &BenchArgs, algorithm: Algorithm, points: &[Point], rows: &[Row]) -> String {
    let mut out = String::from(LONG_HEADER);
    out.push('\n');
    for r in rows {
        let p = &points[r.point];
        let _ = writeln!(
            out,
            "{algorithm},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.model.name(),
            commit_delta(&p.model),
            format_rational(&p.epsilon),
            decimal(&p.epsilon),
            format_rational(&r.delta),
            decimal(&r.delta),
            r.profile.name(),
            r.seed,
            args.n,
            args.m,
            r.admitted,
            r.finished,
            r.opt,
            r.opt_exact,
            opt_decimal(r.ratio_f()),
            opt_decimal(r.ratio_j()),
            format_rational(&r.factor),
            r.bound_ok(),
        );
    }
    out
}

const AGGREGATE_HEADER: &str =
    "alg,model,commit_delta,epsilon,epsilon_value,delta,delta_value,runs,runs_with_ratio,mean_ratio_f,max_ratio_f,max_ratio_j,factor,bound_violations";

fn aggregate_csv(algorithm: Algorithm, points: &[Point], rows: &[Row]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for (k, p) in points.iter().enumerate() {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.point == k).collect();
        let Some(first) = mine.first() else { continue };
        let ratios: Vec<f64> = mine.iter().filter_map(|r| r.ratio_f()).collect();
        let mean = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
        let max = ratios.iter().copied().reduce(f64::max);
        let max_j = mine.iter().filter_map(|r| r.ratio_j()).reduce(f64::max);
        let violations = mine.iter().filter(|r| r.opt_exact && !r.bound_ok()).count();
        let _ = writeln!(
            out,
            "{algorithm},{},{},{},{},{},{},{},{},{},{},{},{},{violations}",
            p.model.name(),
            commit_delta(&p.model),
            format_rational(&p.epsilon),
            decimal(&p.epsilon),
            format_rational(&first.delta),
            decimal(&first.delta),
            mine.len(),
            ratios.len(),
            opt_decimal(mean),
            opt_decimal(max),
            opt_decimal(max_j),
            format_rational(&first.factor),
        );
    }
    out
}

fn plot_script(algorithm: Algorithm) -> String {
    let ceiling = match algorithm {
        Algorithm::Region => "8/x + 4",
        Algorithm::Blocking => "NaN",
    };
    format!(
        "# gnuplot script: plots the aggregate sweep written next to it.\n\
         set datafile separator ','\n\
         set key top right\n\
         set logscale x 2\n\
         set xlabel 'epsilon'\n\
         set ylabel 'OPT / |F|'\n\
         set title '{algorithm}: empirical ratio against the offline optimum'\n\
         set terminal pngcairo size 900,600\n\
         set output 'bench.png'\n\
         plot 'aggregate.csv' using 5:10 skip 1 with linespoints title 'mean', \\\n\
         \x20    'aggregate.csv' using 5:11 skip 1 with linespoints title 'max', \\\n\
         \x20    'runs.csv' using 5:16 skip 1 with points pointtype 7 pointsize 0.4 title 'runs', \\\n\
         \x20    {ceiling} with lines dashtype 2 title 'guaranteed ceiling on OPT/|J|'\n"
    )
}

pub fn cmd_bench(args: BenchArgs) -> CliResult {
    let algorithm: Algorithm = args.alg.into();
    if args.m == 0 || args.per_point == 0 || args.epsilon_grid.is_empty() {
        return Err(CliError::Usage(anyhow!("--m, --per-point and --epsilon-grid must be non-empty")));
    }
    let profiles: Vec<Profile> = if args.profile == "mixed" {
        Profile::ALL.to_vec()
    } else {
        vec![parse_profile(&args.profile).map_err(|e| CliError::Usage(anyhow!(e)))?]
    };
    let delta_sweep = args.model == Some(ModelArg::Delta);
    if delta_sweep && algorithm == Algorithm::Region {
        return Err(CliError::Usage(anyhow!("the region algorithm runs without commitment; use --model none")));
    }
    let mut points = Vec::new();
    for eps in &args.epsilon_grid {
        let models = if delta_sweep {
            args.delta_fracs.iter().map(|f| CommitmentModel::Delta(eps * f)).collect()
        } else {
            vec![resolve_model(algorithm, args.model, None)?]
        };
        for model in models {
            check_params(algorithm, eps, &model)?;
            points.push(Point { epsilon: eps.clone(), model });
        }
    }
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (args.seed..args.seed + args.per_point).map(move |s| (p, s)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Failed(e.into()))?;
    let rows: Vec<Row> = pool.install(|| {
        jobs.par_iter()
            .map(|&(point, seed)| {
                let p = &points[point];
                let profile = profiles[(seed % profiles.len() as u64) as usize];
                let inst = generate(seed, args.n, args.m, &p.epsilon, profile);
                let out = sched_sim::run(&inst, algorithm, &p.model).map_err(|e| anyhow!("seed {seed}: {e}"))?;
                let oracle = solve(&inst, args.cap);
                Ok(Row {
                    point,
                    seed,
                    profile,
                    delta: out.log.params.delta.clone(),
                    admitted: out.log.records.len(),
                    finished: out.trace.on_time_count(&inst),
                    opt: oracle.opt,
                    opt_exact: oracle.exact,
                    factor: bound_factor(&out.log),
                })
            })
            .collect::<anyhow::Result<Vec<Row>>>()
    })
    .map_err(CliError::Failed)?;

    let dir = &args.output;
    write_file(&dir.join("runs.csv"), &long_csv(&args, algorithm, &points, &rows))?;
    write_file(&dir.join("aggregate.csv"), &aggregate_csv(algorithm, &points, &rows))?;
    write_file(&dir.join("plot.gp"), &plot_script(algorithm))?;
    let violations: Vec<&Row> = rows.iter().filter(|r| r.opt_exact && !r.bound_ok()).collect();
    let inexact = rows.iter().filter(|r| !r.opt_exact).count();
    println!(
        "{} runs over {} grid points, {inexact} with OPT upper bound only, {} bound violations; wrote {}",
        rows.len(),
        points.len(),
        violations.len(),
        dir.display()
    );
    if violations.is_empty() {
        Ok(())
    } else {
        for r in violations.iter().take(20) {
            eprintln!(
                "  seed {} at epsilon {}: OPT {} > {}·{}",
                r.seed,
                format_rational(&points[r.point].epsilon),
                r.opt,
                format_rational(&r.factor),
                r.admitted
            );
        }
        Err(CliError::Failed(anyhow!("{} runs exceed the guaranteed bound", violations.len())))
    }
}
