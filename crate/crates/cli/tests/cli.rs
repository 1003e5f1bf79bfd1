use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sched_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sched-sim"))
        .args(args)
        .output()
        .expect("failed to launch sched-sim")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by a signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, seed: u64, eps: &str) -> std::path::PathBuf {
    let file = dir.path().join(format!("inst-{seed}.json"));
    let seed = seed.to_string();
    let out = sched_sim(&[
        "gen", "--n", "8", "--m", "2", "--profile", "nested", "--seed", &seed, "--epsilon", eps, "-o", path(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    file
}

#[test]
fn gen_writes_a_loadable_instance() {
    let dir = TempDir::new().unwrap();
    let file = gen(&dir, 3, "1/2");
    let inst = sched_sim::format::load(&file).unwrap();
    assert_eq!(inst.len(), 8);
    assert_eq!(inst.machines, 2);
    assert!(inst.validate().is_ok());
}

#[test]
fn run_writes_artifacts_and_blocking_finishes_every_admitted_job() {
    let dir = TempDir::new().unwrap();
    let file = gen(&dir, 3, "1/2");
    let out_dir = dir.path().join("run");
    let out = sched_sim(&["run", "--alg", "blocking", "--model", "admission", "-i", path(&file), "-o", path(&out_dir)]);
    assert_eq!(code(&out), 0);
    for name in ["trace.csv", "summary.json", "admission_log.json", "thresholds.json"] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["on_time"], summary["admitted"]);
    assert!(fs::read_to_string(out_dir.join("trace.csv")).unwrap().starts_with("machine,job,start,end\n"));
}

#[test]
fn run_with_a_larger_epsilon_still_finishes_every_admitted_job() {
    let dir = TempDir::new().unwrap();
    let file = gen(&dir, 3, "1/2");
    let out_dir = dir.path().join("run");
    let out = sched_sim(&[
        "run", "--alg", "blocking", "--model", "admission", "--epsilon", "1", "-i", path(&file), "-o", path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["on_time"], summary["admitted"]);
    let strict = sched_sim(&["verify", "--alg", "blocking", "--epsilon", "1", "-i", path(&file)]);
    assert_eq!(code(&strict), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let file = gen(&dir, 1, "1/2");
    let out_dir = dir.path().join("run");
    let region_committed = sched_sim(&["run", "--alg", "region", "--model", "admission", "-i", path(&file), "-o", path(&out_dir)]);
    assert_eq!(code(&region_committed), 2);
    let bad_ratio = sched_sim(&["gen", "--epsilon", "one/half", "-o", path(&file)]);
    assert_eq!(code(&bad_ratio), 2);
    let zero_denominator = sched_sim(&["gen", "--epsilon", "1/0", "-o", path(&file)]);
    assert_eq!(code(&zero_denominator), 2);
    let delta_without_model = sched_sim(&["run", "--alg", "blocking", "--delta", "1/4", "-i", path(&file), "-o", path(&out_dir)]);
    assert_eq!(code(&delta_without_model), 2);
    let missing = sched_sim(&["run", "--alg", "blocking", "-i", path(&dir.path().join("nope.json")), "-o", path(&out_dir)]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn oracle_prints_an_exact_optimum() {
    let dir = TempDir::new().unwrap();
    let file = gen(&dir, 5, "1/2");
    let out = sched_sim(&["oracle", "-i", path(&file)]);
    assert_eq!(code(&out), 0);
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["exact"], true);
    let scheduled: usize = result["witness"].as_object().unwrap().values().map(|v| v.as_array().unwrap().len()).sum();
    assert_eq!(result["opt"].as_u64().unwrap() as usize, scheduled);
}

#[test]
fn verify_accepts_honest_runs_and_rejects_tampered_ones() {
    let dir = TempDir::new().unwrap();
    let file = gen(&dir, 3, "1/2");
    let fresh = sched_sim(&["verify", "--alg", "blocking", "-i", path(&file), "--mutants", "10"]);
    assert_eq!(code(&fresh), 0, "{}", String::from_utf8_lossy(&fresh.stderr));

    let out_dir = dir.path().join("run");
    assert_eq!(code(&sched_sim(&["run", "--alg", "blocking", "-i", path(&file), "-o", path(&out_dir)])), 0);
    let stored = sched_sim(&["verify", "--alg", "blocking", "-i", path(&file), "--run-dir", path(&out_dir)]);
    assert_eq!(code(&stored), 0, "{}", String::from_utf8_lossy(&stored.stderr));

    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut lines: Vec<&str> = trace.lines().collect();
    assert!(lines.len() > 1);
    lines.pop();
    fs::write(out_dir.join("trace.csv"), lines.join("\n") + "\n").unwrap();
    let tampered = sched_sim(&["verify", "--alg", "blocking", "-i", path(&file), "--run-dir", path(&out_dir)]);
    assert_eq!(code(&tampered), 1);
}

#[test]
fn verify_suite_writes_reports() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("suite");
    let out = sched_sim(&[
        "verify", "--alg", "region", "--epsilon", "1/4", "--count", "10", "--n", "8", "--mutants", "2", "-o", path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,region,")));
}

#[test]
fn bench_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = sched_sim(&[
            "bench", "--alg", "blocking", "--epsilon-grid", "1/2,1", "--per-point", "4", "--n", "7", "-o", path(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    for name in ["runs.csv", "aggregate.csv", "plot.gp"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    assert_eq!(fs::read_to_string(a.join("runs.csv")).unwrap().lines().count(), 9);
}
