use std::path::Path;
use std::process::{Command, Output};

use xvlab::harness::ingest_pool;
use xvlab::harness::pool_io::parse_pool;
use xvlab::ExperimentConfig;

const SMALL: &str = "\
# small world so each invocation takes well under a second
dim = 32
pool_speakers = 120
candidates = 8
trials = 16
calibration_trials = 16
policy = nearest:50:25
";

fn xvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xvlab")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = xvlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.conf");
    std::fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn run_writes_reports_that_match_stdout() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = small_config(tmp.path());
    let out = tmp.path().join("run");
    let stdout = ok(&["run", "--config", &conf, "--seed", "3", "--out", out.to_str().unwrap()]);

    let trials = read(&out, "trials.csv");
    let rows: Vec<Vec<&str>> = trials.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16);
    let correct = rows.iter().filter(|r| r[1] == r[2]).count();
    let accuracy = correct as f64 / rows.len() as f64;

    let summary = read(&out, "summary.csv");
    let header: Vec<&str> = summary.lines().next().unwrap().split(',').collect();
    let values: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| values[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("accuracy").parse::<f64>().unwrap(), accuracy);
    assert_eq!(col("trials"), "16");
    assert_eq!(col("seed"), "3");
    assert!(stdout.contains(&format!("accuracy={accuracy:.4}")), "{stdout}");

    // the echo parses back to the config that produced the run
    let echo = ExperimentConfig::parse(&read(&out, "config.echo"), Path::new("config.echo")).unwrap();
    assert_eq!(echo.seed, 3);
    assert_eq!(echo.trials, 16);
    assert_eq!(echo.sim.n_candidates, 8);
    assert_eq!(echo.policy.strategy.to_string(), "nearest:50:25");
}

#[test]
fn overrides_beat_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = small_config(tmp.path());
    let out = tmp.path().join("o");
    ok(&[
        "run",
        "--config",
        &conf,
        "--out",
        out.to_str().unwrap(),
        "--policy",
        "random-single",
        "--knowledge",
        "different",
        "--trials",
        "5",
        "--set",
        "lambda_leak=0",
    ]);
    let echo = ExperimentConfig::parse(&read(&out, "config.echo"), Path::new("e")).unwrap();
    assert_eq!(echo.policy.strategy.to_string(), "random-single");
    assert_eq!(echo.knowledge.to_string(), "different");
    assert_eq!(echo.trials, 5);
    assert_eq!(echo.sim.lambda_leak, 0.0);
    assert_eq!(read(&out, "trials.csv").lines().count(), 6);
}

#[test]
fn roc_curve_file_is_monotone_from_origin_to_corner() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = small_config(tmp.path());
    let out = tmp.path().join("roc");
    ok(&["roc", "--config", &conf, "--out", out.to_str().unwrap()]);
    let points: Vec<(f64, f64)> = read(&out, "roc.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let (f, t) = l.split_once(',').unwrap();
            (f.parse().unwrap(), t.parse().unwrap())
        })
        .collect();
    assert_eq!(points.first(), Some(&(0.0, 0.0)));
    assert_eq!(points.last(), Some(&(1.0, 1.0)));
    assert!(points.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));

    let trials = read(&out, "trials.csv");
    assert!(trials.lines().skip(1).all(|l| l.ends_with(",true") || l.ends_with(",false")));
    let summary = read(&out, "summary.csv");
    assert!(summary.lines().nth(1).unwrap().starts_with("nearest:50:25,same,true,"));
}

#[test]
fn sweep_rows_follow_requested_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = small_config(tmp.path());
    let out = tmp.path().join("sweep");
    ok(&["sweep", "--config", &conf, "--out", out.to_str().unwrap(), "--sizes", "1,4,8"]);
    let sweep = read(&out, "sweep.csv");
    let rows: Vec<Vec<&str>> = sweep.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["1", "4", "8"]);
    assert_eq!(rows[0][1], "1");
    assert!(rows.iter().all(|r| r[2] == "16"));

    let bad = xvlab(&["sweep", "--config", &conf, "--out", out.to_str().unwrap(), "--sizes", "9"]);
    assert!(!bad.status.success());
}

#[test]
fn gen_world_pool_passes_ingest_check() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = small_config(tmp.path());
    let world = tmp.path().join("world");
    ok(&["gen-world", "--config", &conf, "--seed", "4", "--out", world.to_str().unwrap()]);

    let pool = ingest_pool(&world.join("pool.csv")).unwrap();
    assert_eq!(pool.len(), 120 * 4);
    assert_eq!(pool.dim(), 32);
    let candidates = parse_pool(&read(&world, "candidates.csv"), Path::new("c")).unwrap();
    assert_eq!(candidates.len(), 8 * 4);

    let check = tmp.path().join("check");
    let stdout = ok(&["ingest-check", world.join("pool.csv").to_str().unwrap(), "--out", check.to_str().unwrap()]);
    assert!(stdout.contains("480 entries, dim 32, 120 speakers (240 M / 240 F)"), "{stdout}");
    assert_eq!(read(&check, "ingest.csv"), "entries,dim,speakers,male,female\n480,32,120,240,240\n");
}

#[test]
fn ingest_check_reports_malformed_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "dim=2\na,M,u,1,2\nb,Q,u,1,2\n").unwrap();
    let out = xvlab(&["ingest-check", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv:3"), "{err}");
    assert!(err.contains("gender"), "{err}");
}

#[test]
fn bad_config_is_rejected_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("bad.conf");
    std::fs::write(&conf, "trials = 3\nsigma_utt = lots\n").unwrap();
    let out = xvlab(&["run", "--config", conf.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.conf:2"), "{err}");
}

#[test]
fn single_trial_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = small_config(tmp.path());
    let out = tmp.path().join("a");
    let files = ["summary.csv", "trials.csv", "roc.csv", "config.echo"];
    let snapshot = || -> Vec<Vec<u8>> {
        ok(&["run", "--config", &conf, "--trials", "1", "--seed", "77", "--out", out.to_str().unwrap()]);
        files.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect()
    };
    let (first, second) = (snapshot(), snapshot());
    assert_eq!(first, second);

    let other = tmp.path().join("c");
    ok(&["run", "--config", &conf, "--trials", "1", "--seed", "78", "--out", other.to_str().unwrap()]);
    assert_ne!(read(&out, "trials.csv"), read(&other, "trials.csv"));
}
