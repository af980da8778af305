use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xvlab::harness::export::{ensure_dir, CONFIG_ECHO_FILE};
use xvlab::harness::pool_io::{candidate_pool, format_pool, PoolSummary};
use xvlab::harness::{export_report, export_sweep, ingest_pool, run_experiment, sweep_pool_size, ExperimentConfig};
use xvlab::{generate_world, Error, Result};

#[derive(Parser)]
#[command(name = "xvlab", version, about = "Pseudo x-vector anonymization attack lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world and write its pool and candidate utterances.
    GenWorld(Common),
    /// Run one experiment and export summary, trials, ROC and config echo.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Run the open-world variant.
        #[arg(long)]
        open_world: bool,
    },
    /// Closed-world accuracy as a function of the candidate-set size.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated candidate-set sizes.
        #[arg(long, value_delimiter = ',', default_value = "2,5,10,15,20,25,29")]
        sizes: Vec<usize>,
    },
    /// Open-world run; roc.csv holds the presence-detection curve.
    Roc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Validate a pool file and summarize it.
    IngestCheck {
        pool: PathBuf,
        /// Also write ingest.csv to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set lambda_leak=0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    knowledge: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self, overrides: Option<&Overrides>) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.sets {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            config.set(k.trim(), v.trim())?;
        }
        if let Some(o) = overrides {
            if let Some(p) = &o.policy {
                config.set("policy", p)?;
            }
            if let Some(k) = &o.knowledge {
                config.set("knowledge", k)?;
            }
            if let Some(t) = o.trials {
                config.trials = t;
            }
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        Ok(config)
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io { path, source: e })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenWorld(common) => {
            let config = common.load(None)?;
            let world = generate_world(&config.world_params())?;
            let dir = &config.output_dir;
            ensure_dir(dir)?;
            write(dir, "pool.csv", &format_pool(&world.pool))?;
            write(dir, "candidates.csv", &format_pool(&candidate_pool(&world)?))?;
            write(dir, CONFIG_ECHO_FILE, &config.to_config_text())?;
            eprintln!(
                "wrote {} pool entries and {} candidates to {}",
                world.pool.len(),
                world.candidates.len(),
                dir.display()
            );
        }
        Command::Run { common, overrides, open_world } => {
            let mut config = common.load(Some(&overrides))?;
            config.open_world |= open_world;
            let report = run_experiment(&config)?;
            export_report(&report, &config.output_dir)?;
            print_report(&report);
        }
        Command::Roc { common, overrides } => {
            let mut config = common.load(Some(&overrides))?;
            config.open_world = true;
            let report = run_experiment(&config)?;
            export_report(&report, &config.output_dir)?;
            print_report(&report);
        }
        Command::Sweep { common, overrides, sizes } => {
            let config = common.load(Some(&overrides))?;
            let rows = sweep_pool_size(&config, &sizes)?;
            export_sweep(&rows, &config, &config.output_dir)?;
            for r in &rows {
                println!("|S'|={:>3}  accuracy={:.4}  ({} trials)", r.set_size, r.accuracy, r.trials);
            }
        }
        Command::IngestCheck { pool, out } => {
            let summary = PoolSummary::of(&ingest_pool(&pool)?);
            println!(
                "{}: {} entries, dim {}, {} speakers ({} M / {} F)",
                pool.display(),
                summary.entries,
                summary.dim,
                summary.speakers,
                summary.male,
                summary.female
            );
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write(&dir, "ingest.csv", &summary.to_csv())?;
            }
        }
    }
    Ok(())
}

fn print_report(report: &xvlab::ExperimentReport) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    println!(
        "policy={} knowledge={} trials={} accuracy={} naive={} auc={} eer={} ({:.2?})",
        report.config.policy.strategy,
        report.config.knowledge,
        report.records.len(),
        fmt(report.accuracy),
        fmt(report.naive_accuracy),
        fmt(report.auc),
        fmt(report.eer.map(|e| e.eer)),
        report.duration
    );
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
