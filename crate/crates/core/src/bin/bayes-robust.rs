use std::path::PathBuf;
use std::process::ExitCode;

use bayes_robust::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use bayes_robust::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bayes-robust", version, about = "Uncertainty sets from credible regions, and the experiments built on them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build coordinate boxes from a returns file or a synthetic sample.
    BuildSet(Common),
    /// Robust portfolio runs with in- and out-of-sample values.
    Portfolio(Common),
    /// Waiting-time bounds for the single-server queue.
    Queue(Common),
    /// Coverage, chance-constraint and convergence frequencies.
    GuaranteeLab(Common),
    /// Box endpoints per regime and sample size.
    Geometry(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; the built-in preset is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(kind: ExperimentKind, opts: Common) -> Result<Vec<PathBuf>, Error> {
    let mut cfg = match &opts.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(kind),
    };
    if cfg.experiment != kind {
        return Err(Error::Config(format!("config is for {}, not {}", cfg.experiment.name(), kind.name())));
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = opts.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(n) = opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    run_experiment(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, opts) = match cli.command {
        Command::BuildSet(o) => (ExperimentKind::BuildSet, o),
        Command::Portfolio(o) => (ExperimentKind::Portfolio, o),
        Command::Queue(o) => (ExperimentKind::Queue, o),
        Command::GuaranteeLab(o) => (ExperimentKind::GuaranteeLab, o),
        Command::Geometry(o) => (ExperimentKind::Geometry, o),
    };
    match run(kind, opts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
