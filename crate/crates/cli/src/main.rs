//! `airgap`: replay-attack simulation and robustness evaluation for audio
//! deepfake detectors.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Merge;
use util::{input_error, FailCtx, Failure};

#[derive(Parser)]
#[command(
    name = "airgap",
    version,
    about = "Replay-attack simulation and robustness evaluation for audio deepfake detectors"
)]
struct Cli {
    /// Directory all relative paths resolve against [default: .].
    #[arg(long, global = true)]
    root: Option<String>,
    /// JSON config file mirroring the flags; command-line values win.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Worker threads for per-file parallelism (also AIRGAP_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a balanced evaluation manifest from audio pools.
    BuildManifest(commands::BuildManifestArgs),
    /// Play manifest clips through setup RIRs, optionally over a noise floor.
    Simulate(commands::SimulateArgs),
    /// Add colored noise to manifest clips at a target SNR.
    MixNoise(commands::MixNoiseArgs),
    /// Join score CSVs to a manifest and report accuracy, EER, per-attack rows.
    Evaluate(commands::EvaluateArgs),
    /// Attach per-setup MOS/PESQ tables to a report and correlate.
    Correlate(commands::CorrelateArgs),
    /// Replay-augment a random share of a manifest for training.
    Augment(commands::AugmentArgs),
    /// Train the spectral-statistics baseline detector.
    TrainBaseline(commands::TrainBaselineArgs),
    /// Score manifest audio with a trained baseline model.
    ScoreBaseline(commands::ScoreBaselineArgs),
}

fn env_workers() -> Result<Option<usize>, Failure> {
    match std::env::var("AIRGAP_WORKERS") {
        Ok(text) => text
            .parse::<usize>()
            .map(Some)
            .map_err(|_| input_error(format!("bad AIRGAP_WORKERS `{text}`"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = config::load(cli.config.as_deref())?;
    let root = PathBuf::from(
        cli.root
            .or(file.root)
            .unwrap_or_else(|| ".".to_owned()),
    );
    if !root.is_dir() {
        return Err(input_error(format!(
            "--root {} is not a directory",
            root.display()
        )));
    }
    if let Some(n) = cli.workers.or(env_workers()?).or(file.workers) {
        if n == 0 {
            return Err(input_error("worker count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .or_internal("configuring the worker pool")?;
    }

    match cli.command {
        Command::BuildManifest(args) => {
            commands::build_manifest::run(args.or(file.build_manifest), &root)
        }
        Command::Simulate(args) => commands::simulate::run(args.or(file.simulate), &root),
        Command::MixNoise(args) => commands::mix_noise::run(args.or(file.mix_noise), &root),
        Command::Evaluate(args) => commands::evaluate::run(args.or(file.evaluate), &root),
        Command::Correlate(args) => commands::correlate::run(args.or(file.correlate), &root),
        Command::Augment(args) => commands::augment::run(args.or(file.augment), &root),
        Command::TrainBaseline(args) => {
            commands::train_baseline::run(args.or(file.train_baseline), &root)
        }
        Command::ScoreBaseline(args) => {
            commands::score_baseline::run(args.or(file.score_baseline), &root)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AIRGAP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code())
        }
    }
}
