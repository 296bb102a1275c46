//! `crashgan`: simulate crash-frequency data, train the conditional GAN,
//! synthesize augmentation rows, fit NB safety performance functions,
//! screen hotspots by empirical Bayes, and reproduce the full
//! Base-vs-Augmented experiment.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 runtime
//! numerical failure.

mod commands;
mod config;
mod experiment;

use clap::{Args, Parser, Subcommand};
use crashgan_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crashgan", version, about = "Crash data augmentation with a conditional GAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate simulated crash datasets (uniform features, gamma-Poisson counts)
    Simulate(SimulateArgs),
    /// Train the conditional GAN on a dataset CSV
    Train(TrainArgs),
    /// Synthesize rows from a trained model
    Augment(AugmentArgs),
    /// Fit an NB safety performance function
    Fit(FitArgs),
    /// Rank sites by empirical Bayes estimate
    Screen(ScreenArgs),
    /// Run the full Base-vs-Augmented experiment matrix
    Experiment(ExperimentArgs),
    /// Re-aggregate a per-replication CSV into summary and plot files
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// NB dispersion parameter of the generator
    #[arg(long)]
    dispersion: Option<f64>,
    /// Rows per dataset
    #[arg(long)]
    size: Option<usize>,
    /// Number of datasets
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Intercept of the log-linear mean
    #[arg(long)]
    beta0: Option<f64>,
    /// Comma-separated feature coefficients
    #[arg(long)]
    coefficients: Option<String>,
    /// Also write the full experiment suite layout (train + screening +
    /// prediction sets) instead of standalone datasets
    #[arg(long)]
    suite: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Training dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV (default: <out>.losses.csv)
    #[arg(long)]
    loss_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr_g: Option<f64>,
    #[arg(long)]
    lr_d: Option<f64>,
    #[arg(long)]
    decay_g: Option<f64>,
    #[arg(long)]
    decay_d: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated feature names to model in ln space (traffic volumes)
    #[arg(long)]
    log_features: Option<String>,
}

#[derive(Args)]
struct AugmentArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Number of synthetic rows
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Output SPF model file
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated feature names (default: every feature)
    #[arg(long)]
    features: Option<String>,
    /// Comma-separated feature names entering as ln(x)
    #[arg(long)]
    log: Option<String>,
}

#[derive(Args)]
struct ScreenArgs {
    /// Dataset CSV with observed counts
    #[arg(long)]
    data: PathBuf,
    /// SPF model file; fitted on the data itself when omitted
    #[arg(long)]
    model: Option<PathBuf>,
    /// Ranked output CSV
    #[arg(long)]
    out: PathBuf,
    /// Keep only the top K sites
    #[arg(long)]
    top: Option<usize>,
    /// EB weighting strategy: prediction-weighted | observation-weighted
    #[arg(long, default_value = "prediction-weighted")]
    weighting: String,
    #[arg(long)]
    features: Option<String>,
    #[arg(long)]
    log: Option<String>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Built-in plan: `paper-sim` (dispersions 0.5/1.5, sizes 200/500/1000,
    /// 1000 replications of size 100)
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.csv, summary.json, plots.csv, manifest
    #[arg(long)]
    out: PathBuf,
    /// Multiply the replication count (0.1 gives a desk-scale run)
    #[arg(long)]
    scale: Option<f64>,
    /// Run only this dispersion value
    #[arg(long)]
    dispersion: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replications (default: CRASHGAN_WORKERS or 1)
    #[arg(long)]
    workers: Option<usize>,
    /// CGAN training epochs override
    #[arg(long)]
    epochs: Option<usize>,
    /// Print the resolved plan and exit without touching files
    #[arg(long)]
    dry_run: bool,
    /// Continue an interrupted run, keeping completed replications
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Per-replication CSV produced by `experiment`
    #[arg(long)]
    rows: PathBuf,
    /// Output directory for summary.json and plots.csv
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Train(args) => commands::train(args),
        Command::Augment(args) => commands::augment(args),
        Command::Fit(args) => commands::fit(args),
        Command::Screen(args) => commands::screen(args),
        Command::Experiment(args) => experiment::run(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. }
        | Error::Parse { .. }
        | Error::EmptyInput(_)
        | Error::Io(_) => 2,
        Error::DegenerateResponse
        | Error::CollinearFeatures
        | Error::NonConvergence { .. }
        | Error::TrainingDiverged { .. }
        | Error::DegenerateSamples(_) => 3,
    }
}
