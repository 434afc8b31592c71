//! Command-line entry point for the experiment harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mscale_lab::harness::{self, Experiment, ExperimentConfig, Overrides, Profile};
use mscale_lab::Error;

#[derive(Parser)]
#[command(name = "mscale-lab", version, about = "Multi-scale network training versus its frequency-domain error model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve an indicator spectrum under the diffusion model for several scale counts.
    Simulate(Common),
    /// Train a network and compare its error with the model prediction.
    TrainCompare(Common),
    /// Model-only comparison of a single-scale and a multi-scale network.
    BiasCompare(Common),
    /// Empirical versus limit kernels, and kernel drift during training.
    NtkStudy(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Ci,
    Paper,
}

#[derive(Args)]
struct Common {
    /// Flat key-value config file overriding the profile preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "ci")]
    profile: ProfileArg,
    /// Highest scale index s (α_j = 2^j, j = 0..=s).
    #[arg(long)]
    scales: Option<usize>,
    /// Hermite basis order.
    #[arg(long)]
    p: Option<usize>,
    /// Time step of the diffusion model.
    #[arg(long)]
    dt: Option<f64>,
}

fn resolve(experiment: Experiment, args: &Common) -> mscale_lab::Result<ExperimentConfig> {
    let profile = match args.profile {
        ProfileArg::Ci => Profile::Ci,
        ProfileArg::Paper => Profile::Paper,
    };
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path, experiment, profile)?,
        None => ExperimentConfig::preset(experiment, profile),
    };
    let overrides = Overrides {
        output_dir: args.out.clone(),
        seed: args.seed,
        scales: args.scales,
        p: args.p,
        dt: args.dt,
    };
    overrides.apply(&mut config)?;
    Ok(config)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Serde(_) => 2,
        Error::Numerical(_) | Error::Quadrature(_) => 3,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::TrainCompare(a) => (Experiment::TrainCompare, a),
        Command::BiasCompare(a) => (Experiment::BiasCompare, a),
        Command::NtkStudy(a) => (Experiment::NtkStudy, a),
    };
    let result = resolve(experiment, args).and_then(|config| harness::run(&config));
    match result {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: wrote {} files and report.json to {}",
                experiment.name(),
                report.files.len(),
                report.config.output_dir
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
