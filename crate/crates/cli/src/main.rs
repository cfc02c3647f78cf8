use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lsdml_cli::{presets, CliError, ExperimentConfig, ExperimentKind, RunArtifacts};

/// Batch experiment runner for debiased estimation of bilinear functionals
/// of linear-equation solutions. Each subcommand runs one experiment and
/// writes `results.csv`, `summary.txt`, and a best-effort `plot.svg` into
/// the output directory.
#[derive(Parser)]
#[command(name = "lsdml", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the population problem exactly and report every oracle quantity
    Oracle(CommonArgs),
    /// Check the exact score-bias decomposition under random nuisance tuples
    BiasIdentity(CommonArgs),
    /// Ridge-path error slopes across source exponents, log-log
    TikhonovRates(CommonArgs),
    /// Median learner errors across a grid of sample sizes
    LearnerRates(CommonArgs),
    /// Monte Carlo confidence-interval coverage
    Coverage(CommonArgs),
    /// Draw one dataset and run the debiased estimator once
    Estimate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment description (TOML); defaults to the subcommand's preset
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the master seed
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the replication count
    #[arg(long, value_name = "INT")]
    reps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(artifacts) => {
            print!("{}", artifacts.summary);
            println!("artifacts written to {}", artifacts.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<RunArtifacts, CliError> {
    let (kind, args) = match cli.command {
        Command::Oracle(a) => (ExperimentKind::OracleInspect, a),
        Command::BiasIdentity(a) => (ExperimentKind::BiasIdentity, a),
        Command::TikhonovRates(a) => (ExperimentKind::TikhonovRates, a),
        Command::LearnerRates(a) => (ExperimentKind::LearnerRates, a),
        Command::Coverage(a) => (ExperimentKind::Coverage, a),
        Command::Estimate(a) => (ExperimentKind::SingleEstimate, a),
    };
    let mut config = match &args.config {
        Some(path) => {
            let config = ExperimentConfig::load(path)?;
            if config.experiment != kind {
                return Err(CliError::Config(format!(
                    "config file describes experiment '{}', but the subcommand is '{}'",
                    config.experiment.name(),
                    kind.name()
                )));
            }
            config
        }
        None => presets::default_config(kind),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    lsdml_cli::run(&config)
}
