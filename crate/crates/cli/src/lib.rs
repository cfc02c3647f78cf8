//! Batch experiment runner for the debiased-functional estimation library:
//! configuration parsing, curated process presets, the experiment
//! implementations behind each subcommand, and SVG plotting.

use std::fmt;
use std::path::PathBuf;

pub mod config;
pub mod experiments;
pub mod plot;
pub mod presets;

pub use config::{EstimatorSettings, ExperimentConfig, ExperimentKind};

/// Errors surfaced to the command line, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or inconsistent configuration (exit 2).
    Config(String),
    /// Numerical infeasibility while solving or simulating (exit 3).
    Numerical(lsdml::Error),
    /// Filesystem failure writing artifacts (exit 4).
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lsdml::Error> for CliError {
    fn from(e: lsdml::Error) -> Self {
        use lsdml::Error::*;
        match &e {
            // mistakes in the experiment description
            DimensionMismatch { .. }
            | DomainMismatch { .. }
            | PointOutsideSupport { .. }
            | InvalidBasis(_)
            | InvalidPmf(_)
            | InvalidLambda { .. }
            | TooFewSamples { .. }
            | InvalidConfig(_) => CliError::Config(e.to_string()),
            // genuine numerical infeasibility
            SingularPopulationGram { .. }
            | SingularSystem { .. }
            | NotPositiveSemidefinite { .. }
            | SpectrumNotRealized { .. }
            | InfeasibleDesign(_)
            | Numerical { .. }
            | FoldFit { .. } => CliError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            other => CliError::Config(format!("csv serialization failed: {other:?}")),
        }
    }
}

/// What an experiment leaves behind.
#[derive(Debug)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    /// Human-readable summary (also written to `summary.txt`).
    pub summary: String,
}

/// Run an experiment described by a validated configuration.
pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::OracleInspect => experiments::oracle::run(config),
        ExperimentKind::BiasIdentity => experiments::bias_identity::run(config),
        ExperimentKind::TikhonovRates => experiments::tikhonov_rates::run(config),
        ExperimentKind::LearnerRates => experiments::learner_rates::run(config),
        ExperimentKind::Coverage => experiments::coverage::run(config),
        ExperimentKind::SingleEstimate => experiments::single_estimate::run(config),
    }
}
