//! Experiment configuration: a single TOML file describing the experiment
//! kind, the data-generating process, estimator settings, and output
//! location. Command-line flags override the top-level scalars.

use std::path::{Path, PathBuf};

use lsdml::{
    BasisKind, BasisSpec, DgpSpec, Domain, EstimatorConfig, LambdaRule, RealizedDgp, VarianceMode,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// Solve the population problem and report every oracle quantity.
    #[serde(rename = "oracle")]
    OracleInspect,
    /// Check the exact bias decomposition under random nuisance tuples.
    #[serde(rename = "bias-identity")]
    BiasIdentity,
    /// Log-log error slopes of the ridge path against the source exponent.
    #[serde(rename = "tikhonov-rates")]
    TikhonovRates,
    /// Median learner errors across a grid of sample sizes.
    #[serde(rename = "learner-rates")]
    LearnerRates,
    /// Monte Carlo confidence-interval coverage.
    #[serde(rename = "coverage")]
    Coverage,
    /// One dataset, one debiased estimate.
    #[serde(rename = "estimate")]
    SingleEstimate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::OracleInspect => "oracle",
            ExperimentKind::BiasIdentity => "bias-identity",
            ExperimentKind::TikhonovRates => "tikhonov-rates",
            ExperimentKind::LearnerRates => "learner-rates",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::SingleEstimate => "estimate",
        }
    }

    /// Experiments that draw samples need a nonempty `n_grid`.
    pub fn needs_samples(self) -> bool {
        matches!(
            self,
            ExperimentKind::LearnerRates
                | ExperimentKind::Coverage
                | ExperimentKind::SingleEstimate
        )
    }
}

/// Estimator settings as they appear in the config file. Basis overrides
/// are optional: by default the estimator runs on the saturated indicator
/// bases of the process, which is also what the population theory assumes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSettings {
    pub lambdas: LambdaRule,
    pub cross_fit: bool,
    pub variance_mode: VarianceMode,
    pub level: f64,
    pub seed: u64,
    pub hspace: Option<BasisSpec>,
    pub gspace: Option<BasisSpec>,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            lambdas: LambdaRule::Adaptive { beta: 1.0 },
            cross_fit: true,
            variance_mode: VarianceMode::PooledScores,
            level: 0.95,
            seed: 0,
            hspace: None,
            gspace: None,
        }
    }
}

fn is_saturated_indicator(space: &BasisSpec, domain: Domain, atoms: &[f64]) -> bool {
    space.domain == domain
        && matches!(&space.kind, BasisKind::Indicator { points } if points == atoms)
}

impl EstimatorSettings {
    /// Assemble the runtime estimator configuration for a realized process,
    /// applying any basis overrides (with a warning when an override loses
    /// saturation, since the population targets are defined on the
    /// saturated spaces).
    pub fn materialize(&self, dgp: &RealizedDgp) -> EstimatorConfig {
        let hspace = self.hspace.clone().unwrap_or_else(|| dgp.hspace.clone());
        let gspace = self.gspace.clone().unwrap_or_else(|| dgp.gspace.clone());
        if !is_saturated_indicator(&hspace, Domain::X, dgp.pmf.x_support()) {
            eprintln!(
                "warning: hypothesis basis override is not the saturated indicator \
                 basis of the process; estimates target the best approximation in \
                 the override space"
            );
        }
        if !is_saturated_indicator(&gspace, Domain::Z, dgp.pmf.z_support()) {
            eprintln!(
                "warning: instrument basis override is not the saturated indicator \
                 basis of the process; estimates target the best approximation in \
                 the override space"
            );
        }
        let mut config = EstimatorConfig::new(hspace, gspace, dgp.functionals.clone());
        config.lambdas = self.lambdas;
        config.cross_fit = self.cross_fit;
        config.variance_mode = self.variance_mode;
        config.level = self.level;
        config.seed = self.seed;
        config
    }
}

fn default_reps() -> usize {
    100
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dgp: DgpSpec,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    /// Replications (Monte Carlo draws or perturbation draws).
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Sample sizes for the sampling experiments.
    #[serde(default)]
    pub n_grid: Vec<usize>,
    /// Penalty grid for the ridge-path experiment.
    #[serde(default)]
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse a TOML config file.
    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.reps == 0 {
            return Err(CliError::Config("reps must be at least 1".into()));
        }
        if self.experiment.needs_samples() && self.n_grid.is_empty() {
            return Err(CliError::Config(format!(
                "experiment '{}' draws samples and needs a nonempty n_grid",
                self.experiment.name()
            )));
        }
        if self.n_grid.contains(&0) {
            return Err(CliError::Config("n_grid entries must be positive".into()));
        }
        for &l in &self.lambda_grid {
            if !(l.is_finite() && l > 0.0) {
                return Err(CliError::Config(format!(
                    "lambda_grid entries must be positive and finite, got {l}"
                )));
            }
        }
        if !(self.estimator.level > 0.0 && self.estimator.level < 1.0) {
            return Err(CliError::Config(format!(
                "confidence level must lie in (0, 1), got {}",
                self.estimator.level
            )));
        }
        Ok(())
    }
}
