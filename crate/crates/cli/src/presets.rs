//! Curated data-generating processes and the default experiment
//! configuration behind each subcommand when no config file is given.

use std::path::PathBuf;

use lsdml::{Construction, DgpSpec, SpectralDesign};

use crate::config::{EstimatorSettings, ExperimentConfig, ExperimentKind};
use crate::CliError;

/// `count` evenly spaced values from `start` to `end` inclusive.
fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    let step = (end - start) / (count - 1) as f64;
    (0..count).map(|i| start + step * i as f64).collect()
}

/// `count` geometrically spaced values from `start` to `end` inclusive.
pub fn geomspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    let ratio = (end / start).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| start * ratio.powi(i as i32)).collect()
}

/// Exactly solvable process: `X = Z` uniform on {0, 1}, `Y = X` plus
/// noise. The operator is the identity, the equation solves exactly
/// (`h†(x) = x`, `g† = 1`), and the target value is `E[X] = 0.5`.
pub fn identity() -> DgpSpec {
    DgpSpec {
        name: "identity".into(),
        x_support: vec![0.0, 1.0],
        z_support: vec![0.0, 1.0],
        construction: Construction::ExplicitPmf {
            prob: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            y_values: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            y_cond_var: vec![vec![0.25, 0.25], vec![0.25, 0.25]],
        },
        seed_domain: 1,
    }
}

/// Process with no exact solution: the outcome representer carries mass
/// 0.5 outside the operator's range, so only the projected equation is
/// solvable. The instrument support is one atom wider than the hypothesis
/// support, which guarantees the cokernel direction exists exactly.
pub fn no_solution() -> DgpSpec {
    DgpSpec {
        name: "no-solution".into(),
        x_support: vec![0.0, 1.0, 2.0],
        z_support: vec![0.0, 1.0, 2.0, 3.0],
        construction: Construction::SpectralDesign(SpectralDesign {
            singular_values: vec![0.8, 0.5],
            coef_decay_beta: 1.0,
            r_perp_mass: 0.5,
            a_perp_mass: 0.0,
            noise_sd: 0.5,
        }),
        seed_domain: 2,
    }
}

/// Process with exactly failed identification: the target functional's
/// representer carries mass 0.5 inside the operator's kernel, so the
/// minimal-norm solution is only one of many and the weak-norm theory
/// takes over. The hypothesis support is one atom wider than the
/// instrument support so the kernel direction exists exactly.
pub fn weak_identification() -> DgpSpec {
    DgpSpec {
        name: "weak-identification".into(),
        x_support: vec![0.0, 1.0, 2.0, 3.0],
        z_support: vec![0.0, 1.0, 2.0],
        construction: Construction::SpectralDesign(SpectralDesign {
            singular_values: vec![0.8, 0.5],
            coef_decay_beta: 1.0,
            r_perp_mass: 0.0,
            a_perp_mass: 0.5,
            noise_sd: 0.5,
        }),
        seed_domain: 3,
    }
}

/// Wide-spectrum process for regularization-path slope studies: 22
/// nontrivial singular values spanning 0.95 down to 1e-4 on 24×24
/// supports, so the penalty grid `[1e-6, 1e-1]` sits strictly inside the
/// spectrum and log-log error slopes identify the source exponent.
pub fn rates(beta: f64) -> DgpSpec {
    let mut singular_values = linspace(0.95, 0.55, 9);
    singular_values.extend(geomspace(0.3, 1e-4, 13));
    DgpSpec {
        name: format!("rates-beta-{beta}"),
        x_support: (0..24).map(f64::from).collect(),
        z_support: (0..24).map(f64::from).collect(),
        construction: Construction::SpectralDesign(SpectralDesign {
            singular_values,
            coef_decay_beta: beta,
            r_perp_mass: 0.0,
            a_perp_mass: 0.0,
            noise_sd: 0.5,
        }),
        seed_domain: 4,
    }
}

/// Look up a curated process by name.
pub fn by_name(name: &str) -> Result<DgpSpec, CliError> {
    match name {
        "identity" => Ok(identity()),
        "no-solution" => Ok(no_solution()),
        "weak-identification" => Ok(weak_identification()),
        "rates" => Ok(rates(1.0)),
        other => Err(CliError::Config(format!(
            "unknown preset process '{other}'; available: identity, no-solution, \
             weak-identification, rates"
        ))),
    }
}

/// The configuration a subcommand runs with when no `--config` is given.
pub fn default_config(kind: ExperimentKind) -> ExperimentConfig {
    let (dgp, reps, n_grid, lambda_grid) = match kind {
        ExperimentKind::OracleInspect => (identity(), 1, vec![], vec![]),
        ExperimentKind::BiasIdentity => (no_solution(), 100, vec![], vec![]),
        ExperimentKind::TikhonovRates => (rates(1.0), 1, vec![], geomspace(1e-6, 1e-1, 16)),
        ExperimentKind::LearnerRates => {
            (no_solution(), 20, vec![500, 1000, 2000, 4000, 8000], vec![])
        }
        ExperimentKind::Coverage => (no_solution(), 500, vec![2000], vec![]),
        ExperimentKind::SingleEstimate => (identity(), 1, vec![2000], vec![]),
    };
    ExperimentConfig {
        experiment: kind,
        dgp,
        estimator: EstimatorSettings::default(),
        reps,
        n_grid,
        lambda_grid,
        seed: 0,
        out_dir: PathBuf::from(format!("runs/{}", kind.name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_both_endpoints() {
        let lin = linspace(0.95, 0.55, 9);
        assert_eq!(lin.len(), 9);
        assert!((lin[0] - 0.95).abs() < 1e-15 && (lin[8] - 0.55).abs() < 1e-12);
        let geo = geomspace(1e-6, 1e-1, 16);
        assert_eq!(geo.len(), 16);
        assert!((geo[0] - 1e-6).abs() < 1e-18 && (geo[15] - 1e-1).abs() < 1e-12);
    }

    #[test]
    fn every_preset_realizes() {
        for name in ["identity", "no-solution", "weak-identification"] {
            let spec = by_name(name).unwrap();
            let dgp = lsdml::realize(&spec).unwrap();
            assert_eq!(dgp.name, name);
        }
    }

    #[test]
    fn default_configs_validate() {
        use ExperimentKind::*;
        for kind in [
            OracleInspect,
            BiasIdentity,
            TikhonovRates,
            LearnerRates,
            Coverage,
            SingleEstimate,
        ] {
            default_config(kind).validate().unwrap();
        }
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        let err = by_name("does-not-exist").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
