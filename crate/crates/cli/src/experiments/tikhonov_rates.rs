//! `tikhonov-rates`: sweep the source exponent β over {0.5, 1, 2, 3},
//! solve the ridge path on the penalty grid, and report the log-log slopes
//! of the squared solution errors. The strong-norm slope should match
//! min{β, 2} and the weak-norm slope min{β + 1, 2}.

use lsdml::{realize, tikhonov_path, Construction, TikhonovSide};

use super::{ensure_out_dir, ols_slope, write_results, write_summary};
use crate::{CliError, ExperimentConfig, RunArtifacts};

const BETAS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    if !matches!(config.dgp.construction, Construction::SpectralDesign(_)) {
        return Err(CliError::Config(
            "tikhonov-rates sweeps the source exponent, which only a \
             spectral-design process exposes"
                .into(),
        ));
    }
    if config.lambda_grid.len() < 2 {
        return Err(CliError::Config(
            "tikhonov-rates needs a lambda_grid with at least two penalties".into(),
        ));
    }
    let out_dir = ensure_out_dir(config)?;

    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut summary = format!(
        "process: {} (source exponent swept over {BETAS:?})\n\
         penalties: {} points in [{:e}, {:e}]\n",
        config.dgp.name,
        config.lambda_grid.len(),
        config.lambda_grid.iter().cloned().fold(f64::MAX, f64::min),
        config.lambda_grid.iter().cloned().fold(f64::MIN, f64::max),
    );
    for beta in BETAS {
        let mut spec = config.dgp.clone();
        if let Construction::SpectralDesign(design) = &mut spec.construction {
            design.coef_decay_beta = beta;
        }
        let dgp = realize(&spec)?;
        let (op, sol) = dgp.solve()?;
        let path = tikhonov_path(&op, &sol.r, TikhonovSide::Primal, &config.lambda_grid)?;

        let mut strong_pts = Vec::with_capacity(path.len());
        let mut weak_pts = Vec::with_capacity(path.len());
        for (lambda, h_l) in config.lambda_grid.iter().zip(&path) {
            let diff = h_l.add_scaled(&sol.h_dagger, -1.0)?;
            let strong_sq = op.gram_h().norm(&diff)?.powi(2);
            let weak_sq = op.gram_g().norm(&op.apply(&diff)?)?.powi(2);
            strong_pts.push((*lambda, strong_sq));
            weak_pts.push((*lambda, weak_sq));
            rows.push(vec![
                format!("{beta}"),
                format!("{lambda}"),
                format!("{strong_sq}"),
                format!("{weak_sq}"),
            ]);
        }
        let log_l: Vec<f64> = config.lambda_grid.iter().map(|l| l.ln()).collect();
        let log_strong: Vec<f64> = strong_pts.iter().map(|p| p.1.ln()).collect();
        let log_weak: Vec<f64> = weak_pts.iter().map(|p| p.1.ln()).collect();
        let slope_strong = ols_slope(&log_l, &log_strong);
        let slope_weak = ols_slope(&log_l, &log_weak);
        summary.push_str(&format!(
            "β = {beta}: strong slope {slope_strong:.4} (limit min{{β,2}} = {}), \
             weak slope {slope_weak:.4} (limit min{{β+1,2}} = {})\n",
            beta.min(2.0),
            (beta + 1.0).min(2.0),
        ));
        series.push((format!("β = {beta} strong"), strong_pts));
        series.push((format!("β = {beta} weak"), weak_pts));
    }
    write_results(
        &out_dir,
        &["beta", "lambda", "strong_err_sq", "weak_err_sq"],
        &rows,
    )?;
    write_summary(&out_dir, &summary)?;
    crate::plot::log_log_lines(
        &out_dir.join("plot.svg"),
        "ridge-path error against the penalty",
        "λ",
        "squared error",
        &series,
    );
    Ok(RunArtifacts { out_dir, summary })
}
