//! `learner-rates`: draw datasets across a grid of sample sizes and track
//! the squared errors of the sample learners against their population
//! targets — the minimax solution ĥ in the weak (instrument-side) norm,
//! the least-squares projection ξ̂, and the representer regression r̂.
//! Medians across replications should fall as n grows.

use lsdml::{minimax_primary, projection_ls, realize, riesz_regression, sample, RieszKind};
use rayon::prelude::*;

use super::{derive_seed, ensure_out_dir, median, ols_slope, write_results, write_summary};
use crate::{CliError, ExperimentConfig, RunArtifacts};

pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    let out_dir = ensure_out_dir(config)?;
    let dgp = realize(&config.dgp)?;
    let (op, sol) = dgp.solve()?;

    let tasks: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.reps).map(move |rep| (n, rep)))
        .collect();
    let errors: Vec<(f64, f64, f64)> = tasks
        .par_iter()
        .map(|&(n, rep)| -> lsdml::Result<(f64, f64, f64)> {
            let seed = derive_seed(config.seed, n as u64, rep as u64);
            let data = sample(&dgp.pmf, n, seed)?;
            let (lambda_h, _, _, _) = config.estimator.lambdas.resolve(n, n);

            let h_hat =
                minimax_primary(&data, &dgp.hspace, &dgp.gspace, &dgp.functionals, lambda_h)?.coef;
            let h_diff = h_hat.add_scaled(&sol.h_dagger, -1.0)?;
            let h_weak_sq = op.gram_g().norm(&op.apply(&h_diff)?)?.powi(2);

            let xi_hat = projection_ls(&data, &sol.h_dagger, &dgp.gspace)?;
            let xi_sq = op
                .gram_g()
                .norm(&xi_hat.add_scaled(&sol.xi_h, -1.0)?)?
                .powi(2);

            let r_hat = riesz_regression(&data, &dgp.gspace, &dgp.functionals, RieszKind::RHat)?;
            let r_sq = op.gram_g().norm(&r_hat.add_scaled(&sol.r, -1.0)?)?.powi(2);
            Ok((h_weak_sq, xi_sq, r_sq))
        })
        .collect::<lsdml::Result<Vec<_>>>()?;

    let rows: Vec<Vec<String>> = tasks
        .iter()
        .zip(&errors)
        .map(|(&(n, rep), &(h, xi, r))| {
            vec![
                format!("{n}"),
                format!("{rep}"),
                format!("{h}"),
                format!("{xi}"),
                format!("{r}"),
            ]
        })
        .collect();
    write_results(
        &out_dir,
        &["n", "rep", "h_weak_err_sq", "xi_err_sq", "r_err_sq"],
        &rows,
    )?;

    // Median per learner per sample size, in n_grid order.
    let mut medians: Vec<(usize, f64, f64, f64)> = Vec::new();
    for &n in &config.n_grid {
        let pick = |f: fn(&(f64, f64, f64)) -> f64| {
            let vals: Vec<f64> = tasks
                .iter()
                .zip(&errors)
                .filter(|((m, _), _)| *m == n)
                .map(|(_, e)| f(e))
                .collect();
            median(&vals)
        };
        medians.push((n, pick(|e| e.0), pick(|e| e.1), pick(|e| e.2)));
    }
    let decreasing =
        |f: fn(&(usize, f64, f64, f64)) -> f64| medians.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let slope = |f: fn(&(usize, f64, f64, f64)) -> f64| {
        let x: Vec<f64> = medians.iter().map(|m| (m.0 as f64).ln()).collect();
        let y: Vec<f64> = medians.iter().map(|m| f(m).ln()).collect();
        ols_slope(&x, &y)
    };

    let mut summary = format!(
        "process: {}\nreplications per sample size: {}\n\
         n        median ĥ weak err²   median ξ̂ err²        median r̂ err²\n",
        dgp.name, config.reps
    );
    for &(n, h, xi, r) in &medians {
        summary.push_str(&format!("{n:<8} {h:<20.6e} {xi:<20.6e} {r:<20.6e}\n"));
    }
    summary.push_str(&format!(
        "strictly decreasing medians: ĥ {}, ξ̂ {}, r̂ {}\n\
         log-log slope in n: ĥ {:.3}, ξ̂ {:.3}, r̂ {:.3}\n",
        yes_no(decreasing(|m| m.1)),
        yes_no(decreasing(|m| m.2)),
        yes_no(decreasing(|m| m.3)),
        slope(|m| m.1),
        slope(|m| m.2),
        slope(|m| m.3),
    ));
    write_summary(&out_dir, &summary)?;

    let series: Vec<(String, Vec<(f64, f64)>)> = vec![
        (
            "ĥ weak norm".into(),
            medians.iter().map(|m| (m.0 as f64, m.1)).collect(),
        ),
        (
            "ξ̂".into(),
            medians.iter().map(|m| (m.0 as f64, m.2)).collect(),
        ),
        (
            "r̂".into(),
            medians.iter().map(|m| (m.0 as f64, m.3)).collect(),
        ),
    ];
    crate::plot::log_log_lines(
        &out_dir.join("plot.svg"),
        "median squared learner error against sample size",
        "n",
        "median squared error",
        &series,
    );
    Ok(RunArtifacts { out_dir, summary })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
