//! The experiment implementations behind each subcommand, plus the shared
//! artifact plumbing: output directory creation, deterministic CSV/summary
//! writers, seed derivation for concurrent replications, and a slope fit.

use std::path::{Path, PathBuf};

use crate::{CliError, ExperimentConfig};

pub mod bias_identity;
pub mod coverage;
pub mod learner_rates;
pub mod oracle;
pub mod single_estimate;
pub mod tikhonov_rates;

/// Create the experiment's output directory (with parents) and return it.
pub(crate) fn ensure_out_dir(config: &ExperimentConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&config.out_dir)?;
    Ok(config.out_dir.clone())
}

/// Write `results.csv`: a header row, then one record per row, every cell
/// preformatted. Floats are formatted with Rust's shortest round-trip
/// representation, so identical numbers give identical bytes.
pub(crate) fn write_results(
    out_dir: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(out_dir.join("results.csv"))?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write `summary.txt` (always newline-terminated).
pub(crate) fn write_summary(out_dir: &Path, text: &str) -> Result<(), CliError> {
    let body = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    std::fs::write(out_dir.join("summary.txt"), body)?;
    Ok(())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent child seed for replication `index` of `stream`.
/// Pure function of its inputs, so concurrently executed replications get
/// disjoint, order-free seeds.
pub(crate) fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

/// Slope of the least-squares line through `(x_i, y_i)`.
pub(crate) fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>();
    let sxx = x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
    sxy / sxx
}

/// Median of a sample (mean of the middle pair for even lengths).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Format a scalar for the summary, snapping magnitudes below the oracle's
/// numerical-zero scale to an exact 0 so "no mass" reads as such.
pub(crate) fn fmt_snapped(x: f64) -> String {
    if x.abs() < 1e-9 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}
