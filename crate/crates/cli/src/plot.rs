//! Best-effort SVG plots. Plots are presentation only — the CSVs are the
//! contract — so every entry point logs a warning on failure instead of
//! propagating an error.

use std::path::Path;

use plotters::prelude::*;

type PlotResult = Result<(), Box<dyn std::error::Error>>;

fn warn_on_failure(path: &Path, result: PlotResult) {
    if let Err(e) = result {
        eprintln!("warning: could not render plot {}: {e}", path.display());
    }
}

/// Pad a positive range multiplicatively for a log axis.
fn log_pad(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for v in values {
        let v = v.max(1e-300);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo / 2.0, hi * 2.0)
}

/// Singular values against their index, log scale.
pub fn spectrum(path: &Path, title: &str, values: &[f64]) {
    warn_on_failure(path, try_spectrum(path, title, values));
}

fn try_spectrum(path: &Path, title: &str, values: &[f64]) -> PlotResult {
    let root = SVGBackend::new(path, (900, 620)).into_drawing_area();
    root.fill(&WHITE)?;
    let (y_lo, y_hi) = log_pad(values.iter().copied());
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(46)
        .y_label_area_size(64)
        .build_cartesian_2d(0f64..(values.len() + 1) as f64, (y_lo..y_hi).log_scale())?;
    chart
        .configure_mesh()
        .x_desc("index")
        .y_desc("singular value")
        .draw()?;
    chart.draw_series(
        values
            .iter()
            .enumerate()
            .map(|(i, s)| Circle::new(((i + 1) as f64, s.max(1e-300)), 4, BLUE.filled())),
    )?;
    root.present()?;
    Ok(())
}

/// Scatter of paired values with the diagonal `y = x` for reference.
pub fn identity_scatter(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
) {
    warn_on_failure(
        path,
        try_identity_scatter(path, title, x_label, y_label, points),
    );
}

fn try_identity_scatter(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
) -> PlotResult {
    let root = SVGBackend::new(path, (900, 620)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &(x, y) in points {
        lo = lo.min(x).min(y);
        hi = hi.max(x).max(y);
    }
    let pad = (0.05 * (hi - lo)).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(46)
        .y_label_area_size(64)
        .build_cartesian_2d(lo..hi, lo..hi)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()?;
    chart.draw_series(LineSeries::new(
        [(lo, lo), (hi, hi)],
        BLACK.mix(0.4).stroke_width(1),
    ))?;
    chart.draw_series(
        points
            .iter()
            .map(|&p| Circle::new(p, 3, RED.mix(0.7).filled())),
    )?;
    root.present()?;
    Ok(())
}

/// Named series on a log-log chart.
pub fn log_log_lines(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) {
    warn_on_failure(
        path,
        try_log_log_lines(path, title, x_label, y_label, series),
    );
}

fn try_log_log_lines(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> PlotResult {
    let root = SVGBackend::new(path, (900, 620)).into_drawing_area();
    root.fill(&WHITE)?;
    let (x_lo, x_hi) = log_pad(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y_lo, y_hi) = log_pad(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(46)
        .y_label_area_size(64)
        .build_cartesian_2d((x_lo..x_hi).log_scale(), (y_lo..y_hi).log_scale())?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = Palette99::pick(i).mix(0.9);
        chart
            .draw_series(LineSeries::new(
                pts.iter().map(|&(x, y)| (x.max(1e-300), y.max(1e-300))),
                color.stroke_width(2),
            ))?
            .label(name.clone())
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .border_style(BLACK.mix(0.4))
        .background_style(WHITE.mix(0.85))
        .draw()?;
    root.present()?;
    Ok(())
}

/// One coverage bar per sample size with reference lines at the acceptance
/// band `[0.90, 0.98]` and the nominal level.
pub fn coverage_bars(path: &Path, title: &str, bars: &[(String, f64)], nominal: f64) {
    warn_on_failure(path, try_coverage_bars(path, title, bars, nominal));
}

fn try_coverage_bars(path: &Path, title: &str, bars: &[(String, f64)], nominal: f64) -> PlotResult {
    let root = SVGBackend::new(path, (900, 620)).into_drawing_area();
    root.fill(&WHITE)?;
    let y_lo = bars.iter().map(|b| b.1).fold(0.85f64, f64::min).max(0.0) - 0.05;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(24)
        .y_label_area_size(64)
        .build_cartesian_2d(0f64..bars.len() as f64, y_lo.max(0.0)..1.0f64)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(0)
        .y_desc("empirical coverage")
        .draw()?;
    chart.draw_series(bars.iter().enumerate().map(|(i, (_, cov))| {
        Rectangle::new(
            [(i as f64 + 0.2, y_lo.max(0.0)), (i as f64 + 0.8, *cov)],
            BLUE.mix(0.5).filled(),
        )
    }))?;
    chart.draw_series(bars.iter().enumerate().map(|(i, (name, cov))| {
        Text::new(
            format!("{name}: {cov:.3}"),
            (i as f64 + 0.22, (cov + 0.005).min(0.995)),
            ("sans-serif", 16),
        )
    }))?;
    for (level, color) in [
        (0.90, BLACK.mix(0.5)),
        (nominal, RED.mix(0.7)),
        (0.98, BLACK.mix(0.5)),
    ] {
        chart.draw_series(LineSeries::new(
            [(0.0, level), (bars.len() as f64, level)],
            color.stroke_width(1),
        ))?;
    }
    root.present()?;
    Ok(())
}

/// Per-rotation point estimates over the pooled estimate and its CI band.
pub fn estimate_band(
    path: &Path,
    title: &str,
    rotations: &[(f64, f64)],
    pooled: f64,
    ci: (f64, f64),
) {
    warn_on_failure(path, try_estimate_band(path, title, rotations, pooled, ci));
}

fn try_estimate_band(
    path: &Path,
    title: &str,
    rotations: &[(f64, f64)],
    pooled: f64,
    ci: (f64, f64),
) -> PlotResult {
    let root = SVGBackend::new(path, (900, 620)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut lo = ci.0.min(pooled);
    let mut hi = ci.1.max(pooled);
    for &(_, y) in rotations {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    let pad = (0.15 * (hi - lo)).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    let x_hi = rotations.iter().map(|r| r.0).fold(0.0f64, f64::max) + 0.5;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(46)
        .y_label_area_size(64)
        .build_cartesian_2d(-0.5f64..x_hi, lo..hi)?;
    chart
        .configure_mesh()
        .x_labels(rotations.len())
        .x_desc("rotation")
        .y_desc("estimate")
        .draw()?;
    chart.draw_series(std::iter::once(Rectangle::new(
        [(-0.5, ci.0), (x_hi, ci.1)],
        BLUE.mix(0.12).filled(),
    )))?;
    chart.draw_series(LineSeries::new(
        [(-0.5, pooled), (x_hi, pooled)],
        RED.mix(0.8).stroke_width(2),
    ))?;
    chart.draw_series(rotations.iter().map(|&p| Circle::new(p, 4, BLACK.filled())))?;
    root.present()?;
    Ok(())
}
