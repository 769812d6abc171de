use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{DoaError, Result};

use super::experiment::RmseReport;

pub const CSV_HEADER: [&str; 6] = ["sweep_value", "method", "rmse_db", "crb_db", "trials", "failures"];

/// CSV text, one row per (sweep point, method). `crb_db` is the numeric CRB
/// in the RMSE dB convention, empty when unavailable.
pub fn report_csv(report: &RmseReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let werr = |e: csv::Error| DoaError::Numerical(format!("csv encoding: {e}"));
    w.write_record(CSV_HEADER).map_err(werr)?;
    for p in &report.points {
        let crb = p.crb_db.map(|v| v.to_string()).unwrap_or_default();
        for m in &p.methods {
            w.write_record([
                p.value.to_string(),
                m.method.to_string(),
                m.rmse_db.to_string(),
                crb.clone(),
                m.trials.to_string(),
                m.failures.to_string(),
            ])
            .map_err(werr)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| DoaError::Numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_csv(report: &RmseReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report_csv(report)?).map_err(|e| DoaError::io(path, e))
}

/// SVG line plot of RMSE (dB) against the sweep value, one series per method
/// plus the numeric CRB.
pub fn write_plot(report: &RmseReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let plot_err = |e: String| DoaError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let xs: Vec<f64> = report.points.iter().map(|p| p.value).collect();
    let mut ys: Vec<f64> = report
        .points
        .iter()
        .flat_map(|p| p.methods.iter().map(|m| m.rmse_db).chain(p.crb_db))
        .filter(|v| v.is_finite())
        .collect();
    if xs.is_empty() || ys.is_empty() {
        ys = vec![0.0, 1.0];
    }
    let (x0, x1) = bounds(if xs.is_empty() { &[0.0, 1.0] } else { &xs });
    let (y0, y1) = bounds(&ys);

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(16)
        .caption("RMSE", ("sans-serif", 22))
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| plot_err(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc(report.axis.label())
        .y_desc("RMSE (dB)")
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;

    let methods: Vec<_> = report
        .points
        .first()
        .map(|p| p.methods.iter().map(|m| m.method).collect())
        .unwrap_or_default();
    for (k, method) in methods.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        let series: Vec<(f64, f64)> = report
            .points
            .iter()
            .filter_map(|p| p.methods.get(k).map(|m| (p.value, m.rmse_db)))
            .filter(|(_, y)| y.is_finite())
            .collect();
        chart
            .draw_series(LineSeries::new(series, color.stroke_width(2)))
            .map_err(|e| plot_err(e.to_string()))?
            .label(method.to_string())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    let crb: Vec<(f64, f64)> = report
        .points
        .iter()
        .filter_map(|p| p.crb_db.map(|c| (p.value, c)))
        .collect();
    if !crb.is_empty() {
        chart
            .draw_series(LineSeries::new(crb, BLACK.stroke_width(1)))
            .map_err(|e| plot_err(e.to_string()))?
            .label("numeric CRB")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLACK));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;
    root.present().map_err(|e| plot_err(e.to_string()))?;
    Ok(())
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.05).max(0.5);
    (lo - pad, hi + pad)
}

/// Writes `rmse.csv` and, when `plot` is set, `rmse.svg` into `out_dir`.
pub fn emit_report(report: &RmseReport, out_dir: impl AsRef<Path>, plot: bool) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| DoaError::io(dir, e))?;
    let csv_path = dir.join("rmse.csv");
    write_csv(report, &csv_path)?;
    let mut written = vec![csv_path];
    if plot {
        let svg = dir.join("rmse.svg");
        write_plot(report, &svg)?;
        written.push(svg);
    }
    Ok(written)
}
