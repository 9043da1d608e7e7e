use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::metrics::EvalReport;
use super::sweep::SweepTable;

/// Rendered results: a human table plus machine-readable delimited rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportTable {
    pub text: String,
    pub rows: Vec<String>,
}

fn fmt_metric(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_metric(v),
        None => String::from("-"),
    }
}

/// Render named evaluation reports with a stable column order. More than one
/// entry adds a mean row, matching how multi-run results are reported.
pub fn report_table(entries: &[(String, EvalReport)]) -> ReportTable {
    let header = ["name", "precision", "recall", "f1", "accuracy"];
    let mut grid: Vec<[String; 5]> = Vec::new();
    for (name, report) in entries {
        grid.push([
            name.clone(),
            fmt_metric(report.precision),
            fmt_metric(report.recall),
            fmt_metric(report.f1),
            fmt_opt(report.accuracy),
        ]);
    }
    if entries.len() > 1 {
        let n = entries.len() as f64;
        let mean = |f: &dyn Fn(&EvalReport) -> f64| entries.iter().map(|(_, r)| f(r)).sum::<f64>() / n;
        let accuracy = if entries.iter().all(|(_, r)| r.accuracy.is_some()) {
            Some(mean(&|r: &EvalReport| r.accuracy.unwrap_or(0.0)))
        } else {
            None
        };
        grid.push([
            String::from("mean"),
            fmt_metric(mean(&|r: &EvalReport| r.precision)),
            fmt_metric(mean(&|r: &EvalReport| r.recall)),
            fmt_metric(mean(&|r: &EvalReport| r.f1)),
            fmt_opt(accuracy),
        ]);
    }

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &grid {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut text = String::new();
    let render_row = |cells: &[String], widths: &[usize], out: &mut String| {
        for (i, (cell, w)) in cells.iter().zip(widths.iter()).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            for _ in cell.len()..*w {
                out.push(' ');
            }
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = header.iter().map(|h| String::from(*h)).collect();
    render_row(&header_cells, &widths, &mut text);
    for row in &grid {
        render_row(row, &widths, &mut text);
    }

    let mut rows = Vec::new();
    for (name, report) in entries {
        rows.push(format!("{name},precision,{}", report.precision));
        rows.push(format!("{name},recall,{}", report.recall));
        rows.push(format!("{name},f1,{}", report.f1));
        if let Some(acc) = report.accuracy {
            rows.push(format!("{name},accuracy,{acc}"));
        }
    }
    ReportTable { text, rows }
}

/// Human rendering of a sweep: one row per grid point with mean and stddev.
pub fn render_sweep_table(table: &SweepTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>10}  {:>6}  {:>10}  {:>10}\n",
        "axis", "n", "mean", "stddev"
    ));
    for point in &table.points {
        let n = table
            .cells
            .iter()
            .filter(|c| c.axis_value == point.axis_value && c.error.is_none())
            .count();
        out.push_str(&format!(
            "{:>10}  {:>6}  {:>10.4}  {:>10.4}\n",
            point.axis_value, n, point.mean, point.stddev
        ));
    }
    out
}
