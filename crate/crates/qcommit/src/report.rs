//! CSV tables and minimal SVG plots.

use std::fmt::Write as _;

use qcommit_core::rl::CurveRow;
use serde::Serialize;

use crate::pipeline::EvalRow;

fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `episode,return,violation,epsilon,loss`; absent values are empty cells.
pub fn curve_csv(rows: &[CurveRow]) -> Vec<u8> {
    csv_bytes(rows, &["episode", "return", "violation", "epsilon", "loss"])
}

pub fn eval_csv(rows: &[EvalRow]) -> Vec<u8> {
    csv_bytes(
        rows,
        &[
            "period",
            "operational_cost",
            "startup_cost",
            "violation",
            "adjustment_mw",
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub total_cost: f64,
    pub operational_cost: f64,
    pub startup_cost: f64,
    pub violation: f64,
    pub adjustment_output_mw: f64,
    pub wall_time_s: f64,
}

pub const COMPARISON_HEADER: [&str; 7] = [
    "method",
    "total_cost",
    "operational_cost",
    "startup_cost",
    "violation",
    "adjustment_output_mw",
    "wall_time_s",
];

pub fn comparison_csv(rows: &[ComparisonRow]) -> Vec<u8> {
    csv_bytes(rows, &COMPARISON_HEADER)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    s
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn axis_labels(s: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let bottom = HEIGHT - MARGIN;
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{x0:.4}</text>",
        bottom + 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{x1:.4}</text>",
        WIDTH - MARGIN,
        bottom + 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"4\" y=\"{bottom}\" font-family=\"sans-serif\" font-size=\"11\">{y0:.4}</text>"
    );
    let _ = writeln!(
        s,
        "<text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{y1:.4}</text>",
        MARGIN + 10.0
    );
}

/// One polyline per named series, x = index.
pub fn line_plot(title: &str, series: &[(String, Vec<f64>)]) -> Vec<u8> {
    let mut s = header(title);
    let xr = (
        0.0,
        series
            .iter()
            .map(|(_, v)| v.len())
            .max()
            .unwrap_or(1)
            .saturating_sub(1)
            .max(1) as f64,
    );
    let yr = range(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let pw = WIDTH - 2.0 * MARGIN;
    let ph = HEIGHT - 2.0 * MARGIN;
    for (k, (name, values)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut pts = String::new();
        for (i, v) in values.iter().enumerate().filter(|(_, v)| v.is_finite()) {
            let x = MARGIN + pw * (i as f64 - xr.0) / (xr.1 - xr.0);
            let y = MARGIN + ph * (1.0 - (v - yr.0) / (yr.1 - yr.0));
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.trim_end()
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            MARGIN + 8.0,
            MARGIN + 16.0 + 14.0 * k as f64,
            escape(name)
        );
    }
    axis_labels(&mut s, xr, yr);
    s.push_str("</svg>\n");
    s.into_bytes()
}

/// Bin counts over `bins` equal-width bins spanning all samples.
pub fn histogram_counts(samples: &[f64], bins: usize, (lo, hi): (f64, f64)) -> Vec<usize> {
    let mut counts = vec![0; bins.max(1)];
    let n = counts.len();
    for v in samples.iter().filter(|v| v.is_finite()) {
        let idx = ((v - lo) / (hi - lo) * n as f64).floor();
        counts[(idx.max(0.0) as usize).min(n - 1)] += 1;
    }
    counts
}

/// Side-by-side bars per bin, one colour per named sample set.
pub fn histogram_plot(title: &str, series: &[(String, Vec<f64>)], bins: usize) -> Vec<u8> {
    let mut s = header(title);
    let xr = range(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let counts: Vec<Vec<usize>> = series
        .iter()
        .map(|(_, v)| histogram_counts(v, bins, xr))
        .collect();
    let top = counts.iter().flatten().copied().max().unwrap_or(1).max(1) as f64;
    let pw = WIDTH - 2.0 * MARGIN;
    let ph = HEIGHT - 2.0 * MARGIN;
    let bin_w = pw / bins.max(1) as f64;
    let bar_w = bin_w / series.len().max(1) as f64;
    for (k, ((name, _), c)) in series.iter().zip(&counts).enumerate() {
        let color = COLORS[k % COLORS.len()];
        for (b, &n) in c.iter().enumerate() {
            let h = ph * n as f64 / top;
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>",
                MARGIN + b as f64 * bin_w + k as f64 * bar_w,
                MARGIN + ph - h,
                bar_w
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            WIDTH - MARGIN - 120.0,
            MARGIN + 16.0 + 14.0 * k as f64,
            escape(name)
        );
    }
    axis_labels(&mut s, xr, (0.0, top));
    s.push_str("</svg>\n");
    s.into_bytes()
}
