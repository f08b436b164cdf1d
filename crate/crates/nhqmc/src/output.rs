//! Result rows, CSV files and the SVG chart drawn from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CSV_HEADER: &str = "t,method,estimate,stderr,exact,abs_error,n_samples,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub t: f64,
    pub method: String,
    /// `NaN` when the denominator guard tripped.
    pub estimate: f64,
    pub stderr: f64,
    pub exact: Option<f64>,
    pub abs_error: Option<f64>,
    pub n_samples: u64,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(t: f64, method: &str, estimate: f64, stderr: f64, exact: Option<f64>, n_samples: u64, seed: u64) -> Self {
        Self {
            t,
            method: method.to_string(),
            estimate,
            stderr,
            exact,
            abs_error: exact.map(|e| (estimate - e).abs()),
            n_samples,
            seed,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.estimate.is_nan()
    }
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    }
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    r.deserialize().map(|row| row.map_err(io)).collect()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 900.0;
const H: f64 = 380.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 45.0);

struct Panel {
    top: f64,
    x: (f64, f64),
    y: (f64, f64),
    log: bool,
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        let (l, r) = (MARGIN.0, W - MARGIN.1);
        l + (x - self.x.0) / (self.x.1 - self.x.0).max(1e-300) * (r - l)
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log { y.log10() } else { y };
        let (t, b) = (self.top + MARGIN.2, self.top + H - MARGIN.3);
        b - (y - self.y.0) / (self.y.1 - self.y.0).max(1e-300) * (b - t)
    }

    fn frame(&self, svg: &mut String, title: &str, ylabel: &str) {
        let (l, r) = (MARGIN.0, W - MARGIN.1);
        let (t, b) = (self.top + MARGIN.2, self.top + H - MARGIN.3);
        let _ = writeln!(svg, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{title}</text>"#, (l + r) / 2.0, t - 10.0);
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{0}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {0})">{ylabel}</text>"#,
            (t + b) / 2.0
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">t</text>"#, (l + r) / 2.0, b + 35.0);
        for i in 0..=4 {
            let x = self.x.0 + (self.x.1 - self.x.0) * i as f64 / 4.0;
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, self.px(x), b + 16.0, tick(x));
            let yv = self.y.0 + (self.y.1 - self.y.0) * i as f64 / 4.0;
            let (label, y) = if self.log { (format!("1e{yv:.1}"), 10f64.powf(yv)) } else { (tick(yv), yv) };
            let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{label}</text>"#, l - 6.0, self.py(y) + 4.0);
        }
    }

    fn line(&self, svg: &mut String, pts: &[(f64, f64)], color: &str, dash: bool) {
        if pts.is_empty() {
            return;
        }
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{color}"/>"#, self.px(x), self.py(y));
        }
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Estimate-vs-t and log-scale error-vs-t panels, one series per method.
pub fn render_svg(rows: &[ResultRow]) -> String {
    let mut by_method: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        by_method.entry(&r.method).or_default().push(r);
    }
    let mut exact: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.exact.map(|e| (r.t, e))).collect();
    exact.sort_by(|a, b| a.0.total_cmp(&b.0));
    exact.dedup_by(|a, b| a.0 == b.0);

    let x = bounds(rows.iter().map(|r| r.t));
    let y = bounds(rows.iter().flat_map(|r| [r.estimate, r.exact.unwrap_or(f64::NAN)]));
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.abs_error).filter(|e| *e > 0.0 && e.is_finite()).collect();
    let has_errors = !errors.is_empty();
    let ey = if has_errors {
        let lo = errors.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
        let hi = errors.iter().cloned().fold(0.0, f64::max).log10().ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    } else {
        (0.0, 1.0)
    };
    let height = if has_errors { 2.0 * H } else { H } + 30.0;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" font-family="sans-serif">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let top = Panel { top: 0.0, x, y, log: false };
    top.frame(&mut svg, "estimate vs t", "estimate");
    if exact.len() > 1 {
        top.line(&mut svg, &exact, "#000", true);
    }
    let bottom = Panel { top: H, x, y: ey, log: true };
    if has_errors {
        bottom.frame(&mut svg, "absolute error vs t", "|estimate - exact|");
    }
    let mut legend = vec![];
    for (i, (method, series)) in by_method.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = series.iter().filter(|r| r.estimate.is_finite()).map(|r| (r.t, r.estimate)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        top.line(&mut svg, &pts, color, false);
        if has_errors {
            let mut err: Vec<(f64, f64)> =
                series.iter().filter_map(|r| r.abs_error.filter(|e| *e > 0.0 && e.is_finite()).map(|e| (r.t, e))).collect();
            err.sort_by(|a, b| a.0.total_cmp(&b.0));
            bottom.line(&mut svg, &err, color, false);
        }
        legend.push((method.to_string(), color));
    }
    if exact.len() > 1 {
        legend.push(("exact".into(), "#000"));
    }
    let ly = height - 12.0;
    for (i, (name, color)) in legend.iter().enumerate() {
        let lx = MARGIN.0 + 140.0 * i as f64;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="{color}" stroke-width="3"/>"#, ly - 4.0, lx + 24.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}" font-size="12">{name}</text>"#, lx + 30.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reads `csv` and writes its chart to `svg`.
pub fn svg_from_csv(csv: &Path, svg: &Path) -> Result<()> {
    let rows = read_csv(csv)?;
    std::fs::write(svg, render_svg(&rows)).map_err(|e| CliError::io(svg, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<ResultRow> {
        vec![
            ResultRow::new(0.5, "continuous", 0.8, 0.01, Some(0.79), 1000, 1),
            ResultRow::new(1.0, "continuous", 0.6, 0.01, Some(0.62), 1000, 1),
            ResultRow::new(0.5, "trotter1", 0.791, 0.0, Some(0.79), 64, 1),
            ResultRow::new(1.0, "trotter1", f64::NAN, f64::NAN, Some(0.62), 64, 1),
        ]
    }

    #[test]
    fn csv_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&path, &rows()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(back[0], rows()[0]);
        assert!(back[3].is_flagged());
        assert!((back[1].abs_error.unwrap() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn rows_without_exact_leave_columns_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&path, &[ResultRow::new(0.0, "exact", 1.0, 0.0, None, 8, 2)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0.0,exact,1.0,0.0,,,8,2");
        write_csv(&path, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), CSV_HEADER);
    }

    #[test]
    fn svg_has_one_series_per_method() {
        let svg = render_svg(&rows());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("continuous") && svg.contains("trotter1") && svg.contains("exact"));
        assert_eq!(svg.matches("<polyline").count(), 5);
    }
}
