//! The shipped benchmark preset and the trend summary printed after a run.

use std::collections::BTreeMap;

use crate::config::RunConfig;
use crate::output::ResultRow;

pub const PRESET: &str = include_str!("../configs/fig3.toml");

pub fn preset() -> RunConfig {
    RunConfig::parse(PRESET).expect("shipped preset parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    /// Largest error over `t >= 1`.
    pub late_max: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Absolute-error statistics per method, in method-name order.
pub fn summarize(rows: &[ResultRow]) -> Vec<MethodSummary> {
    let mut by: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        by.entry(&r.method).or_default().push(r);
    }
    by.into_iter()
        .map(|(method, rs)| {
            let mut errs: Vec<f64> = rs.iter().map(|r| r.abs_error.unwrap_or(f64::NAN)).collect();
            let late = rs.iter().filter(|r| r.t >= 1.0 - 1e-12).filter_map(|r| r.abs_error).fold(0.0, f64::max);
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            let max = errs.iter().cloned().fold(0.0, f64::max);
            MethodSummary { method: method.to_string(), mean, median: median(&mut errs), max, late_max: late }
        })
        .collect()
}

pub fn report(summary: &[MethodSummary]) -> String {
    let mut s = format!("{:<12} {:>12} {:>12} {:>12} {:>12}\n", "method", "mean_err", "median_err", "max_err", "max_err_t>=1");
    for m in summary {
        s += &format!("{:<12} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}\n", m.method, m.mean, m.median, m.max, m.late_max);
    }
    let get = |name: &str| summary.iter().find(|m| m.method == name);
    if let (Some(c), Some(t)) = (get("continuous"), get("trotter1")) {
        s += &format!("continuous median <= trotter1 median: {}\n", c.median <= t.median);
    }
    if let (Some(c), Some(q)) = (get("continuous"), get("qdrift")) {
        s += &format!("qdrift late max >= 2 x continuous late max: {}\n", q.late_max >= 2.0 * c.late_max);
    }
    s
}
