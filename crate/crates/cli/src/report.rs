//! JSON report and CSV band table.
//!
//! Every float in a report is rounded to 12 significant digits before it is
//! stored, so the emitted text parses back to exactly the stored values.

use std::fs;
use std::path::Path;

use qnpr_core::linreg::ConfidenceBand;
use qnpr_core::BackendStats;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub y_column: String,
    pub alpha: f64,
    pub backend: String,
    pub seed: u64,
    pub intercept: bool,
    pub degree: Option<usize>,
    pub kernel: Option<String>,
    pub bandwidth: Option<f64>,
    pub grid: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub x: f64,
    pub lower: f64,
    pub center: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub pivot_searches: usize,
    pub comparisons: usize,
    pub oracle_calls: usize,
    pub grover_rounds: usize,
    pub grover_iterations: usize,
}

impl From<&BackendStats> for StatsReport {
    fn from(s: &BackendStats) -> Self {
        Self {
            pivot_searches: s.pivot_searches,
            comparisons: s.comparisons,
            oracle_calls: s.oracle_calls,
            grover_rounds: s.grover_rounds,
            grover_iterations: s.grover_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub command: String,
    pub config: ConfigEcho,
    pub n: usize,
    pub p: usize,
    pub predictors: Vec<String>,
    pub response: String,
    /// Global coefficients; empty for local fits.
    pub coefficients: Vec<Coefficient>,
    pub sigma2_hat: Option<f64>,
    pub effective_dof: f64,
    /// Numerator degrees of freedom behind `c`.
    pub dof: usize,
    pub c: f64,
    pub sigma_hat: f64,
    pub band: Vec<BandRow>,
    pub backend_stats: StatsReport,
    pub holdout_count: Option<usize>,
    pub accepted_count: Option<usize>,
}

/// Band rows with `x` taken from `xs` (the varying coordinate of each grid point).
pub fn band_rows(band: &ConfidenceBand, xs: &[f64]) -> Vec<BandRow> {
    (0..band.len())
        .map(|i| BandRow {
            x: round12(xs[i]),
            lower: round12(band.lower[i]),
            center: round12(band.center[i]),
            upper: round12(band.upper[i]),
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    text
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn band_csv(rows: &[BandRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "lower", "center", "upper"])
        .expect("in-memory csv");
    for r in rows {
        w.write_record([r.x, r.lower, r.center, r.upper].map(|v| v.to_string()))
            .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}
