use std::io::{BufReader, Write};
use std::path::Path;

use polyharm_core::analyzer::{analyze_state, ConcentrationReport};
use polyharm_core::build_green;
use polyharm_core::io::read_checkpoint;
use serde::Serialize;

use crate::{create, CliError, RunConfig};

pub const ANALYSIS_FILE: &str = "analysis.csv";
pub const RECORDS_FILE: &str = "analysis.jsonl";

const HEADER: [&str; 13] = [
    "index",
    "u_max",
    "lambda",
    "rho",
    "n",
    "quantization_residual",
    "a5_sup",
    "profile_dev",
    "local_mass",
    "green_limit_dev",
    "min_boundary_ratio",
    "collar_mass",
    "total_mass",
];

#[derive(Debug, Serialize)]
struct Row {
    index: usize,
    u_max: f64,
    lambda: f64,
    rho: f64,
    n: usize,
    quantization_residual: f64,
    a5_sup: f64,
    profile_dev: Option<f64>,
    local_mass: f64,
    green_limit_dev: Option<f64>,
    min_boundary_ratio: f64,
    collar_mass: f64,
    total_mass: f64,
}

#[derive(Debug, Serialize)]
struct Record<'a> {
    index: usize,
    u_max: f64,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a ConcentrationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeSummary {
    pub states: usize,
    pub failures: usize,
    /// `(u_max, quantization_residual)` per analyzed state.
    pub residuals: Vec<(f64, f64)>,
}

impl AnalyzeSummary {
    /// Whether the quantization residual strictly decreases over the last three states.
    pub fn decreasing_tail(&self) -> Option<bool> {
        let k = self.residuals.len();
        (k >= 3).then(|| self.residuals[k - 3..].windows(2).all(|w| w[1].1 < w[0].1))
    }

    /// Least-squares slope of `log residual` against `u_max` over the second half of the branch.
    pub fn log_slope(&self) -> Option<f64> {
        let tail: Vec<(f64, f64)> = self.residuals[self.residuals.len() / 2..]
            .iter()
            .filter(|p| p.1 > 0.0)
            .map(|&(u, r)| (u, r.ln()))
            .collect();
        if tail.len() < 2 {
            return None;
        }
        let k = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn line(&self) -> String {
        let fmt = |v: Option<String>| v.unwrap_or_else(|| "n/a".into());
        format!(
            "analyzed {} states ({} failed); quantization residual decreasing over last 3: {}; d log(residual)/d u(0) = {}",
            self.states,
            self.failures,
            fmt(self.decreasing_tail().map(|b| b.to_string())),
            fmt(self.log_slope().map(|s| format!("{s:.4}"))),
        )
    }
}

pub fn run(cfg: &RunConfig, branch_path: &Path) -> Result<AnalyzeSummary, CliError> {
    let text = std::fs::read_to_string(branch_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", branch_path.display())))?;
    let states = if text.trim().is_empty() {
        Vec::new()
    } else {
        let cp = read_checkpoint(BufReader::new(text.as_bytes()))
            .map_err(|e| CliError::Io(format!("{}: {e}", branch_path.display())))?;
        let dim = cp.spec.dim;
        let g = build_green(dim, cp.spec.radius).map_err(|e| CliError::Science(e.to_string()))?;
        cp.states
            .iter()
            .map(|s| (s.u_max, s.lambda, analyze_state(s, &g, &cfg.analyzer)))
            .collect()
    };

    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(&cfg.output_dir, ANALYSIS_FILE)?);
    csv.write_record(HEADER)?;
    let mut jsonl = create(&cfg.output_dir, RECORDS_FILE)?;
    let mut summary = AnalyzeSummary { states: states.len(), failures: 0, residuals: Vec::new() };
    for (index, (u_max, lambda, result)) in states.iter().enumerate() {
        let record = match result {
            Ok(r) => {
                let first = r.points.first();
                csv.serialize(Row {
                    index,
                    u_max: *u_max,
                    lambda: *lambda,
                    rho: r.rho,
                    n: r.n,
                    quantization_residual: r.quantization_residual,
                    a5_sup: r.a5_sup,
                    profile_dev: first.and_then(|p| p.profile_dev),
                    local_mass: first.map_or(0.0, |p| p.local_mass),
                    green_limit_dev: r.green_limit_dev,
                    min_boundary_ratio: r.min_boundary_ratio,
                    collar_mass: r.collar_mass,
                    total_mass: r.total_mass,
                })?;
                summary.residuals.push((*u_max, r.quantization_residual));
                Record { index, u_max: *u_max, lambda: *lambda, report: Some(r), error: None }
            }
            Err(e) => {
                summary.failures += 1;
                Record { index, u_max: *u_max, lambda: *lambda, report: None, error: Some(e.to_string()) }
            }
        };
        let line = serde_json::to_string(&record).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(jsonl, "{line}")?;
    }
    csv.flush()?;
    jsonl.flush()?;

    if summary.failures > 0 {
        return Err(CliError::Science(format!(
            "{} of {} states failed analysis; see {RECORDS_FILE}",
            summary.failures, summary.states
        )));
    }
    Ok(summary)
}
