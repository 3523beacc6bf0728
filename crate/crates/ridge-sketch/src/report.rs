//! Sweep reports as JSON and CSV.
//!
//! The JSON layout is described by `schema/sweep-report.schema.json`
//! (available at runtime as [`REPORT_SCHEMA`]).

use std::io::Write;

use ridge_sketch_core::{
    lcurve, EmbeddingSpec, Method, Orientation, SweepCounters, SweepResult, Termination,
};
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = include_str!("../schema/sweep-report.schema.json");
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub lambda: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub residual_norm: f64,
    pub solution_norm: f64,
    pub s_i: Option<usize>,
    pub sd_hat: Option<f64>,
    pub factor_time_s: Option<f64>,
    pub solve_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_history: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerEntry {
    pub index: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: u32,
    pub method: Method,
    pub orientation: Orientation,
    pub rows: usize,
    pub cols: usize,
    pub embedding: Option<EmbeddingSpec>,
    pub oversampling: f64,
    pub tolerance: f64,
    pub sketch_time_s: Option<f64>,
    pub preprocess_time_s: Option<f64>,
    pub counters: SweepCounters,
    /// Corner of the L-curve through the records (λ descending), if any.
    pub corner: Option<CornerEntry>,
    pub records: Vec<LambdaEntry>,
}

pub struct ReportOptions {
    pub oversampling: f64,
    pub tolerance: f64,
    pub include_solutions: bool,
}

impl SweepReport {
    pub fn from_result(
        result: &SweepResult,
        shape: (usize, usize),
        opts: &ReportOptions,
    ) -> Self {
        let curve = lcurve(result);
        let corner = curve.corner.map(|i| CornerEntry {
            index: i,
            lambda: curve.points[i].lambda,
        });
        let records = result
            .records
            .iter()
            .map(|r| LambdaEntry {
                lambda: r.lambda,
                iterations: r.report.iterations,
                termination: r.report.termination,
                residual_norm: r.residual_norm,
                solution_norm: r.solution_norm,
                s_i: r.rank,
                sd_hat: r.sd_hat,
                factor_time_s: r.factor_time.map(|d| d.as_secs_f64()),
                solve_time_s: r.report.wall_time.map(|d| d.as_secs_f64()),
                residual_history: r.report.residual_history.clone(),
                solution: opts.include_solutions.then(|| r.solution.clone()),
            })
            .collect();
        Self {
            version: REPORT_VERSION,
            method: result.method,
            orientation: result.orientation,
            rows: shape.0,
            cols: shape.1,
            embedding: result.embedding,
            oversampling: opts.oversampling,
            tolerance: opts.tolerance,
            sketch_time_s: result.sketch_time.map(|d| d.as_secs_f64()),
            preprocess_time_s: result.preprocess_time.map(|d| d.as_secs_f64()),
            counters: result.counters,
            corner,
            records,
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "lambda",
    "iters",
    "resid",
    "xnorm",
    "s_i",
    "sd_hat",
    "factor_time_s",
    "solve_time_s",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per λ, in report order.
pub fn write_csv<W: Write>(w: W, report: &SweepReport) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in &report.records {
        out.write_record([
            r.lambda.to_string(),
            r.iterations.to_string(),
            r.residual_norm.to_string(),
            r.solution_norm.to_string(),
            opt(r.s_i),
            opt(r.sd_hat),
            opt(r.factor_time_s),
            opt(r.solve_time_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}
