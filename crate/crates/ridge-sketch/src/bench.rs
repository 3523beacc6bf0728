//! Marginal per-λ cost comparison between methods.
//!
//! Each run sweeps the whole λ list on one thread. The marginal cost of a λ
//! is its factorization time plus its LSQR time; the shared sketch stage is
//! reported separately. The per-run figure is the mean marginal cost over
//! the λ list, and the summary is the median over runs.

use std::time::Duration;

use ridge_sketch_core::{
    EmbeddingKind, EmbeddingSpec, LsqrConfig, Method, ProblemInstance, SdSource, SketchChoice,
    SweepRequest,
};
use serde::{Deserialize, Serialize};

use crate::runner::{run_timed, RunError};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub lambdas: Vec<f64>,
    pub runs: usize,
    pub kind: EmbeddingKind,
    /// Sketch size `s = ⌈α·min(m, n)⌉`.
    pub oversampling: f64,
    pub seed: u64,
    pub solver: LsqrConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: Method,
    pub sketch_size: Option<usize>,
    /// Mean marginal seconds per λ, one entry per run.
    pub per_lambda_s: Vec<f64>,
    pub median_per_lambda_s: f64,
    /// Sketch plus Gram/SVD seconds, one entry per run.
    pub setup_s: Vec<f64>,
    pub total_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: usize,
    pub cols: usize,
    pub lambdas: usize,
    pub runs: usize,
    pub methods: Vec<MethodTiming>,
}

impl BenchReport {
    pub fn timing(&self, method: Method) -> Option<&MethodTiming> {
        self.methods.iter().find(|m| m.method == method)
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
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

fn secs(d: Option<Duration>) -> f64 {
    d.map_or(0.0, |d| d.as_secs_f64())
}

pub fn run_bench(problem: &ProblemInstance, cfg: &BenchConfig) -> Result<BenchReport, RunError> {
    if cfg.runs == 0 {
        return Err(ridge_sketch_core::Error::InvalidArgument("bench needs at least one run").into());
    }
    let k = problem.min_dim();
    let ambient = problem.rows().max(problem.cols());
    let s = ((cfg.oversampling * k as f64).ceil() as usize).clamp(1, ambient);
    let mut methods = Vec::new();
    for &method in &cfg.methods {
        let mut per_lambda = Vec::with_capacity(cfg.runs);
        let mut setup = Vec::with_capacity(cfg.runs);
        let mut iterations = 0;
        let mut sketch_size = None;
        for _ in 0..cfg.runs {
            let mut req = SweepRequest::new(problem, cfg.lambdas.clone(), method);
            req.oversampling = cfg.oversampling;
            req.solver = cfg.solver;
            req.sd = SdSource::Auto { guess: None };
            req.sketch = match method {
                Method::LowRank => SketchChoice::Auto {
                    kind: cfg.kind,
                    seed: cfg.seed,
                },
                _ => SketchChoice::Fixed(EmbeddingSpec::new(cfg.kind, s, cfg.seed)),
            };
            let res = run_timed(&req)?;
            sketch_size = res.embedding.map(|e| e.s);
            let marginal: f64 = res
                .records
                .iter()
                .map(|r| secs(r.factor_time) + secs(r.report.wall_time))
                .sum();
            per_lambda.push(marginal / res.records.len() as f64);
            setup.push(secs(res.sketch_time) + secs(res.preprocess_time));
            iterations = res.records.iter().map(|r| r.report.iterations).sum();
        }
        methods.push(MethodTiming {
            method,
            sketch_size,
            median_per_lambda_s: median(&per_lambda),
            per_lambda_s: per_lambda,
            setup_s: setup,
            total_iterations: iterations,
        });
    }
    Ok(BenchReport {
        rows: problem.rows(),
        cols: problem.cols(),
        lambdas: cfg.lambdas.len(),
        runs: cfg.runs,
        methods,
    })
}
