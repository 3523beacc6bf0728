//! Parallel sweeps on a rayon pool.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use ridge_sketch_core::{Clock, PreparedSweep, SweepRequest, SweepResult};

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: Instant,
}

impl Default for StdClock {
    fn default() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Clock for StdClock {
    fn now(&self) -> Option<Duration> {
        Some(self.origin.elapsed())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] ridge_sketch_core::Error),
    #[error("could not start thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs the shared stage on the calling thread, then fans the distinct λ
/// values out over `threads` workers (all cores when `None`). Output order
/// and values do not depend on the thread count.
pub fn run_parallel(req: &SweepRequest<'_>, threads: Option<usize>) -> Result<SweepResult, RunError> {
    let clock = StdClock::default();
    let prepared = PreparedSweep::prepare(req, &clock)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let count = prepared.distinct_lambdas().len();
    let solutions = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| prepared.solve_distinct(i, &clock))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(prepared.finish(solutions, &req.lambdas)?)
}

/// Sequential sweep with wall-clock timings.
pub fn run_timed(req: &SweepRequest<'_>) -> Result<SweepResult, RunError> {
    Ok(ridge_sketch_core::run_sweep(req, &StdClock::default())?)
}
