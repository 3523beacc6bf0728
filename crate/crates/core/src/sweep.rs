//! Regularization sweeps: one sketch per problem, one preconditioner and one
//! LSQR solve per λ.
//!
//! [`PreparedSweep::prepare`] does the shared work (embedding draw, sketch,
//! Gram matrix or SVD). Each distinct λ is then an independent unit of work
//! through [`PreparedSweep::solve_distinct`], which callers may run in
//! parallel; [`PreparedSweep::finish`] restores the caller's λ order.
//! [`run_sweep`] does all three sequentially.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::lsqr::{lsqr, LsqrConfig, SolveReport};
use crate::matrix::{norm2, DenseMatrix};
use crate::operator::{AugmentedForm, AugmentedOperator, LeftPreconditioned, RightPreconditioned};
use crate::precond::{
    build_gram, estimate_sd, CholeskyPreconditioner, GramSide, LowRankPreconditioner,
    Preconditioner, SvdSketch,
};
use crate::problem::{Orientation, ProblemInstance};
use crate::sketch::{Embedding, EmbeddingKind, EmbeddingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    #[cfg_attr(feature = "serde", serde(rename = "chol"))]
    Cholesky,
    #[cfg_attr(feature = "serde", serde(rename = "lowrank"))]
    LowRank,
    /// QR of the stacked sketch `[XA; √λ I]` for every λ (tall problems only).
    #[cfg_attr(feature = "serde", serde(rename = "qr_baseline"))]
    QrBaseline,
    #[cfg_attr(feature = "serde", serde(rename = "unpreconditioned"))]
    Unpreconditioned,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cholesky => "chol",
            Self::LowRank => "lowrank",
            Self::QrBaseline => "qr_baseline",
            Self::Unpreconditioned => "unpreconditioned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "chol" | "cholesky" => Some(Self::Cholesky),
            "lowrank" | "low_rank" => Some(Self::LowRank),
            "qr_baseline" | "qr" => Some(Self::QrBaseline),
            "unpreconditioned" | "none" => Some(Self::Unpreconditioned),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchChoice {
    /// Size picked from the method, problem shape and oversampling factor.
    Auto {
        kind: EmbeddingKind,
        seed: u64,
    },
    Fixed(EmbeddingSpec),
}

/// Where the low-rank method gets its statistical-dimension estimates.
#[derive(Debug, Clone, PartialEq)]
pub enum SdSource {
    /// From the singular values of the (pilot) sketch. `guess` bounds the
    /// pilot size at `4⌈guess⌉`; without it the pilot is `min(m, n)`.
    Auto { guess: Option<f64> },
    /// One estimate per entry of the λ list, in the same order.
    Supplied(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SweepRequest<'a> {
    pub problem: &'a ProblemInstance,
    pub lambdas: Vec<f64>,
    pub method: Method,
    pub sketch: SketchChoice,
    /// `α ≥ 1`. Cholesky and QR sketches use `s = ⌈α·min(m, n)⌉`; the
    /// low-rank method truncates to `s_i = ⌈α·⌈ŝd_λ⌉⌉`.
    pub oversampling: f64,
    pub solver: LsqrConfig,
    pub sd: SdSource,
}

impl<'a> SweepRequest<'a> {
    pub fn new(problem: &'a ProblemInstance, lambdas: Vec<f64>, method: Method) -> Self {
        Self {
            problem,
            lambdas,
            method,
            sketch: SketchChoice::Auto {
                kind: EmbeddingKind::Gaussian,
                seed: 0,
            },
            oversampling: 2.0,
            solver: LsqrConfig::default(),
            sd: SdSource::Auto { guess: None },
        }
    }
}

/// Monotonic time source. The core crate has no clock of its own.
pub trait Clock: Sync {
    /// Time since an arbitrary fixed origin, or `None` if unavailable.
    fn now(&self) -> Option<Duration>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> Option<Duration> {
        None
    }
}

fn elapsed(clock: &dyn Clock, start: Option<Duration>) -> Option<Duration> {
    Some(clock.now()?.saturating_sub(start?))
}

/// How often the shared stage ran; a sweep draws one embedding and forms
/// at most one Gram matrix or SVD regardless of the number of λ values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepCounters {
    pub embeddings_drawn: usize,
    pub sketches_applied: usize,
    pub grams: usize,
    pub svds: usize,
    pub factorizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaRecord {
    pub lambda: f64,
    pub solution: Vec<f64>,
    /// The trailing `m` coordinates of the minimum-norm solution of
    /// `[A  √λ I] z = b` (wide problems only).
    pub augmented_tail: Option<Vec<f64>>,
    pub report: SolveReport,
    /// `‖A x − b‖₂`.
    pub residual_norm: f64,
    pub solution_norm: f64,
    /// Truncation rank `s_i` (low-rank method only).
    pub rank: Option<usize>,
    pub sd_hat: Option<f64>,
    pub factor_time: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub method: Method,
    pub orientation: Orientation,
    pub embedding: Option<EmbeddingSpec>,
    /// Same order as the requested λ list.
    pub records: Vec<LambdaRecord>,
    pub sketch_time: Option<Duration>,
    /// Gram matrix or SVD of the sketch.
    pub preprocess_time: Option<Duration>,
    pub counters: SweepCounters,
}

impl SweepResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lambda).collect()
    }
}

enum Shared {
    None,
    Gram(DenseMatrix),
    Sketch(DenseMatrix),
    Svd(SvdSketch),
}

/// A sweep whose shared stage is done; per-λ work is independent.
pub struct PreparedSweep<'a> {
    problem: &'a ProblemInstance,
    method: Method,
    solver: LsqrConfig,
    /// Distinct λ values, descending.
    distinct: Vec<f64>,
    /// For each requested λ, its index in `distinct`.
    slot: Vec<usize>,
    shared: Shared,
    ranks: Vec<Option<usize>>,
    sd_hat: Vec<Option<f64>>,
    embedding: Option<EmbeddingSpec>,
    sketch_time: Option<Duration>,
    preprocess_time: Option<Duration>,
    counters: SweepCounters,
}

/// The output of one per-λ unit of work.
#[derive(Debug, Clone)]
pub struct DistinctSolution {
    solution: Vec<f64>,
    tail: Option<Vec<f64>>,
    report: SolveReport,
    factor_time: Option<Duration>,
}

fn ceil_usize(x: f64) -> usize {
    let c = libm::ceil(x);
    if c <= 0.0 {
        0
    } else {
        c as usize
    }
}

fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("λ list is empty"));
    }
    for &l in lambdas {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::NonPositiveLambda(l));
        }
    }
    Ok(())
}

impl<'a> PreparedSweep<'a> {
    pub fn prepare(req: &SweepRequest<'a>, clock: &dyn Clock) -> Result<Self> {
        validate_lambdas(&req.lambdas)?;
        req.solver.validate()?;
        if !(req.oversampling >= 1.0) || !req.oversampling.is_finite() {
            return Err(Error::InvalidArgument(
                "oversampling factor must be at least 1",
            ));
        }
        let problem = req.problem;
        let orientation = problem.orientation();
        if req.method == Method::QrBaseline && orientation != Orientation::Overdetermined {
            return Err(Error::WrongOrientation);
        }
        if let SdSource::Supplied(v) = &req.sd {
            if v.len() != req.lambdas.len() {
                return Err(Error::DimensionMismatch {
                    context: "supplied sd estimates",
                    expected: req.lambdas.len(),
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "sd estimates must be finite and nonnegative",
                ));
            }
        }

        let mut distinct = req.lambdas.clone();
        distinct.sort_by(|a, b| b.total_cmp(a));
        distinct.dedup();
        let slot: Vec<usize> = req
            .lambdas
            .iter()
            .map(|l| distinct.iter().position(|d| d == l).expect("present"))
            .collect();

        let (m, n) = (problem.rows(), problem.cols());
        let k = m.min(n);
        // Tall problems sketch rows (left), wide problems sketch columns (right).
        let (ambient, side) = match orientation {
            Orientation::Overdetermined => (m, GramSide::Left),
            Orientation::Underdetermined => (n, GramSide::Right),
        };

        let mut sd_supplied: Vec<Option<f64>> = vec![None; distinct.len()];
        if let SdSource::Supplied(v) = &req.sd {
            for (i, &sd) in v.iter().enumerate() {
                let d = &mut sd_supplied[slot[i]];
                *d = Some(d.map_or(sd, |old: f64| old.max(sd)));
            }
        }

        let embedding = match (req.method, req.sketch) {
            (Method::Unpreconditioned, _) => None,
            (_, SketchChoice::Fixed(spec)) => Some(spec),
            (Method::LowRank, SketchChoice::Auto { kind, seed }) => {
                let s = match &req.sd {
                    SdSource::Supplied(_) => {
                        let sd_min = sd_supplied.last().copied().flatten().unwrap_or(0.0);
                        let s = ceil_usize(req.oversampling * libm::ceil(sd_min)).max(1);
                        if s > k {
                            return Err(Error::InvalidSketch { s, ambient: k });
                        }
                        s
                    }
                    SdSource::Auto { guess: Some(g) } if *g > 0.0 => {
                        k.min(4 * ceil_usize(*g)).max(1)
                    }
                    SdSource::Auto { .. } => k,
                };
                Some(EmbeddingSpec::new(kind, s, seed))
            }
            (_, SketchChoice::Auto { kind, seed }) => {
                let s = ceil_usize(req.oversampling * k as f64).clamp(1, ambient);
                Some(EmbeddingSpec::new(kind, s, seed))
            }
        };

        let mut counters = SweepCounters::default();
        let mut sketch_time = None;
        let mut preprocess_time = None;
        let mut ranks = vec![None; distinct.len()];
        let mut sd_hat = vec![None; distinct.len()];

        let shared = match embedding {
            None => Shared::None,
            Some(spec) => {
                let t0 = clock.now();
                let emb = Embedding::draw(spec, ambient)?;
                counters.embeddings_drawn += 1;
                let y = match side {
                    GramSide::Left => emb.apply_left(problem.a())?,
                    GramSide::Right => emb.apply_right(problem.a())?,
                };
                counters.sketches_applied += 1;
                sketch_time = elapsed(clock, t0);

                let t1 = clock.now();
                let shared = match req.method {
                    Method::Cholesky => {
                        counters.grams += 1;
                        Shared::Gram(build_gram(&y, side))
                    }
                    Method::QrBaseline => Shared::Sketch(y),
                    Method::LowRank => {
                        counters.svds += 1;
                        let svd = SvdSketch::from_sketch(&y, side);
                        let cap = svd.rank_capacity();
                        for (i, &lambda) in distinct.iter().enumerate() {
                            let sd = match sd_supplied[i] {
                                Some(v) => v,
                                None => estimate_sd(svd.singular_values(), lambda)?,
                            };
                            sd_hat[i] = Some(sd);
                            let r = ceil_usize(req.oversampling * libm::ceil(sd));
                            ranks[i] = Some(r.clamp(1, cap));
                        }
                        Shared::Svd(svd)
                    }
                    Method::Unpreconditioned => Shared::None,
                };
                preprocess_time = elapsed(clock, t1);
                shared
            }
        };

        Ok(Self {
            problem,
            method: req.method,
            solver: req.solver,
            distinct,
            slot,
            shared,
            ranks,
            sd_hat,
            embedding,
            sketch_time,
            preprocess_time,
            counters,
        })
    }

    /// Distinct λ values in descending order.
    pub fn distinct_lambdas(&self) -> &[f64] {
        &self.distinct
    }

    pub fn embedding(&self) -> Option<EmbeddingSpec> {
        self.embedding
    }

    pub fn counters(&self) -> SweepCounters {
        self.counters
    }

    /// Solves for `distinct_lambdas()[i]`.
    pub fn solve_distinct(&self, i: usize, clock: &dyn Clock) -> Result<DistinctSolution> {
        let lambda = self.distinct[i];
        self.solve_at(i, lambda, clock)
            .map_err(|e| Error::AtLambda {
                index: i,
                lambda,
                source: Box::new(e),
            })
    }

    fn solve_at(&self, i: usize, lambda: f64, clock: &dyn Clock) -> Result<DistinctSolution> {
        let t0 = clock.now();
        let factor = match (&self.shared, self.method) {
            (Shared::Gram(c), _) => Factor::Chol(CholeskyPreconditioner::build(c, lambda)?),
            (Shared::Sketch(y), _) => {
                Factor::Chol(CholeskyPreconditioner::from_stacked_qr(y, lambda)?)
            }
            (Shared::Svd(svd), _) => {
                let rank = self.ranks[i].expect("set for low-rank sweeps");
                Factor::LowRank(LowRankPreconditioner::from_svd(svd, lambda, rank)?)
            }
            (Shared::None, _) => Factor::None,
        };
        let factor_time = elapsed(clock, t0);

        let t1 = clock.now();
        let (solution, tail, mut report) = match &factor {
            Factor::Chol(p) => self.solve_with(lambda, Some(p))?,
            Factor::LowRank(p) => self.solve_with(lambda, Some(p))?,
            Factor::None => self.solve_with::<CholeskyPreconditioner>(lambda, None)?,
        };
        report.wall_time = elapsed(clock, t1);
        Ok(DistinctSolution {
            solution,
            tail,
            report,
            factor_time,
        })
    }

    fn solve_with<P: Preconditioner>(
        &self,
        lambda: f64,
        p: Option<&P>,
    ) -> Result<(Vec<f64>, Option<Vec<f64>>, SolveReport)> {
        let a = self.problem.a();
        let b = self.problem.b();
        let (m, n) = a.shape();
        let mut cfg = self.solver;
        match self.problem.orientation() {
            Orientation::Overdetermined => {
                let op = AugmentedOperator::new(a, lambda, AugmentedForm::Stacked)?;
                let mut rhs = vec![0.0; m + n];
                rhs[..m].copy_from_slice(b);
                if cfg.max_iterations.is_none() {
                    cfg.max_iterations = Some(4 * m.min(n));
                }
                match p {
                    Some(p) => {
                        let pre = RightPreconditioned::new(&op, p)?;
                        let (mut y, rep) = lsqr(&pre, &rhs, &cfg)?;
                        p.apply_inverse_in_place(&mut y, false);
                        Ok((y, None, rep))
                    }
                    None => {
                        let (x, rep) = lsqr(&op, &rhs, &cfg)?;
                        Ok((x, None, rep))
                    }
                }
            }
            Orientation::Underdetermined => {
                let op = AugmentedOperator::new(a, lambda, AugmentedForm::SideBySide)?;
                if cfg.max_iterations.is_none() {
                    cfg.max_iterations = Some(4 * m.min(n));
                }
                let (mut z, rep) = match p {
                    Some(p) => {
                        let pre = LeftPreconditioned::new(&op, p)?;
                        let mut rhs = b.to_vec();
                        p.apply_inverse_in_place(&mut rhs, true);
                        lsqr(&pre, &rhs, &cfg)?
                    }
                    None => lsqr(&op, b, &cfg)?,
                };
                let tail = z.split_off(n);
                Ok((z, Some(tail), rep))
            }
        }
    }

    /// Assembles the result in the caller's λ order. `solutions[i]` must be
    /// the output of `solve_distinct(i)`.
    pub fn finish(self, solutions: Vec<DistinctSolution>, lambdas: &[f64]) -> Result<SweepResult> {
        if solutions.len() != self.distinct.len() {
            return Err(Error::DimensionMismatch {
                context: "per-λ solutions",
                expected: self.distinct.len(),
                actual: solutions.len(),
            });
        }
        if lambdas.len() != self.slot.len() {
            return Err(Error::DimensionMismatch {
                context: "λ list",
                expected: self.slot.len(),
                actual: lambdas.len(),
            });
        }
        let a = self.problem.a();
        let b = self.problem.b();
        let mut counters = self.counters;
        counters.factorizations = match self.shared {
            Shared::None => 0,
            _ => solutions.len(),
        };
        let mut records = Vec::with_capacity(lambdas.len());
        for (&lambda, &d) in lambdas.iter().zip(&self.slot) {
            let sol = &solutions[d];
            let mut r = a.matvec(&sol.solution);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= bi;
            }
            records.push(LambdaRecord {
                lambda,
                residual_norm: norm2(&r),
                solution_norm: norm2(&sol.solution),
                solution: sol.solution.clone(),
                augmented_tail: sol.tail.clone(),
                report: sol.report.clone(),
                rank: self.ranks[d],
                sd_hat: self.sd_hat[d],
                factor_time: sol.factor_time,
            });
        }
        Ok(SweepResult {
            method: self.method,
            orientation: self.problem.orientation(),
            embedding: self.embedding,
            records,
            sketch_time: self.sketch_time,
            preprocess_time: self.preprocess_time,
            counters,
        })
    }
}

enum Factor {
    None,
    Chol(CholeskyPreconditioner),
    LowRank(LowRankPreconditioner),
}

/// Runs a full sweep on the current thread.
pub fn run_sweep(req: &SweepRequest<'_>, clock: &dyn Clock) -> Result<SweepResult> {
    let prepared = PreparedSweep::prepare(req, clock)?;
    let solutions = (0..prepared.distinct_lambdas().len())
        .map(|i| prepared.solve_distinct(i, clock))
        .collect::<Result<Vec<_>>>()?;
    prepared.finish(solutions, &req.lambdas)
}
