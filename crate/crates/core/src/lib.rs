//! Sketch-to-precondition solvers for Tikhonov-regularized linear least squares.
//!
//! The crate solves `min ‖Ax − b‖² + λ‖x‖²` for many values of `λ` while
//! sketching `A` only once. Two preconditioner families are provided:
//!
//! * a Cholesky factor of the partly exact sketched Gram matrix
//!   `(XA)ᵀ(XA) + λI` (or `(AX)(AX)ᵀ + λI` for wide problems), and
//! * a low-rank factored inverse `λ^(-1/2)(I − W S Wᵀ)` built from the SVD of
//!   a sketch whose size tracks the statistical dimension of the problem.
//!
//! Each regularized system is solved matrix-free with LSQR on the augmented
//! operator `[A; √λ I]` (tall) or `[A  √λ I]` (wide). A dense [`oracle`]
//! module provides brute-force references for verification.
//!
//! The crate is `no_std` and only needs `alloc`. Timing is injected through
//! the [`sweep::Clock`] trait; file formats, parallel sweeps and the CLI live
//! in the `ridge-sketch` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dct;
pub mod decomp;
pub mod error;
pub mod generate;
pub mod lcurve;
pub mod lsqr;
pub mod matrix;
pub mod operator;
pub mod oracle;
pub mod precond;
pub mod problem;
pub mod sketch;
pub mod sweep;

pub use error::{Error, Result};
pub use generate::{generate_problem, GeneratedProblem, GeneratorSpec, Spectrum};
pub use lcurve::{lcurve, LCurve, LCurvePoint};
pub use lsqr::{lsqr, LsqrConfig, SolveReport, Termination};
pub use matrix::DenseMatrix;
pub use operator::{
    augmented_apply_over, augmented_apply_under, AugmentedForm, AugmentedOperator, LinearOperator,
};
pub use precond::{
    build_cholesky, build_gram, estimate_sd, exact_sd, lowrank_from_svd, CholeskyPreconditioner,
    GramSide, LowRankPreconditioner, Preconditioner, SvdSketch,
};
pub use problem::{Orientation, ProblemInstance, ProblemMeta};
pub use sketch::{sketch_left, sketch_right, Embedding, EmbeddingKind, EmbeddingSpec, SrttPlan};
pub use sweep::{
    run_sweep, Clock, DistinctSolution, LambdaRecord, Method, NoClock, PreparedSweep, SdSource, SketchChoice,
    SweepCounters, SweepRequest, SweepResult,
};
