//! Dense reference computations for testing: direct regularized solves,
//! condition numbers of preconditioned operators, and the embedding quality
//! measures that appear in the convergence bounds.
//!
//! Everything here assembles dense matrices and is capped at
//! [`ORACLE_MAX_ENTRIES`] entries per dense workspace.

use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{singular_values, svd};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::operator::{
    check_len, AugmentedForm, AugmentedOperator, LeftPreconditioned, LinearOperator,
    RightPreconditioned,
};
use crate::precond::{exact_sd, Preconditioner};
use crate::problem::Orientation;

/// 2000² doubles.
pub const ORACLE_MAX_ENTRIES: usize = 2000 * 2000;

fn guard(rows: usize, cols: usize) -> Result<()> {
    if rows.saturating_mul(cols) > ORACLE_MAX_ENTRIES {
        Err(Error::OracleTooLarge { rows, cols })
    } else {
        Ok(())
    }
}

/// `x_λ = V diag(σ/(σ² + λ)) Uᵀ b`, the minimum-norm minimizer of
/// `‖Ax − b‖² + λ‖x‖²`. At `λ = 0` singular values below
/// `max(m, n)·u·σ₁` are treated as zero (pseudo-inverse).
pub fn direct_solve(a: &DenseMatrix, b: &[f64], lambda: f64) -> Result<Vec<f64>> {
    guard(a.rows(), a.cols())?;
    check_len("oracle right-hand side", a.rows(), b.len())?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("λ must be finite and nonnegative"));
    }
    let d = svd(a, true, true);
    let (u, v) = (d.u.expect("requested"), d.v.expect("requested"));
    let top = d.sigma.first().copied().unwrap_or(0.0);
    let cutoff = a.rows().max(a.cols()) as f64 * f64::EPSILON * top;
    let mut x = vec![0.0; a.cols()];
    for (j, &s) in d.sigma.iter().enumerate() {
        let w = if lambda == 0.0 {
            if s <= cutoff {
                continue;
            }
            1.0 / s
        } else {
            s / (s * s + lambda)
        };
        let coef = w * crate::matrix::dot(u.col(j), b);
        crate::matrix::axpy(coef, v.col(j), &mut x);
    }
    Ok(x)
}

/// Assembles any operator column by column.
pub fn assemble<O: LinearOperator + ?Sized>(op: &O) -> Result<DenseMatrix> {
    let (r, c) = (op.nrows(), op.ncols());
    guard(r, c)?;
    let mut out = DenseMatrix::zeros(r, c);
    let mut e = vec![0.0; c];
    for j in 0..c {
        e[j] = 1.0;
        op.apply_into(&e, out.col_mut(j));
        e[j] = 0.0;
    }
    Ok(out)
}

/// `σ_max / σ_min` over the `min(rows, cols)` singular values; `∞` if the
/// smallest is zero or anything is non-finite.
pub fn condition_number(m: &DenseMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 && hi.is_finite() => hi / lo,
        _ => f64::INFINITY,
    }
}

/// `κ₂(B R⁻¹)` for tall problems, `κ₂(R⁻ᵀ D)` for wide ones.
pub fn cond_preconditioned<P: Preconditioner + ?Sized>(
    a: &DenseMatrix,
    lambda: f64,
    p: &P,
    orientation: Orientation,
) -> Result<f64> {
    let dense = match orientation {
        Orientation::Overdetermined => {
            let op = AugmentedOperator::new(a, lambda, AugmentedForm::Stacked)?;
            assemble(&RightPreconditioned::new(&op, p)?)?
        }
        Orientation::Underdetermined => {
            let op = AugmentedOperator::new(a, lambda, AugmentedForm::SideBySide)?;
            assemble(&LeftPreconditioned::new(&op, p)?)?
        }
    };
    if dense.as_slice().iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(condition_number(&dense))
}

/// The orthonormal factor the embedding acts on: left singular vectors of a
/// tall `A`, right singular vectors of a wide one, together with `σ(A)`.
fn sketched_basis(a: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    match Orientation::of(a) {
        Orientation::Overdetermined => {
            let d = svd(a, true, false);
            (d.u.expect("requested"), d.sigma)
        }
        Orientation::Underdetermined => {
            let d = svd(a, false, true);
            (d.v.expect("requested"), d.sigma)
        }
    }
}

fn check_embedding(x: &DenseMatrix, a: &DenseMatrix) -> Result<()> {
    let ambient = match Orientation::of(a) {
        Orientation::Overdetermined => a.rows(),
        Orientation::Underdetermined => a.cols(),
    };
    check_len("embedding columns", ambient, x.cols())?;
    guard(x.rows(), x.cols())?;
    guard(a.rows(), a.cols())
}

/// `max(|σ_max(X U) − 1|, |1 − σ_min(X U)|)`, where `X` is the dense
/// `s × ambient` embedding (as from `Embedding::to_dense`) and `U` the
/// orthonormal basis it compresses. `ε ≥ 1` means the bound does not apply.
pub fn measure_epsilon_classic(x: &DenseMatrix, a: &DenseMatrix) -> Result<f64> {
    check_embedding(x, a)?;
    let (u, _) = sketched_basis(a);
    let s = singular_values(&x.matmul(&u));
    let hi = s.first().copied().unwrap_or(0.0);
    // A sketch with fewer rows than the basis has columns loses rank.
    let lo = if x.rows() < u.cols() {
        0.0
    } else {
        s.last().copied().unwrap_or(0.0)
    };
    Ok((hi - 1.0).abs().max((1.0 - lo).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatdimEpsilon {
    /// `‖Σ_λ UᵀXᵀX U Σ_λ − Σ_λ²‖₂` with `Σ_λ = Σ(Σ² + λI)^(-1/2)`.
    pub epsilon: f64,
    /// `‖U₁‖²_F`, from an independent SVD of the augmented matrix.
    pub u1_frobenius_sq: f64,
    /// `Σ σᵢ²/(σᵢ² + λ)`.
    pub sd: f64,
}

/// Squared Frobenius norm of the `A`-block of the augmented singular
/// vectors: the first `m` rows of the left singular vectors of `[A; √λI]`,
/// or the first `n` rows of the right singular vectors of `[A  √λI]`.
pub fn augmented_block_frobenius_sq(a: &DenseMatrix, lambda: f64) -> Result<f64> {
    let (m, n) = a.shape();
    let total = match Orientation::of(a) {
        Orientation::Overdetermined => {
            guard(m + n, n)?;
            let b = AugmentedOperator::new(a, lambda, AugmentedForm::Stacked)?.to_dense();
            let u = svd(&b, true, false).u.expect("requested");
            (0..n).map(|j| block_sq(&u.col(j)[..m])).sum()
        }
        Orientation::Underdetermined => {
            guard(m, n + m)?;
            let d = AugmentedOperator::new(a, lambda, AugmentedForm::SideBySide)?.to_dense();
            let v = svd(&d, false, true).v.expect("requested");
            (0..m).map(|j| block_sq(&v.col(j)[..n])).sum()
        }
    };
    Ok(total)
}

fn block_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// The embedding quality measure for the low-rank preconditioner. Also
/// checks `‖U₁‖²_F = sd_λ(A)` to `1e-10` and fails with
/// [`Error::IdentityViolated`] otherwise.
pub fn measure_epsilon_statdim(
    x: &DenseMatrix,
    a: &DenseMatrix,
    lambda: f64,
) -> Result<StatdimEpsilon> {
    check_embedding(x, a)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let (u, sigma) = sketched_basis(a);
    let weights: Vec<f64> = sigma
        .iter()
        .map(|&s| s / libm::sqrt(s * s + lambda))
        .collect();
    let mut xu = x.matmul(&u);
    for (j, &w) in weights.iter().enumerate() {
        crate::matrix::scale(w, xu.col_mut(j));
    }
    let mut g = xu.tr_matmul(&xu);
    for (j, &w) in weights.iter().enumerate() {
        g.set(j, j, g.get(j, j) - w * w);
    }
    let epsilon = singular_values(&g).first().copied().unwrap_or(0.0);

    let sd = exact_sd(&sigma, lambda)?;
    let u1_frobenius_sq = augmented_block_frobenius_sq(a, lambda)?;
    if (u1_frobenius_sq - sd).abs() > 1e-10 * sd.max(1.0) {
        return Err(Error::IdentityViolated {
            frobenius: u1_frobenius_sq,
            sd,
        });
    }
    Ok(StatdimEpsilon {
        epsilon,
        u1_frobenius_sq,
        sd,
    })
}

/// Iterations sufficient for LSQR to reduce the error by `tol` on an
/// operator with condition number `kappa`, plus a slack of 5.
pub fn iteration_bound(kappa: f64, tol: f64) -> usize {
    let rk = libm::sqrt(kappa);
    let rate = libm::log((rk + 1.0) / (rk - 1.0));
    if !(kappa > 1.0) || !rate.is_finite() || rate <= 0.0 {
        return 5;
    }
    libm::ceil(libm::log(1.0 / tol) / rate) as usize + 5
}
