//! LSQR (Paige & Saunders) on an abstract [`LinearOperator`].
//!
//! The iteration starts from `x₀ = 0`, so every iterate lies in
//! `range(Opᵀ)`; for consistent systems the limit is the minimum-norm
//! solution.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::error::Result;
use crate::matrix::{norm2, scale};
use crate::operator::{check_len, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LsqrConfig {
    /// Drives both the `atol` and `btol` stopping tests.
    pub rel_tolerance: f64,
    /// `None` means `4·min(rows, cols)` of the operator.
    pub max_iterations: Option<usize>,
    pub record_history: bool,
}

impl Default for LsqrConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-6,
            max_iterations: None,
            record_history: false,
        }
    }
}

impl LsqrConfig {
    pub fn with_tolerance(rel_tolerance: f64) -> Self {
        Self {
            rel_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(crate::Error::InvalidArgument(
                "LSQR tolerance must lie in (0, 1)",
            ));
        }
        if self.max_iterations == Some(0) {
            return Err(crate::Error::InvalidArgument(
                "LSQR needs at least one iteration",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    Converged,
    MaxIterations,
    /// A NaN or infinity appeared in the recurrence.
    Breakdown,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖Op·x_k − rhs‖` estimates for `k = 0..=iterations`, when requested.
    pub residual_history: Option<Vec<f64>>,
    pub termination: Termination,
    /// Filled in by callers that have a clock.
    pub wall_time: Option<Duration>,
}

/// Minimizes `‖Op·y − rhs‖₂` starting from `y = 0`.
pub fn lsqr<O: LinearOperator + ?Sized>(
    op: &O,
    rhs: &[f64],
    cfg: &LsqrConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let (m, n) = (op.nrows(), op.ncols());
    check_len("LSQR right-hand side", m, rhs.len())?;
    let max_iter = cfg.max_iterations.unwrap_or(4 * m.min(n)).max(1);
    let tol = cfg.rel_tolerance;

    let mut x = vec![0.0; n];
    let mut history = cfg.record_history.then(Vec::new);
    let report = |iterations, termination, history: Option<Vec<f64>>| SolveReport {
        iterations,
        residual_history: history,
        termination,
        wall_time: None,
    };

    let mut u = rhs.to_vec();
    let mut beta = norm2(&u);
    let bnorm = beta;
    if let Some(h) = history.as_mut() {
        h.push(beta);
    }
    if !beta.is_finite() {
        return Ok((x, report(0, Termination::Breakdown, history)));
    }
    if beta == 0.0 {
        return Ok((x, report(0, Termination::Converged, history)));
    }
    scale(1.0 / beta, &mut u);

    let mut v = vec![0.0; n];
    op.apply_adjoint_into(&u, &mut v);
    let mut alpha = norm2(&v);
    if !alpha.is_finite() {
        return Ok((x, report(0, Termination::Breakdown, history)));
    }
    if alpha == 0.0 {
        // rhs ⟂ range(Op): x = 0 is already a least-squares solution.
        return Ok((x, report(0, Termination::Converged, history)));
    }
    scale(1.0 / alpha, &mut v);

    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm_sq = 0.0;
    let mut av = vec![0.0; m];
    let mut atu = vec![0.0; n];

    for itn in 1..=max_iter {
        // Continue the bidiagonalization.
        op.apply_into(&v, &mut av);
        for (ui, &a) in u.iter_mut().zip(&av) {
            *ui = a - alpha * *ui;
        }
        beta = norm2(&u);
        anorm_sq += alpha * alpha + beta * beta;
        if beta > 0.0 {
            scale(1.0 / beta, &mut u);
            op.apply_adjoint_into(&u, &mut atu);
            for (vi, &a) in v.iter_mut().zip(&atu) {
                *vi = a - beta * *vi;
            }
            alpha = norm2(&v);
            if alpha > 0.0 {
                scale(1.0 / alpha, &mut v);
            }
        } else {
            alpha = 0.0;
        }

        // Plane rotation eliminating the subdiagonal of the bidiagonal matrix.
        let rho = libm::hypot(rhobar, beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        for ((xi, wi), &vi) in x.iter_mut().zip(w.iter_mut()).zip(&v) {
            *xi += t1 * *wi;
            *wi = vi + t2 * *wi;
        }

        if let Some(h) = history.as_mut() {
            h.push(phibar);
        }
        if !(phibar.is_finite() && alpha.is_finite() && beta.is_finite() && t1.is_finite()) {
            return Ok((x, report(itn, Termination::Breakdown, history)));
        }

        // Paige–Saunders stopping tests with atol = btol = tol.
        let anorm = libm::sqrt(anorm_sq);
        let xnorm = norm2(&x);
        let rnorm = phibar;
        let arnorm = alpha * c.abs() * phibar;
        let test1 = rnorm / bnorm;
        let test2 = if rnorm > 0.0 && anorm > 0.0 {
            arnorm / (anorm * rnorm)
        } else {
            0.0
        };
        let rtol = tol + tol * anorm * xnorm / bnorm;
        let test1_scaled = test1 / (1.0 + anorm * xnorm / bnorm);
        if test1 <= rtol || test2 <= tol || 1.0 + test1_scaled <= 1.0 || 1.0 + test2 <= 1.0 {
            return Ok((x, report(itn, Termination::Converged, history)));
        }
    }
    Ok((x, report(max_iter, Termination::MaxIterations, history)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    #[test]
    fn identity_converges_immediately() {
        let op = DenseMatrix::identity(5);
        let rhs = [1.0, -2.0, 3.0, 0.5, 4.0];
        let (x, rep) = lsqr(&op, &rhs, &LsqrConfig::with_tolerance(1e-12)).unwrap();
        assert!(rep.iterations <= 2);
        assert_eq!(rep.termination, Termination::Converged);
        for (a, b) in x.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_system() {
        let op = DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let (x, _) = lsqr(&op, &[1.0, 2.0, 3.0], &LsqrConfig::with_tolerance(1e-12)).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let op = DenseMatrix::identity(3);
        let (x, rep) = lsqr(&op, &[0.0; 3], &LsqrConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn non_finite_rhs_is_breakdown() {
        let op = DenseMatrix::identity(2);
        let (_, rep) = lsqr(&op, &[f64::NAN, 1.0], &LsqrConfig::default()).unwrap();
        assert_eq!(rep.termination, Termination::Breakdown);
    }

    #[test]
    fn max_iterations_is_respected() {
        let op = DenseMatrix::from_fn(30, 10, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let rhs: Vec<f64> = (0..30).map(|i| libm::sin(i as f64)).collect();
        let cfg = LsqrConfig {
            rel_tolerance: 1e-15,
            max_iterations: Some(3),
            record_history: true,
        };
        let (_, rep) = lsqr(&op, &rhs, &cfg).unwrap();
        assert_eq!(rep.iterations, 3);
        assert_eq!(rep.termination, Termination::MaxIterations);
        assert_eq!(rep.residual_history.unwrap().len(), 4);
    }

    #[test]
    fn bad_config_and_dims() {
        let op = DenseMatrix::identity(2);
        assert!(lsqr(&op, &[1.0], &LsqrConfig::default()).is_err());
        assert!(lsqr(&op, &[1.0, 1.0], &LsqrConfig::with_tolerance(0.0)).is_err());
        let cfg = LsqrConfig {
            max_iterations: Some(0),
            ..LsqrConfig::default()
        };
        assert!(lsqr(&op, &[1.0, 1.0], &cfg).is_err());
    }
}
