//! Matrix-free linear operators: the augmented forms `B = [A; √λ I]` and
//! `D = [A  √λ I]`, and their right/left preconditioned compositions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy, DenseMatrix};
use crate::precond::Preconditioner;

/// A real linear map `R^ncols → R^nrows` with an adjoint.
///
/// Implementations must satisfy `⟨A v, u⟩ = ⟨v, Aᵀ u⟩`. The `*_into`
/// methods assume correctly sized buffers; [`LinearOperator::apply`] and
/// [`LinearOperator::apply_adjoint`] check dimensions.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `out = A v`.
    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    /// `out = Aᵀ u`.
    fn apply_adjoint_into(&self, u: &[f64], out: &mut [f64]);

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("operator input", self.ncols(), v.len())?;
        let mut out = vec![0.0; self.nrows()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    fn apply_adjoint(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("operator adjoint input", self.nrows(), u.len())?;
        let mut out = vec![0.0; self.ncols()];
        self.apply_adjoint_into(u, &mut out);
        Ok(out)
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.matvec_into(v, out);
    }

    fn apply_adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        self.tr_matvec_into(u, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AugmentedForm {
    /// `B = [A; √λ I_n]`, mapping `R^n → R^(m+n)`.
    Stacked,
    /// `D = [A  √λ I_m]`, mapping `R^(n+m) → R^m`.
    SideBySide,
}

/// The regularized operator `B` or `D`, never materialized.
#[derive(Debug, Clone, Copy)]
pub struct AugmentedOperator<'a> {
    a: &'a DenseMatrix,
    sqrt_lambda: f64,
    form: AugmentedForm,
}

impl<'a> AugmentedOperator<'a> {
    pub fn new(a: &'a DenseMatrix, lambda: f64, form: AugmentedForm) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("λ must be finite and nonnegative"));
        }
        Ok(Self {
            a,
            sqrt_lambda: libm::sqrt(lambda),
            form,
        })
    }

    pub fn form(&self) -> AugmentedForm {
        self.form
    }

    pub fn matrix(&self) -> &'a DenseMatrix {
        self.a
    }

    /// Dense assembly, for the oracle and tests only.
    pub fn to_dense(&self) -> DenseMatrix {
        let (m, n) = self.a.shape();
        let s = self.sqrt_lambda;
        match self.form {
            AugmentedForm::Stacked => DenseMatrix::from_fn(m + n, n, |i, j| {
                if i < m {
                    self.a.get(i, j)
                } else if i - m == j {
                    s
                } else {
                    0.0
                }
            }),
            AugmentedForm::SideBySide => DenseMatrix::from_fn(m, n + m, |i, j| {
                if j < n {
                    self.a.get(i, j)
                } else if j - n == i {
                    s
                } else {
                    0.0
                }
            }),
        }
    }
}

impl LinearOperator for AugmentedOperator<'_> {
    fn nrows(&self) -> usize {
        let (m, n) = self.a.shape();
        match self.form {
            AugmentedForm::Stacked => m + n,
            AugmentedForm::SideBySide => m,
        }
    }

    fn ncols(&self) -> usize {
        let (m, n) = self.a.shape();
        match self.form {
            AugmentedForm::Stacked => n,
            AugmentedForm::SideBySide => n + m,
        }
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let (m, n) = self.a.shape();
        let s = self.sqrt_lambda;
        match self.form {
            AugmentedForm::Stacked => {
                let (top, bottom) = out.split_at_mut(m);
                self.a.matvec_into(v, top);
                for (o, &x) in bottom.iter_mut().zip(v) {
                    *o = s * x;
                }
            }
            AugmentedForm::SideBySide => {
                let (x, y) = v.split_at(n);
                self.a.matvec_into(x, out);
                axpy(s, y, out);
            }
        }
        debug_assert_eq!(
            out.len(),
            if self.form == AugmentedForm::Stacked {
                m + n
            } else {
                m
            }
        );
    }

    fn apply_adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        let m = self.a.rows();
        let s = self.sqrt_lambda;
        match self.form {
            AugmentedForm::Stacked => {
                let (top, bottom) = u.split_at(m);
                self.a.tr_matvec_into(top, out);
                axpy(s, bottom, out);
            }
            AugmentedForm::SideBySide => {
                let n = self.a.cols();
                let (x, y) = out.split_at_mut(n);
                self.a.tr_matvec_into(u, x);
                for (o, &ui) in y.iter_mut().zip(u) {
                    *o = s * ui;
                }
            }
        }
    }
}

/// Applies `B = [A; √λ I]` (or its adjoint) to `v`.
pub fn augmented_apply_over(
    a: &DenseMatrix,
    lambda: f64,
    v: &[f64],
    adjoint: bool,
) -> Result<Vec<f64>> {
    let op = AugmentedOperator::new(a, lambda, AugmentedForm::Stacked)?;
    if adjoint {
        op.apply_adjoint(v)
    } else {
        op.apply(v)
    }
}

/// Applies `D = [A  √λ I]` (or its adjoint) to `v`.
pub fn augmented_apply_under(
    a: &DenseMatrix,
    lambda: f64,
    v: &[f64],
    adjoint: bool,
) -> Result<Vec<f64>> {
    let op = AugmentedOperator::new(a, lambda, AugmentedForm::SideBySide)?;
    if adjoint {
        op.apply_adjoint(v)
    } else {
        op.apply(v)
    }
}

/// `v ↦ Op (R⁻¹ v)`; the solution of the original problem is `R⁻¹ y`.
pub struct RightPreconditioned<'a, O: ?Sized, P: ?Sized> {
    op: &'a O,
    precond: &'a P,
}

impl<'a, O, P> RightPreconditioned<'a, O, P>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    pub fn new(op: &'a O, precond: &'a P) -> Result<Self> {
        check_len("right preconditioner", op.ncols(), precond.dim())?;
        Ok(Self { op, precond })
    }
}

impl<O, P> LinearOperator for RightPreconditioned<'_, O, P>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    fn nrows(&self) -> usize {
        self.op.nrows()
    }

    fn ncols(&self) -> usize {
        self.op.ncols()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let mut w = v.to_vec();
        self.precond.apply_inverse_in_place(&mut w, false);
        self.op.apply_into(&w, out);
    }

    fn apply_adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        self.op.apply_adjoint_into(u, out);
        self.precond.apply_inverse_in_place(out, true);
    }
}

/// `u ↦ R⁻ᵀ (Op u)`, used with right-hand side `R⁻ᵀ b`.
pub struct LeftPreconditioned<'a, O: ?Sized, P: ?Sized> {
    op: &'a O,
    precond: &'a P,
}

impl<'a, O, P> LeftPreconditioned<'a, O, P>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    pub fn new(op: &'a O, precond: &'a P) -> Result<Self> {
        check_len("left preconditioner", op.nrows(), precond.dim())?;
        Ok(Self { op, precond })
    }
}

impl<O, P> LinearOperator for LeftPreconditioned<'_, O, P>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    fn nrows(&self) -> usize {
        self.op.nrows()
    }

    fn ncols(&self) -> usize {
        self.op.ncols()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.op.apply_into(v, out);
        self.precond.apply_inverse_in_place(out, true);
    }

    fn apply_adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        let mut w = u.to_vec();
        self.precond.apply_inverse_in_place(&mut w, false);
        self.op.apply_adjoint_into(&w, out);
    }
}
