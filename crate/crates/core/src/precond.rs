//! Preconditioners built from a sketch `Y` of `A`.
//!
//! Both families satisfy `RᵀR = G + λI`, where `G` is the sketched Gram
//! matrix (`YᵀY` for tall problems, `YYᵀ` for wide ones):
//!
//! * [`CholeskyPreconditioner`] stores the upper-triangular Cholesky factor
//!   and costs `O(k²)` per application (`k = min(m, n)`).
//! * [`LowRankPreconditioner`] stores only the leading singular vectors `W`
//!   of the sketch and a diagonal `S`, and applies
//!   `R⁻¹ = λ^(-1/2)(I − W S Wᵀ)` in `O(k·rank)`. The symmetric factor
//!   `R = √λ(W F Wᵀ + I)` with `F = (I + Σ²/λ)^(1/2) − I` is never formed.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{
    cholesky_upper, solve_upper_in_place, solve_upper_transpose_in_place, svd, HouseholderQr,
};
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, DenseMatrix};
use crate::operator::check_len;

/// A square preconditioner `R` of dimension [`Preconditioner::dim`] that can
/// apply `R⁻¹` and `R⁻ᵀ`.
pub trait Preconditioner {
    fn dim(&self) -> usize;

    /// Overwrites `x` with `R⁻¹ x`, or with `R⁻ᵀ x` when `adjoint` is set.
    fn apply_inverse_in_place(&self, x: &mut [f64], adjoint: bool);
}

/// Checked, allocating form of [`Preconditioner::apply_inverse_in_place`].
pub fn apply_inverse<P: Preconditioner + ?Sized>(
    p: &P,
    x: &[f64],
    adjoint: bool,
) -> Result<Vec<f64>> {
    check_len("preconditioner input", p.dim(), x.len())?;
    let mut out = x.to_vec();
    p.apply_inverse_in_place(&mut out, adjoint);
    Ok(out)
}

/// The identity, for unpreconditioned solves.
#[derive(Debug, Clone, Copy)]
pub struct IdentityPreconditioner(pub usize);

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_inverse_in_place(&self, _x: &mut [f64], _adjoint: bool) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSide {
    /// `C = YᵀY`, for a left sketch `Y = XA` of a tall matrix.
    Left,
    /// `C = YYᵀ`, for a right sketch `Y = AX` of a wide matrix.
    Right,
}

/// The Gram matrix of a sketch. Only one triangle is computed and mirrored,
/// so the result is exactly symmetric.
pub fn build_gram(y: &DenseMatrix, side: GramSide) -> DenseMatrix {
    let owned;
    let y = match side {
        GramSide::Left => y,
        GramSide::Right => {
            owned = y.transpose();
            &owned
        }
    };
    let k = y.cols();
    let mut c = DenseMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            let v = dot(y.col(i), y.col(j));
            c.set(i, j, v);
            c.set(j, i, v);
        }
    }
    c
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLambda(lambda))
    }
}

/// Upper-triangular `R` with positive diagonal and `RᵀR = C + λI`.
#[derive(Debug, Clone)]
pub struct CholeskyPreconditioner {
    r: DenseMatrix,
    lambda: f64,
}

impl CholeskyPreconditioner {
    /// Cholesky factor of the partly exact sketched Gram matrix `C + λI`.
    pub fn build(c: &DenseMatrix, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let mut shifted = c.clone();
        shifted.add_to_diagonal(lambda);
        let r = cholesky_upper(&shifted)?;
        Ok(Self { r, lambda })
    }

    /// The `R` factor of a Householder QR of the stacked sketch `[Y; √λ I]`,
    /// with rows flipped so the diagonal is positive.
    pub fn from_stacked_qr(y: &DenseMatrix, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let (s, n) = y.shape();
        let sl = libm::sqrt(lambda);
        let stacked = DenseMatrix::from_fn(s + n, n, |i, j| {
            if i < s {
                y.get(i, j)
            } else if i - s == j {
                sl
            } else {
                0.0
            }
        });
        let mut r = HouseholderQr::new(&stacked).r();
        for i in 0..n {
            let d = r.get(i, i);
            if d == 0.0 {
                return Err(Error::SingularPreconditioner { index: i });
            }
            if d < 0.0 {
                for j in i..n {
                    r.set(i, j, -r.get(i, j));
                }
            }
        }
        Ok(Self { r, lambda })
    }

    /// Wraps an existing upper-triangular factor.
    pub fn from_factor(r: DenseMatrix, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if r.rows() != r.cols() {
            return Err(Error::InvalidArgument(
                "preconditioner factor must be square",
            ));
        }
        for i in 0..r.rows() {
            if r.get(i, i) == 0.0 {
                return Err(Error::SingularPreconditioner { index: i });
            }
        }
        Ok(Self { r, lambda })
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Preconditioner for CholeskyPreconditioner {
    fn dim(&self) -> usize {
        self.r.rows()
    }

    fn apply_inverse_in_place(&self, x: &mut [f64], adjoint: bool) {
        if adjoint {
            solve_upper_transpose_in_place(&self.r, x);
        } else {
            solve_upper_in_place(&self.r, x);
        }
    }
}

/// Free-function form of [`CholeskyPreconditioner::build`].
pub fn build_cholesky(c: &DenseMatrix, lambda: f64) -> Result<CholeskyPreconditioner> {
    CholeskyPreconditioner::build(c, lambda)
}

/// Singular values of a sketch and the singular vectors that live in the
/// preconditioned space: right vectors `V` (`n × k`) of a left sketch, left
/// vectors `U` (`m × k`) of a right sketch.
#[derive(Debug, Clone)]
pub struct SvdSketch {
    sigma: Vec<f64>,
    basis: Arc<DenseMatrix>,
}

impl SvdSketch {
    pub fn from_sketch(y: &DenseMatrix, side: GramSide) -> Self {
        match side {
            GramSide::Left => {
                let d = svd(y, false, true);
                Self {
                    sigma: d.sigma,
                    basis: Arc::new(d.v.expect("requested")),
                }
            }
            GramSide::Right => {
                let d = svd(y, true, false);
                Self {
                    sigma: d.sigma,
                    basis: Arc::new(d.u.expect("requested")),
                }
            }
        }
    }

    /// From precomputed factors; `sigma` must be nonincreasing and nonnegative.
    pub fn from_parts(sigma: Vec<f64>, basis: DenseMatrix) -> Result<Self> {
        if sigma.len() != basis.cols() {
            return Err(Error::DimensionMismatch {
                context: "singular values vs basis columns",
                expected: basis.cols(),
                actual: sigma.len(),
            });
        }
        if sigma.iter().any(|s| !(*s >= 0.0)) || sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "singular values must be nonnegative and nonincreasing",
            ));
        }
        Ok(Self {
            sigma,
            basis: Arc::new(basis),
        })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn rank_capacity(&self) -> usize {
        self.sigma.len()
    }

    /// Dimension of the space the preconditioner acts on.
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }
}

/// `R⁻¹ = λ^(-1/2)(I − W S Wᵀ)` with `W` the leading `rank` columns of a
/// shared sketch basis.
#[derive(Debug, Clone)]
pub struct LowRankPreconditioner {
    basis: Arc<DenseMatrix>,
    rank: usize,
    shrink: Vec<f64>,
    sigma: Vec<f64>,
    lambda: f64,
}

/// `1 − 1/√(1 + r)`, evaluated without cancellation for small `r`.
fn shrinkage(ratio: f64) -> f64 {
    let root = libm::sqrt(1.0 + ratio);
    ratio / (root * (1.0 + root))
}

impl LowRankPreconditioner {
    pub fn from_svd(svd: &SvdSketch, lambda: f64, rank: usize) -> Result<Self> {
        check_lambda(lambda)?;
        if rank == 0 || rank > svd.rank_capacity() {
            return Err(Error::InvalidTruncation {
                rank,
                available: svd.rank_capacity(),
            });
        }
        let top = svd.sigma.first().copied().unwrap_or(0.0);
        let floor = f64::EPSILON * top;
        let sigma = svd.sigma[..rank].to_vec();
        let shrink = sigma
            .iter()
            .map(|&s| {
                if s > floor && s > 0.0 {
                    shrinkage(s * s / lambda)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            basis: Arc::clone(&svd.basis),
            rank,
            shrink,
            sigma,
            lambda,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Diagonal of `S`, each entry in `[0, 1)`.
    pub fn shrinkage(&self) -> &[f64] {
        &self.shrink
    }

    /// Column `j < rank` of `W`.
    pub fn basis_column(&self, j: usize) -> &[f64] {
        assert!(j < self.rank);
        self.basis.col(j)
    }

    /// Applies `R⁻¹` and adds the floating-point operations performed to
    /// `flops`.
    pub fn apply_inverse_counted(&self, x: &mut [f64], flops: &mut u64) {
        self.apply_impl(x, Some(flops));
    }

    fn apply_impl(&self, x: &mut [f64], mut flops: Option<&mut u64>) {
        let dim = self.basis.rows();
        debug_assert_eq!(x.len(), dim);
        let mut tally = |n: usize| {
            if let Some(f) = flops.as_deref_mut() {
                *f += n as u64;
            }
        };
        let mut coeffs = vec![0.0; self.rank];
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = self.shrink[j] * dot(self.basis.col(j), x);
            tally(2 * dim + 1);
        }
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                axpy(-c, self.basis.col(j), x);
            }
            tally(2 * dim);
        }
        let scale = 1.0 / libm::sqrt(self.lambda);
        for v in x.iter_mut() {
            *v *= scale;
        }
        tally(dim);
    }

    /// Dense `R = √λ(W F Wᵀ + I)`, for verification.
    pub fn to_dense_factor(&self) -> DenseMatrix {
        let dim = self.basis.rows();
        let mut r = DenseMatrix::identity(dim);
        for j in 0..self.rank {
            let f = if self.shrink[j] == 0.0 {
                0.0
            } else {
                libm::sqrt(1.0 + self.sigma[j] * self.sigma[j] / self.lambda) - 1.0
            };
            let w = self.basis.col(j);
            for c in 0..dim {
                let fw = f * w[c];
                if fw != 0.0 {
                    axpy(fw, w, r.col_mut(c));
                }
            }
        }
        r.scale_in_place(libm::sqrt(self.lambda));
        r
    }

    /// Dense `R⁻¹ = λ^(-1/2)(I − W S Wᵀ)`, for verification.
    pub fn to_dense_inverse(&self) -> DenseMatrix {
        let dim = self.basis.rows();
        let mut r = DenseMatrix::identity(dim);
        for j in 0..self.rank {
            let w = self.basis.col(j);
            for c in 0..dim {
                let sw = self.shrink[j] * w[c];
                if sw != 0.0 {
                    axpy(-sw, w, r.col_mut(c));
                }
            }
        }
        r.scale_in_place(1.0 / libm::sqrt(self.lambda));
        r
    }
}

impl Preconditioner for LowRankPreconditioner {
    fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Self-adjoint, so `adjoint` is ignored.
    fn apply_inverse_in_place(&self, x: &mut [f64], _adjoint: bool) {
        self.apply_impl(x, None);
    }
}

/// Free-function form of [`LowRankPreconditioner::from_svd`].
pub fn lowrank_from_svd(
    svd: &SvdSketch,
    lambda: f64,
    rank: usize,
) -> Result<LowRankPreconditioner> {
    LowRankPreconditioner::from_svd(svd, lambda, rank)
}

/// `Σ σᵢ² / (σᵢ² + λ)`; zero singular values contribute nothing.
fn statistical_dimension(sigma: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("λ must be finite and nonnegative"));
    }
    let mut sd = 0.0;
    for &s in sigma {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(
                "singular values must be finite and nonnegative",
            ));
        }
        if s > 0.0 {
            let s2 = s * s;
            sd += s2 / (s2 + lambda);
        }
    }
    Ok(sd)
}

/// Statistical-dimension estimate from the singular values of a sketch.
pub fn estimate_sd(sketch_sigma: &[f64], lambda: f64) -> Result<f64> {
    statistical_dimension(sketch_sigma, lambda)
}

/// Exact statistical dimension from all nonzero singular values of `A`.
pub fn exact_sd(sigma: &[f64], lambda: f64) -> Result<f64> {
    statistical_dimension(sigma, lambda)
}
