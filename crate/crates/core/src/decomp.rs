//! Dense factorizations: Householder QR, upper Cholesky, triangular solves and
//! a one-sided Jacobi SVD (QR-preconditioned).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix};

/// Compact Householder QR of a tall matrix (`rows ≥ cols`).
///
/// Reflectors are stored below the diagonal with an implicit unit leading
/// entry, `R` occupies the upper triangle.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    factors: DenseMatrix,
    tau: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        assert!(m >= n, "Householder QR needs rows >= cols");
        let mut f = a.clone();
        let mut tau = vec![0.0; n];
        for k in 0..n {
            let (head, tail) = f.as_mut_slice().split_at_mut((k + 1) * m);
            let col = &mut head[k * m..];
            let x0 = col[k];
            let xnorm = norm2(&col[k + 1..]);
            if xnorm == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let beta = -libm::copysign(libm::hypot(x0, xnorm), x0);
            tau[k] = (beta - x0) / beta;
            let inv = 1.0 / (x0 - beta);
            for v in &mut col[k + 1..] {
                *v *= inv;
            }
            col[k] = beta;
            let v = &col[k..];
            for c in tail.chunks_exact_mut(m) {
                apply_reflector(v, tau[k], &mut c[k..]);
            }
        }
        Self { factors: f, tau }
    }

    pub fn rows(&self) -> usize {
        self.factors.rows()
    }

    pub fn cols(&self) -> usize {
        self.factors.cols()
    }

    /// The `cols × cols` upper-triangular factor.
    pub fn r(&self) -> DenseMatrix {
        let n = self.cols();
        DenseMatrix::from_fn(
            n,
            n,
            |i, j| if i <= j { self.factors.get(i, j) } else { 0.0 },
        )
    }

    /// Overwrites `x` (length `rows`) with `Q x`, where `Q` is the full
    /// orthogonal factor.
    pub fn apply_q(&self, x: &mut [f64]) {
        let m = self.rows();
        for k in (0..self.cols()).rev() {
            let v = &self.factors.as_slice()[k * m + k..(k + 1) * m];
            apply_reflector(v, self.tau[k], &mut x[k..]);
        }
    }

    /// Overwrites `x` with `Qᵀ x`.
    pub fn apply_qt(&self, x: &mut [f64]) {
        let m = self.rows();
        for k in 0..self.cols() {
            let v = &self.factors.as_slice()[k * m + k..(k + 1) * m];
            apply_reflector(v, self.tau[k], &mut x[k..]);
        }
    }

    /// The thin `rows × cols` orthonormal factor.
    pub fn thin_q(&self) -> DenseMatrix {
        let (m, n) = (self.rows(), self.cols());
        let mut q = DenseMatrix::zeros(m, n);
        for j in 0..n {
            let c = q.col_mut(j);
            c[j] = 1.0;
            self.apply_q(c);
        }
        q
    }
}

/// `x ← (I − τ v vᵀ) x` with `v[0]` treated as 1.
#[inline]
fn apply_reflector(v: &[f64], tau: f64, x: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let w = x[0] + dot(&v[1..], &x[1..]);
    let t = tau * w;
    x[0] -= t;
    axpy(-t, &v[1..], &mut x[1..]);
}

/// Upper-triangular `R` with `RᵀR = C`. No pivoting; a non-positive pivot is
/// reported as [`Error::IllConditioned`].
pub fn cholesky_upper(c: &DenseMatrix) -> Result<DenseMatrix> {
    let n = c.rows();
    if c.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "cholesky (square input)",
            expected: n,
            actual: c.cols(),
        });
    }
    let mut r = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let (ci, cj) = r.col_pair_mut(i, j);
            let s = c.get(i, j) - dot(&ci[..i], &cj[..i]);
            cj[i] = s / ci[i];
        }
        let cj = r.col_mut(j);
        let d = c.get(j, j) - dot(&cj[..j], &cj[..j]);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::IllConditioned { pivot: j });
        }
        cj[j] = libm::sqrt(d);
    }
    Ok(r)
}

/// Solves `R x = b` in place for upper-triangular `R`.
pub fn solve_upper_in_place(r: &DenseMatrix, x: &mut [f64]) {
    let n = r.rows();
    debug_assert_eq!(x.len(), n);
    for j in (0..n).rev() {
        let col = r.col(j);
        x[j] /= col[j];
        let xj = x[j];
        if xj != 0.0 {
            axpy(-xj, &col[..j], &mut x[..j]);
        }
    }
}

/// Solves `Rᵀ x = b` in place for upper-triangular `R`.
pub fn solve_upper_transpose_in_place(r: &DenseMatrix, x: &mut [f64]) {
    let n = r.rows();
    debug_assert_eq!(x.len(), n);
    for j in 0..n {
        let col = r.col(j);
        let s = dot(&col[..j], &x[..j]);
        x[j] = (x[j] - s) / col[j];
    }
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ` with
/// `k = min(rows, cols)` singular triplets sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Option<DenseMatrix>,
    pub sigma: Vec<f64>,
    pub v: Option<DenseMatrix>,
}

pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    svd(a, false, false).sigma
}

/// Computes the thin SVD. Requested factors always have orthonormal columns;
/// directions belonging to exactly zero singular values are completed to an
/// orthonormal basis.
pub fn svd(a: &DenseMatrix, want_u: bool, want_v: bool) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose(), want_v, want_u);
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    if n == 0 {
        return Svd {
            u: want_u.then(|| DenseMatrix::zeros(m, 0)),
            sigma: Vec::new(),
            v: want_v.then(|| DenseMatrix::zeros(0, 0)),
        };
    }
    let qr = HouseholderQr::new(a);
    let mut g = qr.r();
    let mut v = want_v.then(|| DenseMatrix::identity(n));
    jacobi_orthogonalize(&mut g, v.as_mut());

    let mut sigma: Vec<f64> = (0..n).map(|j| norm2(g.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    sigma = order.iter().map(|&j| sigma[j]).collect();

    let v = v.map(|v| DenseMatrix::from_fn(n, n, |i, j| v.get(i, order[j])));
    let u = want_u.then(|| {
        let mut u = DenseMatrix::zeros(m, n);
        let mut degenerate = Vec::new();
        for (jj, &j) in order.iter().enumerate() {
            let s = sigma[jj];
            let dst = u.col_mut(jj);
            if s > 0.0 && s.is_finite() {
                for (d, &gv) in dst[..n].iter_mut().zip(g.col(j)) {
                    *d = gv / s;
                }
                qr.apply_q(dst);
            } else {
                degenerate.push(jj);
            }
        }
        complete_orthonormal_columns(&mut u, &degenerate);
        u
    });
    Svd { u, sigma, v }
}

/// One-sided (Hestenes) Jacobi: rotates the columns of `g` until they are
/// mutually orthogonal, accumulating the rotations into `v` when given.
fn jacobi_orthogonalize(g: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>) {
    let n = g.cols();
    let tol = f64::EPSILON * (g.rows().max(1) as f64);
    let mut norms: Vec<f64> = (0..n).map(|j| dot(g.col(j), g.col(j))).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(g.col(p), g.col(q));
                if gamma.abs() <= tol * libm::sqrt(alpha) * libm::sqrt(beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                let (gp, gq) = g.col_pair_mut(p, q);
                rotate(gp, gq, c, s);
                norms[p] = dot(gp, gp);
                norms[q] = dot(gq, gq);
                if let Some(v) = v.as_deref_mut() {
                    let (vp, vq) = v.col_pair_mut(p, q);
                    rotate(vp, vq, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Replaces the listed columns of `u` with unit vectors orthogonal to every
/// other column.
fn complete_orthonormal_columns(u: &mut DenseMatrix, missing: &[usize]) {
    let m = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|j| !missing.contains(j)).collect();
    for &j in missing {
        let mut best = vec![0.0; m];
        let mut best_norm = -1.0;
        for e in 0..m {
            let mut cand = vec![0.0; m];
            cand[e] = 1.0;
            for _ in 0..2 {
                for &k in &filled {
                    let uk = u.col(k);
                    let h = dot(uk, &cand);
                    axpy(-h, uk, &mut cand);
                }
            }
            let nrm = norm2(&cand);
            if nrm > best_norm {
                best_norm = nrm;
                best = cand;
            }
            if nrm > 0.7 {
                break;
            }
        }
        let dst = u.col_mut(j);
        for (d, b) in dst.iter_mut().zip(&best) {
            *d = b / best_norm;
        }
        filled.push(j);
    }
}
