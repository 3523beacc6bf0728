//! Synthetic test problems `b = A x + η` with a prescribed singular spectrum.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::decomp::HouseholderQr;
use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix};
use crate::problem::{ProblemInstance, ProblemMeta};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Spectrum {
    /// `min(m, n)` values spaced evenly in log scale from `max` down to `min`.
    ExpDecay { max: f64, min: f64 },
    /// Exactly `min(m, n)` nonnegative values, in any order.
    Explicit(Vec<f64>),
}

impl Spectrum {
    pub fn values(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            Self::ExpDecay { max, min } => {
                if !(*min > 0.0 && max >= min && max.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "spectrum needs sigma_max >= sigma_min > 0",
                    ));
                }
                if k == 1 {
                    return Ok(alloc::vec![*max]);
                }
                let (lmax, lmin) = (libm::log10(*max), libm::log10(*min));
                Ok((0..k)
                    .map(|i| {
                        let t = i as f64 / (k - 1) as f64;
                        libm::pow(10.0, lmax + t * (lmin - lmax))
                    })
                    .collect())
            }
            Self::Explicit(v) => {
                if v.len() != k {
                    return Err(Error::DimensionMismatch {
                        context: "explicit spectrum length",
                        expected: k,
                        actual: v.len(),
                    });
                }
                if v.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "singular values must be finite and nonnegative",
                    ));
                }
                Ok(v.clone())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::ExpDecay { max, min } => format!("exp_decay({max:e}, {min:e})"),
            Self::Explicit(v) => format!("explicit({} values)", v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub spectrum: Spectrum,
    /// `‖η‖₂`.
    pub noise_norm: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub problem: ProblemInstance,
    pub x_true: Vec<f64>,
    /// Singular values of `A` as constructed.
    pub sigma: Vec<f64>,
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DenseMatrix::from_col_major(rows, cols, data).expect("finite samples")
}

/// `A = Q₁ diag(σ) Q₂ᵀ` with `Q₁ ∈ R^{m×k}`, `Q₂ ∈ R^{n×k}` the orthonormal
/// factors of Gaussian matrices, `x ~ N(0, I)`, and `η = ‖η‖·g/‖g‖` with
/// `g ~ N(0, I)`. Random draws happen in the order `Q₁`, `Q₂`, `x`, `g`
/// from one ChaCha8 stream.
pub fn generate_problem(spec: &GeneratorSpec) -> Result<GeneratedProblem> {
    let (m, n) = (spec.m, spec.n);
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "problem dimensions must be positive",
        ));
    }
    if !(spec.noise_norm >= 0.0) || !spec.noise_norm.is_finite() {
        return Err(Error::InvalidArgument(
            "noise norm must be finite and nonnegative",
        ));
    }
    let k = m.min(n);
    let sigma = spec.spectrum.values(k)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q1 = HouseholderQr::new(&gaussian_matrix(&mut rng, m, k)).thin_q();
    let mut q2 = HouseholderQr::new(&gaussian_matrix(&mut rng, n, k)).thin_q();
    for (j, &s) in sigma.iter().enumerate() {
        crate::matrix::scale(s, q2.col_mut(j));
    }
    // A = Q₁ (Q₂ Σ)ᵀ
    let mut a = DenseMatrix::zeros(m, n);
    for j in 0..n {
        let col = a.col_mut(j);
        for p in 0..k {
            let w = q2.get(j, p);
            if w != 0.0 {
                crate::matrix::axpy(w, q1.col(p), col);
            }
        }
    }

    let x_true: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut b = a.matvec(&x_true);
    let gn = norm2(&g);
    if spec.noise_norm > 0.0 && gn > 0.0 {
        crate::matrix::axpy(spec.noise_norm / gn, &g, &mut b);
    }

    let meta = ProblemMeta {
        seed: Some(spec.seed),
        spectrum: Some(spec.spectrum.describe()),
        noise_norm: Some(spec.noise_norm),
    };
    let problem = ProblemInstance::new(a, b)?.with_meta(meta);
    let mut sorted = sigma;
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(GeneratedProblem {
        problem,
        x_true,
        sigma: sorted,
    })
}
