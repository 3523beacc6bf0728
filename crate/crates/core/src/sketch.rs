//! Random embeddings `X` and their application as left (`XA`) or right (`AX`)
//! sketches.
//!
//! Every embedding is a pure function of `(kind, s, seed, ambient dimension)`.
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! which is portable across platforms; Gaussian entries use the
//! `rand_distr::StandardNormal` ziggurat sampler on that stream.
//!
//! A right sketch with embedding spec `e` on a matrix with `n` columns uses
//! `X_right = X_leftᵀ`, where `X_left` is the left embedding drawn for ambient
//! dimension `n` with the same spec. Hence `A X_right = (X_left Aᵀ)ᵀ`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dct::{DctPlan, DctScratch};
use crate::error::{Error, Result};
use crate::matrix::{axpy, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EmbeddingKind {
    /// i.i.d. `N(0, 1/s)` entries.
    Gaussian,
    /// Subsampled randomized DCT, `√(m/s)·S·F·D`.
    Srtt,
    /// Count-sketch: one `±1` per column in a uniformly chosen row.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmbeddingSpec {
    pub kind: EmbeddingKind,
    /// Sketch dimension.
    pub s: usize,
    pub seed: u64,
}

impl EmbeddingSpec {
    pub fn new(kind: EmbeddingKind, s: usize, seed: u64) -> Self {
        Self { kind, s, seed }
    }

    fn check(&self, ambient: usize) -> Result<()> {
        if self.s == 0 || self.s > ambient {
            Err(Error::InvalidSketch { s: self.s, ambient })
        } else {
            Ok(())
        }
    }
}

/// Row sample, signs and scale of an SRTT `X = √(m/s)·S·F·D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SrttPlan {
    indices: Vec<usize>,
    signs: Vec<f64>,
    scale: f64,
}

impl SrttPlan {
    /// Builds a plan from explicit row indices and `±1` signs; the ambient
    /// dimension is `signs.len()`.
    pub fn new(indices: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        let m = signs.len();
        let s = indices.len();
        if s == 0 || s > m {
            return Err(Error::InvalidSketch { s, ambient: m });
        }
        if signs.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidArgument("SRTT signs must be ±1"));
        }
        let mut seen = vec![false; m];
        for &i in &indices {
            if i >= m || seen[i] {
                return Err(Error::InvalidArgument(
                    "SRTT row indices must be distinct and below the ambient dimension",
                ));
            }
            seen[i] = true;
        }
        Ok(Self {
            indices,
            signs,
            scale: libm::sqrt(m as f64 / s as f64),
        })
    }

    /// Draws `m` signs, then `s` rows without replacement (partial
    /// Fisher–Yates), from `rng`.
    fn draw(s: usize, m: usize, rng: &mut ChaCha8Rng) -> Self {
        let signs: Vec<f64> = (0..m)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let mut perm: Vec<usize> = (0..m).collect();
        for i in 0..s {
            let j = i + rng.random_range(0..(m - i) as u64) as usize;
            perm.swap(i, j);
        }
        perm.truncate(s);
        Self {
            indices: perm,
            signs,
            scale: libm::sqrt(m as f64 / s as f64),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sketch_dim(&self) -> usize {
        self.indices.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.signs.len()
    }

    /// `√(m/s)·(rows of DCT(D·M) at the sampled indices)`, `O(mn log m)`.
    pub fn apply(&self, mat: &DenseMatrix) -> Result<DenseMatrix> {
        let plan = DctPlan::new(self.ambient_dim());
        self.apply_with(&plan, mat)
    }

    fn apply_with(&self, plan: &DctPlan, mat: &DenseMatrix) -> Result<DenseMatrix> {
        let m = self.ambient_dim();
        if mat.rows() != m {
            return Err(Error::DimensionMismatch {
                context: "SRTT input rows",
                expected: m,
                actual: mat.rows(),
            });
        }
        let s = self.sketch_dim();
        let mut out = DenseMatrix::zeros(s, mat.cols());
        let mut col = vec![0.0; m];
        let mut scratch = DctScratch::default();
        for j in 0..mat.cols() {
            for ((c, &v), &d) in col.iter_mut().zip(mat.col(j)).zip(&self.signs) {
                *c = v * d;
            }
            plan.transform_with(&mut col, &mut scratch.buf, &mut scratch.work);
            for (o, &i) in out.col_mut(j).iter_mut().zip(&self.indices) {
                *o = self.scale * col[i];
            }
        }
        Ok(out)
    }

    /// The explicit `s × m` matrix, for oracles.
    pub fn to_dense(&self) -> DenseMatrix {
        let m = self.ambient_dim();
        let plan = DctPlan::new(m);
        let mut out = DenseMatrix::zeros(self.sketch_dim(), m);
        let mut e = vec![0.0; m];
        for j in 0..m {
            e.fill(0.0);
            e[j] = self.signs[j];
            plan.transform(&mut e);
            for (o, &i) in out.col_mut(j).iter_mut().zip(&self.indices) {
                *o = self.scale * e[i];
            }
        }
        out
    }
}

/// A drawn embedding `X ∈ R^{s×m}` for a fixed ambient dimension `m`.
#[derive(Debug, Clone)]
pub struct Embedding {
    spec: EmbeddingSpec,
    ambient: usize,
    state: EmbeddingState,
}

#[derive(Debug, Clone)]
enum EmbeddingState {
    /// Entries are regenerated from the seed in column-major order, so `X` is
    /// never stored.
    Gaussian,
    Srtt(SrttPlan, DctPlan),
    Sparse {
        rows: Vec<usize>,
        signs: Vec<f64>,
    },
}

const GAUSSIAN_BLOCK: usize = 64;

impl Embedding {
    pub fn draw(spec: EmbeddingSpec, ambient: usize) -> Result<Self> {
        spec.check(ambient)?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let state = match spec.kind {
            EmbeddingKind::Gaussian => EmbeddingState::Gaussian,
            EmbeddingKind::Srtt => EmbeddingState::Srtt(
                SrttPlan::draw(spec.s, ambient, &mut rng),
                DctPlan::new(ambient),
            ),
            EmbeddingKind::Sparse => {
                let mut rows = Vec::with_capacity(ambient);
                let mut signs = Vec::with_capacity(ambient);
                for _ in 0..ambient {
                    rows.push(rng.random_range(0..spec.s as u64) as usize);
                    signs.push(if rng.random::<bool>() { 1.0 } else { -1.0 });
                }
                EmbeddingState::Sparse { rows, signs }
            }
        };
        Ok(Self {
            spec,
            ambient,
            state,
        })
    }

    pub fn spec(&self) -> EmbeddingSpec {
        self.spec
    }

    pub fn sketch_dim(&self) -> usize {
        self.spec.s
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn srtt_plan(&self) -> Option<&SrttPlan> {
        match &self.state {
            EmbeddingState::Srtt(p, _) => Some(p),
            _ => None,
        }
    }

    /// `X A` for `A` with `ambient` rows.
    pub fn apply_left(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.ambient {
            return Err(Error::DimensionMismatch {
                context: "left sketch input rows",
                expected: self.ambient,
                actual: a.rows(),
            });
        }
        let s = self.spec.s;
        match &self.state {
            EmbeddingState::Gaussian => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
                let inv = 1.0 / libm::sqrt(s as f64);
                let mut y = DenseMatrix::zeros(s, a.cols());
                let mut block = vec![0.0; s * GAUSSIAN_BLOCK];
                let mut start = 0;
                while start < self.ambient {
                    let width = GAUSSIAN_BLOCK.min(self.ambient - start);
                    for v in block[..s * width].iter_mut() {
                        *v = inv * rng.sample::<f64, _>(StandardNormal);
                    }
                    for c in 0..a.cols() {
                        let acol = &a.col(c)[start..start + width];
                        let ycol = y.col_mut(c);
                        for (jj, &w) in acol.iter().enumerate() {
                            if w != 0.0 {
                                axpy(w, &block[jj * s..(jj + 1) * s], ycol);
                            }
                        }
                    }
                    start += width;
                }
                Ok(y)
            }
            EmbeddingState::Srtt(plan, dct) => plan.apply_with(dct, a),
            EmbeddingState::Sparse { rows, signs } => {
                let mut y = DenseMatrix::zeros(s, a.cols());
                for c in 0..a.cols() {
                    let acol = a.col(c);
                    let ycol = y.col_mut(c);
                    for ((&r, &sg), &v) in rows.iter().zip(signs).zip(acol) {
                        ycol[r] += sg * v;
                    }
                }
                Ok(y)
            }
        }
    }

    /// `A X_right = (X Aᵀ)ᵀ` for `A` with `ambient` columns.
    pub fn apply_right(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.ambient {
            return Err(Error::DimensionMismatch {
                context: "right sketch input columns",
                expected: self.ambient,
                actual: a.cols(),
            });
        }
        Ok(self.apply_left(&a.transpose())?.transpose())
    }

    /// The explicit `s × ambient` matrix `X`, for oracles and tests.
    pub fn to_dense(&self) -> DenseMatrix {
        match &self.state {
            EmbeddingState::Srtt(plan, _) => plan.to_dense(),
            _ => self
                .apply_left(&DenseMatrix::identity(self.ambient))
                .expect("identity has ambient rows"),
        }
    }
}

/// `Y = X A` with `X ∈ R^{s×m}` drawn from `spec`.
pub fn sketch_left(spec: EmbeddingSpec, a: &DenseMatrix) -> Result<DenseMatrix> {
    Embedding::draw(spec, a.rows())?.apply_left(a)
}

/// `Y = A X` with `X ∈ R^{n×s}` drawn from `spec`.
pub fn sketch_right(spec: EmbeddingSpec, a: &DenseMatrix) -> Result<DenseMatrix> {
    Embedding::draw(spec, a.cols())?.apply_right(a)
}
