use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Orientation {
    /// `rows ≥ cols`; solved through `B = [A; √λ I]`.
    Overdetermined,
    /// `cols ≥ rows`; solved as the minimum-norm problem in `D = [A  √λ I]`.
    Underdetermined,
}

impl Orientation {
    /// Tall and square matrices are treated as overdetermined.
    pub fn of(a: &DenseMatrix) -> Self {
        if a.rows() >= a.cols() {
            Self::Overdetermined
        } else {
            Self::Underdetermined
        }
    }
}

/// Where a problem came from; carried through to reports.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemMeta {
    pub seed: Option<u64>,
    pub spectrum: Option<String>,
    pub noise_norm: Option<f64>,
}

/// A regularized least-squares instance `min ‖Ax − b‖² + λ‖x‖²`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: DenseMatrix,
    b: Vec<f64>,
    orientation: Orientation,
    pub meta: ProblemMeta,
}

impl ProblemInstance {
    /// Orientation is inferred from the shape of `a`.
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        let orientation = Orientation::of(&a);
        Self::with_orientation(a, b, orientation)
    }

    pub fn with_orientation(a: DenseMatrix, b: Vec<f64>, orientation: Orientation) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "right-hand side length",
                expected: a.rows(),
                actual: b.len(),
            });
        }
        if let Some(k) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k, col: 0 });
        }
        let ok = match orientation {
            Orientation::Overdetermined => a.rows() >= a.cols(),
            Orientation::Underdetermined => a.cols() >= a.rows(),
        };
        if !ok {
            return Err(Error::WrongOrientation);
        }
        Ok(Self {
            a,
            b,
            orientation,
            meta: ProblemMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: ProblemMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// `min(m, n)`, the size of the regularized normal system.
    pub fn min_dim(&self) -> usize {
        self.a.rows().min(self.a.cols())
    }

    pub fn into_parts(self) -> (DenseMatrix, Vec<f64>, ProblemMeta) {
        (self.a, self.b, self.meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn orientation_must_match_shape() {
        let a = DenseMatrix::zeros(2, 3);
        assert_eq!(
            ProblemInstance::new(a.clone(), vec![0.0; 2])
                .unwrap()
                .orientation(),
            Orientation::Underdetermined
        );
        assert!(matches!(
            ProblemInstance::with_orientation(a.clone(), vec![0.0; 2], Orientation::Overdetermined),
            Err(Error::WrongOrientation)
        ));
        assert!(ProblemInstance::new(a, vec![0.0; 3]).is_err());
    }
}
