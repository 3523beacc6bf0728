//! L-curve assembly and corner detection.

use alloc::vec::Vec;

use crate::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LCurvePoint {
    pub lambda: f64,
    /// `log10 ‖A x_λ − b‖₂`
    pub log_residual: f64,
    /// `log10 ‖x_λ‖₂`
    pub log_solution_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LCurve {
    /// Ordered by λ descending.
    pub points: Vec<LCurvePoint>,
    /// Index into `points` of the vertex with the largest curvature.
    pub corner: Option<usize>,
}

impl LCurve {
    pub fn corner_point(&self) -> Option<&LCurvePoint> {
        self.corner.map(|i| &self.points[i])
    }

    /// Builds the curve from raw `(λ, ‖Ax − b‖, ‖x‖)` triples in any order.
    pub fn from_norms(triples: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        let mut points: Vec<LCurvePoint> = triples
            .into_iter()
            .map(|(lambda, r, x)| LCurvePoint {
                lambda,
                log_residual: libm::log10(r),
                log_solution_norm: libm::log10(x),
            })
            .collect();
        points.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
        let corner = corner_index(&points);
        Self { points, corner }
    }
}

pub fn lcurve(result: &SweepResult) -> LCurve {
    LCurve::from_norms(
        result
            .records
            .iter()
            .map(|r| (r.lambda, r.residual_norm, r.solution_norm)),
    )
}

/// Signed Menger curvature `2·((b−a)×(c−b)) / (|ab|·|bc|·|ac|)`, negated so
/// that the L corner (walking from large to small λ the curve turns from
/// leftward to upward) is positive.
pub fn menger_curvature(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let (bcx, bcy) = (c.0 - b.0, c.1 - b.1);
    let (acx, acy) = (c.0 - a.0, c.1 - a.1);
    let denom = libm::hypot(abx, aby) * libm::hypot(bcx, bcy) * libm::hypot(acx, acy);
    let cross = abx * bcy - aby * bcx;
    let k = -2.0 * cross / denom;
    (denom > 0.0 && k.is_finite()).then_some(k)
}

fn corner_index(points: &[LCurvePoint]) -> Option<usize> {
    if points.len() < 3 {
        return None;
    }
    let xy = |p: &LCurvePoint| (p.log_residual, p.log_solution_norm);
    let mut best: Option<(usize, f64)> = None;
    for i in 1..points.len() - 1 {
        let Some(k) = menger_curvature(xy(&points[i - 1]), xy(&points[i]), xy(&points[i + 1]))
        else {
            continue;
        };
        if best.is_none_or(|(_, bk)| k > bk) {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i)
}
