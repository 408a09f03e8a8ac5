//! Capacity diagnostics.
//!
//! `h` is the ratio of the largest to the smallest functional margin
//! `yᵢ·f(xᵢ)` over a sample set and is only defined for a hyperplane that
//! separates the set with a positive margin. `h²` is the capacity measure
//! minimized during training. With augmented points `x̂ = (x; 1)` and weights
//! `û = (w; b)`, Cauchy–Schwarz gives `h <= R/d`, where `R = maxᵢ ‖x̂ᵢ‖` and
//! `d = minᵢ |ûᵀx̂ᵢ| / ‖û‖`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::dot;
use crate::model::{BinaryModel, KernelModel};

/// Smallest functional margin for which `h` is reported.
pub const EPS_H: f64 = 1e-10;
/// Below this `|ûᵀx̂ᵢ|` the radius/margin ratio is degenerate.
pub const EPS_MARGIN: f64 = 1e-12;

/// `max yᵢfᵢ / min yᵢfᵢ`, or `None` unless every margin exceeds [`EPS_H`].
pub fn h_from_margins(labels: &[f64], decisions: &[f64]) -> Option<f64> {
    let (min, max) = labels
        .iter()
        .zip(decisions)
        .map(|(y, f)| y * f)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    (min > EPS_H && min.is_finite()).then(|| max / min)
}

/// `max |fᵢ| / min |fᵢ|`, the sign-free form of `h`.
pub fn h_unsigned(decisions: &[f64]) -> Option<f64> {
    let (min, max) = decisions
        .iter()
        .map(|f| f.abs())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    (min > EPS_H && min.is_finite()).then(|| max / min)
}

fn check_dims(samples: &[Vec<f64>], n: usize) -> Result<()> {
    match samples.iter().find(|s| s.len() != n) {
        Some(bad) => Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        }),
        None => Ok(()),
    }
}

/// `h` for the hyperplane `wᵀx + b = 0`.
pub fn compute_h(samples: &[Vec<f64>], labels: &[f64], w: &[f64], b: f64) -> Result<Option<f64>> {
    if w.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroWeight);
    }
    check_dims(samples, w.len())?;
    let f: Vec<f64> = samples.iter().map(|x| dot(w, x) + b).collect();
    Ok(h_from_margins(labels, &f))
}

fn ratio(radius: f64, norm: f64, decisions: &[f64]) -> Result<f64> {
    let mut min = f64::INFINITY;
    for (i, f) in decisions.iter().enumerate() {
        let a = f.abs();
        if a < EPS_MARGIN {
            return Err(Error::DegenerateMargin { index: i });
        }
        min = min.min(a);
    }
    Ok(radius * norm / min)
}

/// `R/d` in augmented coordinates for the hyperplane `wᵀx + b = 0`.
pub fn radius_margin_ratio(samples: &[Vec<f64>], w: &[f64], b: f64) -> Result<f64> {
    if b == 0.0 && w.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    check_dims(samples, w.len())?;
    let norm = (dot(w, w) + b * b).sqrt();
    let radius = samples
        .iter()
        .map(|x| (dot(x, x) + 1.0).sqrt())
        .fold(0.0, f64::max);
    let f: Vec<f64> = samples.iter().map(|x| dot(w, x) + b).collect();
    ratio(radius, norm, &f)
}

/// `R/d` in the kernel's feature space: `‖x̂‖² = K(x, x) + 1` and
/// `‖û‖² = λᵀKλ + b²` over the support vectors.
pub fn kernel_radius_margin_ratio(model: &KernelModel, samples: &[Vec<f64>]) -> Result<f64> {
    check_dims(samples, model.n)?;
    let k = &model.kernel;
    let mut quad = 0.0;
    for (li, si) in model.lambda.iter().zip(&model.support_vectors) {
        for (lj, sj) in model.lambda.iter().zip(&model.support_vectors) {
            quad += li * lj * k.eval_unchecked(si, sj);
        }
    }
    let norm_sq = quad.max(0.0) + model.b * model.b;
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let radius = samples
        .iter()
        .map(|x| (k.eval_unchecked(x, x).max(0.0) + 1.0).sqrt())
        .fold(0.0, f64::max);
    let f: Vec<f64> = samples.iter().map(|x| model.decision_unchecked(x)).collect();
    ratio(radius, norm_sq.sqrt(), &f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    /// `None` when some sample is not separated with a positive margin.
    pub h: Option<f64>,
    pub h_squared: Option<f64>,
    pub radius_margin_ratio: Option<f64>,
    pub sv_count: usize,
    pub sv_fraction: f64,
    /// `sv_count / M`; an upper bound on expected test error for kernel models.
    pub expected_error_bound: f64,
    /// False for linear models, whose support-vector fields are placeholders
    /// (`M`, 1.0, 1.0).
    pub sv_applicable: bool,
}

pub fn capacity_report(
    model: &BinaryModel,
    train_samples: &[Vec<f64>],
    train_labels: &[f64],
) -> Result<CapacityReport> {
    check_dims(train_samples, model.n())?;
    if train_labels.len() != train_samples.len() {
        return Err(Error::DimensionMismatch {
            expected: train_samples.len(),
            actual: train_labels.len(),
        });
    }
    let m = train_samples.len();
    let f: Vec<f64> = train_samples.iter().map(|x| model.decision_unchecked(x)).collect();
    let h = h_from_margins(train_labels, &f);
    let (rmr, sv_count, sv_applicable) = match model {
        BinaryModel::Linear(lm) => {
            (radius_margin_ratio(train_samples, &lm.w, lm.b).ok(), m, false)
        }
        BinaryModel::Kernel(km) => (
            kernel_radius_margin_ratio(km, train_samples).ok(),
            km.sv_count(),
            true,
        ),
    };
    let fraction = if m == 0 { 0.0 } else { sv_count as f64 / m as f64 };
    Ok(CapacityReport {
        h,
        h_squared: h.map(|v| v * v),
        radius_margin_ratio: rmr,
        sv_count,
        sv_fraction: fraction,
        expected_error_bound: fraction,
        sv_applicable,
    })
}
