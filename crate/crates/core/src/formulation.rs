//! Assembly of the MCM linear programs and extraction of trained models.
//!
//! Every formulation has free weights (`w` for the linear machine, `λ` for
//! the kernel machine), a free bias `b` and a free bound `h`. For each
//! training sample `i` with functional margin `mᵢ = yᵢ·f(xᵢ)`:
//!
//! ```text
//! hard:  minimize h            s.t.  mᵢ <= h,        mᵢ >= 1
//! soft:  minimize h + C·Σ qᵢ   s.t.  mᵢ + qᵢ <= h,   mᵢ + qᵢ >= 1,   qᵢ >= 0
//! ```
//!
//! The slack `qᵢ` also enters the `h` row. The kernel machine uses
//! `f(xᵢ) = Σⱼ λⱼ K(xᵢ, xⱼ) + b`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::kernel::{GramMatrix, KernelSpec};
use crate::lp::{self, LpProblem, LpSolution, LpStatus, Relation, SolverOptions};
use crate::model::{BinaryModel, KernelModel, LinearModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    HardLinear,
    SoftLinear,
    SoftKernel,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::HardLinear => "hard-linear",
            Variant::SoftLinear => "soft-linear",
            Variant::SoftKernel => "kernel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub variant: Variant,
    /// Slack penalty; ignored by the hard-margin variant.
    pub c: f64,
    /// Used only by the kernel variant.
    pub kernel: KernelSpec,
}

impl TrainConfig {
    pub fn hard_linear() -> Self {
        Self {
            variant: Variant::HardLinear,
            c: 1.0,
            kernel: KernelSpec::linear(),
        }
    }

    pub fn soft_linear(c: f64) -> Self {
        Self {
            variant: Variant::SoftLinear,
            c,
            kernel: KernelSpec::linear(),
        }
    }

    pub fn soft_kernel(c: f64, kernel: KernelSpec) -> Self {
        Self {
            variant: Variant::SoftKernel,
            c,
            kernel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant != Variant::HardLinear && !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {}", self.c)));
        }
        if self.variant == Variant::SoftKernel {
            self.kernel.validate()?;
        }
        Ok(())
    }

    /// `Some(C)` for the soft variants.
    pub fn penalty(&self) -> Option<f64> {
        (self.variant != Variant::HardLinear).then_some(self.c)
    }
}

/// Column positions of the MCM variables inside the LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McmLpLayout {
    /// `w` (linear) or `λ` (kernel).
    pub weights: Range<usize>,
    pub bias: usize,
    pub h: usize,
    pub slacks: Option<Range<usize>>,
    pub columns: usize,
    /// Number of training samples the LP was assembled from.
    pub samples: usize,
}

impl McmLpLayout {
    fn new(weights: usize, samples: usize, soft: bool) -> Self {
        let bias = weights;
        let h = weights + 1;
        let slacks = soft.then(|| h + 1..h + 1 + samples);
        let columns = slacks.as_ref().map_or(h + 1, |s| s.end);
        Self {
            weights: 0..weights,
            bias,
            h,
            slacks,
            columns,
            samples,
        }
    }

    /// True when the blocks are disjoint and cover exactly `0..columns`.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![0u8; self.columns];
        let mut mark = |j: usize| {
            if let Some(s) = seen.get_mut(j) {
                *s += 1;
            }
        };
        self.weights.clone().for_each(&mut mark);
        mark(self.bias);
        mark(self.h);
        if let Some(s) = &self.slacks {
            s.clone().for_each(&mut mark);
        }
        let total = self.weights.len() + 2 + self.slacks.as_ref().map_or(0, |s| s.len());
        total == self.columns && seen.iter().all(|&c| c == 1)
    }
}

pub(crate) fn check_labels(labels: &[f64], expected: usize) -> Result<()> {
    if labels.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: labels.len(),
        });
    }
    if let Some(bad) = labels.iter().find(|y| **y != 1.0 && **y != -1.0) {
        return Err(Error::InvalidParameter(format!("label {bad} is not +1 or -1")));
    }
    let pos = labels.iter().any(|y| *y > 0.0);
    let neg = labels.iter().any(|y| *y < 0.0);
    if !(pos && neg) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

fn check_samples(samples: &[Vec<f64>]) -> Result<usize> {
    let n = samples.first().map_or(0, Vec::len);
    if let Some(bad) = samples.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    Ok(n)
}

/// Shared assembly: `margin_row(i)` yields `yᵢ` times the coefficients of
/// `f(xᵢ)` over the weight block.
fn assemble(
    weights: usize,
    labels: &[f64],
    c: Option<f64>,
    weight_prefix: &str,
    margin_row: impl Fn(usize) -> Vec<f64>,
) -> (LpProblem, McmLpLayout) {
    let m = labels.len();
    let layout = McmLpLayout::new(weights, m, c.is_some());
    let mut objective = vec![0.0; layout.columns];
    objective[layout.h] = 1.0;
    if let (Some(c), Some(s)) = (c, &layout.slacks) {
        for j in s.clone() {
            objective[j] = c;
        }
    }
    let mut lp = LpProblem::new(objective);
    for j in 0..weights {
        lp.set_free(j);
    }
    lp.set_free(layout.bias);
    lp.set_free(layout.h);

    let mut names: Vec<String> = (1..=weights).map(|j| format!("{weight_prefix}{j}")).collect();
    names.push("b".into());
    names.push("h".into());
    if layout.slacks.is_some() {
        names.extend((1..=m).map(|i| format!("q{i}")));
    }
    lp.names = names;

    for (i, &y) in labels.iter().enumerate() {
        let mut row = vec![0.0; layout.columns];
        row[..weights].copy_from_slice(&margin_row(i));
        row[layout.bias] = y;
        if let Some(s) = &layout.slacks {
            row[s.start + i] = 1.0;
        }
        // margin (+ q) >= 1
        let floor = row.clone();
        // margin (+ q) - h <= 0
        row[layout.h] = -1.0;
        lp.add_constraint(row, Relation::Le, 0.0);
        lp.add_constraint(floor, Relation::Ge, 1.0);
    }
    (lp, layout)
}

pub fn build_hard_linear(samples: &[Vec<f64>], labels: &[f64]) -> Result<(LpProblem, McmLpLayout)> {
    let n = check_samples(samples)?;
    check_labels(labels, samples.len())?;
    Ok(assemble(n, labels, None, "w", |i| {
        samples[i].iter().map(|x| labels[i] * x).collect()
    }))
}

pub fn build_soft_linear(
    samples: &[Vec<f64>],
    labels: &[f64],
    c: f64,
) -> Result<(LpProblem, McmLpLayout)> {
    let n = check_samples(samples)?;
    check_labels(labels, samples.len())?;
    TrainConfig::soft_linear(c).validate()?;
    Ok(assemble(n, labels, Some(c), "w", |i| {
        samples[i].iter().map(|x| labels[i] * x).collect()
    }))
}

pub fn build_soft_kernel(
    gram: &GramMatrix,
    labels: &[f64],
    c: f64,
) -> Result<(LpProblem, McmLpLayout)> {
    let m = gram.sample_count();
    if labels.len() != m {
        return Err(Error::GramShapeMismatch {
            rows: m,
            labels: labels.len(),
        });
    }
    check_labels(labels, m)?;
    TrainConfig::soft_kernel(c, gram.kernel).validate()?;
    Ok(assemble(m, labels, Some(c), "lambda", |i| {
        gram.row(i).iter().map(|k| labels[i] * k).collect()
    }))
}

fn require_optimal(solution: &LpSolution) -> Result<()> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::NotOptimal(format!("{:?}", solution.status)));
    }
    Ok(())
}

pub fn extract_linear(
    solution: &LpSolution,
    layout: &McmLpLayout,
    config: &TrainConfig,
) -> Result<LinearModel> {
    require_optimal(solution)?;
    let x = &solution.primal_values;
    Ok(LinearModel {
        w: x[layout.weights.clone()].to_vec(),
        b: x[layout.bias],
        h: x[layout.h],
        c: config.penalty(),
        train_size: Some(layout.samples),
    })
}

/// Relative threshold below which `|λⱼ|` is treated as zero.
pub const SV_RELATIVE_TOL: f64 = 1e-6;
/// Absolute floor on the support-vector threshold.
pub const SV_ABSOLUTE_TOL: f64 = 1e-10;

pub fn extract_kernel(
    solution: &LpSolution,
    layout: &McmLpLayout,
    config: &TrainConfig,
    samples: &[Vec<f64>],
) -> Result<KernelModel> {
    require_optimal(solution)?;
    let x = &solution.primal_values;
    let lambda = &x[layout.weights.clone()];
    if lambda.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            actual: samples.len(),
        });
    }
    let b = x[layout.bias];
    let h = x[layout.h];
    let kernel = config.kernel;

    let build = |threshold: f64| {
        let keep: Vec<usize> = (0..lambda.len()).filter(|&j| lambda[j].abs() > threshold).collect();
        KernelModel {
            lambda: keep.iter().map(|&j| lambda[j]).collect(),
            support_vectors: keep.iter().map(|&j| samples[j].clone()).collect(),
            n: samples.first().map_or(0, Vec::len),
            b,
            h,
            kernel,
            c: config.penalty(),
            train_size: Some(samples.len()),
        }
    };

    let max_abs = lambda.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let pruned = build((SV_RELATIVE_TOL * max_abs).max(SV_ABSOLUTE_TOL));
    let full_decision = |xi: &[f64]| -> f64 {
        lambda
            .iter()
            .zip(samples)
            .map(|(l, sv)| l * kernel.eval_unchecked(xi, sv))
            .sum::<f64>()
            + b
    };
    let consistent = samples
        .iter()
        .all(|xi| (pruned.decision_unchecked(xi) >= 0.0) == (full_decision(xi) >= 0.0));
    if consistent {
        Ok(pruned)
    } else {
        // Keep every nonzero coefficient so no training prediction changes.
        Ok(build(0.0))
    }
}

/// The LP for a training problem together with what is needed to read a model
/// back out of its solution.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: LpProblem,
    pub layout: McmLpLayout,
}

pub fn build(samples: &[Vec<f64>], labels: &[f64], config: &TrainConfig) -> Result<BuiltProblem> {
    config.validate()?;
    if samples.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            actual: labels.len(),
        });
    }
    let (problem, layout) = match config.variant {
        Variant::HardLinear => build_hard_linear(samples, labels)?,
        Variant::SoftLinear => build_soft_linear(samples, labels, config.c)?,
        Variant::SoftKernel => {
            check_samples(samples)?;
            check_labels(labels, samples.len())?;
            let gram = GramMatrix::new(&config.kernel, samples)?;
            build_soft_kernel(&gram, labels, config.c)?
        }
    };
    Ok(BuiltProblem { problem, layout })
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub model: BinaryModel,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves a built problem and extracts the model.
pub fn solve_built(
    built: &BuiltProblem,
    samples: &[Vec<f64>],
    config: &TrainConfig,
    options: &SolverOptions,
) -> Result<Fit> {
    let solution = lp::solve(&built.problem, options)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible if config.variant == Variant::HardLinear => {
            return Err(Error::HardMarginInfeasible)
        }
        status => return Err(Error::SolverFailure(format!("LP is {status:?}"))),
    }
    let model = match config.variant {
        Variant::HardLinear | Variant::SoftLinear => {
            BinaryModel::Linear(extract_linear(&solution, &built.layout, config)?)
        }
        Variant::SoftKernel => {
            BinaryModel::Kernel(extract_kernel(&solution, &built.layout, config, samples)?)
        }
    };
    Ok(Fit {
        model,
        objective: solution.objective_value,
        iterations: solution.iterations,
    })
}

/// Trains a binary MCM on `±1` labels.
pub fn fit(samples: &[Vec<f64>], labels: &[f64], config: &TrainConfig) -> Result<Fit> {
    let built = build(samples, labels, config)?;
    solve_built(&built, samples, config, &SolverOptions::default())
}
