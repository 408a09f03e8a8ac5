//! Training pipeline, stratified k-fold cross-validation and grid search.
//!
//! Folds and grid cells run in parallel; results are always assembled in
//! (cell, fold) order so reports do not depend on scheduling.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::capacity_report;
use crate::data::{binarize_labels, Dataset, ScaleParams};
use crate::error::{Error, Result};
use crate::formulation::{self, TrainConfig, Variant};
use crate::kernel::{KernelKind, KernelSpec};
use crate::lp::{LpProblem, SolverOptions};
use crate::model::{sign, BinaryModel, Classifier, Model, OvrModel};

pub const REPORT_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Training on raw labels

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Fit min-max scaling on the training data and store it in the model.
    pub scale: bool,
    pub solver: SolverOptions,
    /// Keep the LPs handed to the solver in [`TrainOutcome::problems`].
    pub keep_problems: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub classifier: Classifier,
    /// LP optimum per binary problem (one, or one per class for OvR).
    pub objectives: Vec<f64>,
    pub iterations: Vec<usize>,
    pub problems: Vec<LpProblem>,
}

/// Trains on raw labels: a single binary machine for two classes (the later
/// class in [`crate::data::class_order`] is positive), one-versus-rest otherwise.
pub fn train_classifier(
    dataset: &Dataset,
    config: &TrainConfig,
    options: &TrainOptions,
) -> Result<TrainOutcome> {
    dataset.validate()?;
    config.validate()?;
    let classes = dataset.classes();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let scale = options.scale.then(|| ScaleParams::fit(&dataset.samples));
    let samples = match &scale {
        Some(p) => p.apply_all(&dataset.samples),
        None => dataset.samples.clone(),
    };

    let fit_one = |positive: &str| -> Result<(BinaryModel, f64, usize, Option<LpProblem>)> {
        let labels = binarize_labels(&dataset.labels, positive)?;
        let built = formulation::build(&samples, &labels, config)?;
        let fit = formulation::solve_built(&built, &samples, config, &options.solver)?;
        let problem = options.keep_problems.then_some(built.problem);
        Ok((fit.model, fit.objective, fit.iterations, problem))
    };

    let mut outcome = TrainOutcome {
        classifier: Classifier::new(Model::Linear(crate::model::LinearModel {
            w: vec![],
            b: 0.0,
            h: 0.0,
            c: None,
            train_size: None,
        })),
        objectives: Vec::new(),
        iterations: Vec::new(),
        problems: Vec::new(),
    };

    if classes.len() == 2 {
        let (model, obj, it, problem) = fit_one(&classes[1])?;
        outcome.classifier = Classifier {
            model: model.into(),
            classes: Some([classes[1].clone(), classes[0].clone()]),
            scale,
        };
        outcome.objectives.push(obj);
        outcome.iterations.push(it);
        outcome.problems.extend(problem);
    } else {
        let fits: Vec<Result<_>> = classes.par_iter().map(|c| fit_one(c)).collect();
        let mut members = Vec::with_capacity(fits.len());
        for fit in fits {
            let (model, obj, it, problem) = fit?;
            members.push(model);
            outcome.objectives.push(obj);
            outcome.iterations.push(it);
            outcome.problems.extend(problem);
        }
        outcome.classifier = Classifier {
            model: Model::Ovr(OvrModel {
                class_labels: classes,
                members,
            }),
            classes: None,
            scale,
        };
    }
    Ok(outcome)
}

/// Binary members of a classifier paired with the raw label each treats as `+1`.
pub fn binary_members(classifier: &Classifier) -> Vec<(BinaryModel, String)> {
    match &classifier.model {
        Model::Ovr(o) => o.members.iter().cloned().zip(o.class_labels.iter().cloned()).collect(),
        other => {
            let positive = classifier
                .classes
                .as_ref()
                .map_or_else(|| "1".to_string(), |c| c[0].clone());
            vec![(other.as_binary().expect("binary model"), positive)]
        }
    }
}

// ---------------------------------------------------------------------------
// Folds

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Stratified assignment of samples to `k` folds.
///
/// Each class is shuffled with a seeded ChaCha8 stream, the classes are
/// concatenated in class order, and position `p` of the concatenation goes to
/// fold `p mod k`. Both the fold sizes and every class's per-fold counts
/// therefore differ by at most one.
pub fn make_folds(labels: &[String], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::TooFewSamples(format!(
            "{} samples cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labels.len());
    for class in crate::data::class_order(labels) {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    let mut assignments = vec![0; labels.len()];
    for (p, &i) in order.iter().enumerate() {
        assignments[i] = p % k;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Cross-validation

#[derive(Debug, Clone, Default)]
pub struct CvOptions {
    pub scale: bool,
    /// Wall-clock timings make reports non-reproducible, so they are opt-in.
    pub record_timings: bool,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and population standard deviation; `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Stat {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub variant: &'static str,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub kernel: Option<KernelKind>,
    pub gamma: Option<f64>,
    pub degree: Option<u32>,
    pub coef0: Option<f64>,
}

impl From<&TrainConfig> for ConfigSummary {
    fn from(cfg: &TrainConfig) -> Self {
        let kernel = (cfg.variant == Variant::SoftKernel).then_some(cfg.kernel);
        let kind = kernel.map(|k| k.kind);
        Self {
            variant: cfg.variant.as_str(),
            c: cfg.penalty(),
            kernel: kind,
            gamma: kernel.filter(|k| k.kind == KernelKind::Rbf).map(|k| k.gamma),
            degree: kernel
                .filter(|k| k.kind == KernelKind::Polynomial)
                .map(|k| k.degree),
            coef0: kernel
                .filter(|k| k.kind == KernelKind::Polynomial)
                .map(|k| k.coef0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Fraction of held-out samples whose predicted raw label is correct
    /// (argmax over members for multiclass data).
    pub accuracy: f64,
    /// Multiclass only: mean held-out accuracy of the one-vs-rest members.
    pub mean_binary_accuracy: Option<f64>,
    /// Support vectors (mean over members for multiclass data).
    pub sv_count: f64,
    /// `h` on the training portion; mean over members where defined.
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub report_version: u32,
    pub config: ConfigSummary,
    pub folds_k: usize,
    pub seed: u64,
    pub scaled: bool,
    /// Aggregates use the population standard deviation (divide by k).
    pub std_kind: &'static str,
    /// False for linear models, whose `sv_count` is the training size.
    pub sv_applicable: bool,
    pub folds: Vec<FoldResult>,
    pub accuracy: Stat,
    pub mean_binary_accuracy: Option<Stat>,
    pub sv_count: Stat,
    pub h: Option<Stat>,
    pub h_defined_folds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_seconds: Option<Stat>,
}

impl CvReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>4}  {:>6}  {:>5}  {:>9}  {:>9}  {:>12}",
            "fold", "train", "test", "accuracy", "sv_count", "h"
        );
        for f in &self.folds {
            let _ = writeln!(
                out,
                "{:>4}  {:>6}  {:>5}  {:>9.4}  {:>9.2}  {:>12}",
                f.fold,
                f.train_size,
                f.test_size,
                f.accuracy,
                f.sv_count,
                fmt_opt(f.h)
            );
        }
        let _ = writeln!(
            out,
            "mean  accuracy {:.4} ± {:.4}   sv_count {:.2} ± {:.2}{}   h {}",
            self.accuracy.mean,
            self.accuracy.std,
            self.sv_count.mean,
            self.sv_count.std,
            if self.sv_applicable { "" } else { " (n/a: linear)" },
            self.h
                .map_or("undefined".to_string(), |s| format!("{:.4} ± {:.4}", s.mean, s.std)),
        );
        if let Some(b) = self.mean_binary_accuracy {
            let _ = writeln!(out, "mean one-vs-rest member accuracy {:.4} ± {:.4}", b.mean, b.std);
        }
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("undefined".to_string(), |x| format!("{x:.4}"))
}

/// Trains on every fold except `fold`. Scaling, when enabled, is fitted on
/// those training rows only.
pub fn fold_classifier(
    dataset: &Dataset,
    config: &TrainConfig,
    plan: &FoldPlan,
    fold: usize,
    options: &CvOptions,
) -> Result<TrainOutcome> {
    let train = dataset.subset(&plan.train_indices(fold));
    let topts = TrainOptions {
        scale: options.scale,
        solver: options.solver.clone(),
        keep_problems: false,
    };
    train_classifier(&train, config, &topts)
}

fn run_fold(
    dataset: &Dataset,
    config: &TrainConfig,
    plan: &FoldPlan,
    fold: usize,
    options: &CvOptions,
) -> Result<FoldResult> {
    let train = dataset.subset(&plan.train_indices(fold));
    let test = dataset.subset(&plan.test_indices(fold));
    let start = Instant::now();
    let outcome = fold_classifier(dataset, config, plan, fold, options)?;
    let elapsed = start.elapsed().as_secs_f64();
    let clf = &outcome.classifier;

    let mut correct = 0usize;
    for (x, y) in test.samples.iter().zip(&test.labels) {
        if clf.predict_label(x)? == *y {
            correct += 1;
        }
    }
    let accuracy = ratio(correct, test.len());

    let members = binary_members(clf);
    let train_x = match &clf.scale {
        Some(p) => p.apply_all(&train.samples),
        None => train.samples.clone(),
    };
    let mut sv = Vec::new();
    let mut hs = Vec::new();
    for (model, positive) in &members {
        let y = binarize_labels(&train.labels, positive)?;
        let report = capacity_report(model, &train_x, &y)?;
        sv.push(report.sv_count as f64);
        hs.extend(report.h);
    }

    let mean_binary_accuracy = if members.len() > 1 {
        let mut acc = vec![0usize; members.len()];
        for (x, label) in test.samples.iter().zip(&test.labels) {
            let scores = clf.scores(x)?;
            for (k, (_, positive)) in members.iter().enumerate() {
                let truth = if label == positive { 1 } else { -1 };
                if sign(scores[k]) == truth {
                    acc[k] += 1;
                }
            }
        }
        let per: Vec<f64> = acc.iter().map(|&c| ratio(c, test.len())).collect();
        Some(per.iter().sum::<f64>() / per.len() as f64)
    } else {
        None
    };

    Ok(FoldResult {
        fold,
        train_size: train.len(),
        test_size: test.len(),
        accuracy,
        mean_binary_accuracy,
        sv_count: sv.iter().sum::<f64>() / sv.len() as f64,
        h: Stat::of(&hs).map(|s| s.mean),
        train_seconds: options.record_timings.then_some(elapsed),
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn cross_validate(
    dataset: &Dataset,
    config: &TrainConfig,
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<CvReport> {
    dataset.validate()?;
    config.validate()?;
    if plan.assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            actual: plan.assignments.len(),
        });
    }
    if plan.k < 2 || plan.assignments.iter().any(|&a| a >= plan.k) {
        return Err(Error::InvalidParameter("fold plan assignments out of range".into()));
    }
    let results: Vec<Result<FoldResult>> = (0..plan.k)
        .into_par_iter()
        .map(|f| run_fold(dataset, config, plan, f, options))
        .collect();
    let mut folds = Vec::with_capacity(plan.k);
    for (f, r) in results.into_iter().enumerate() {
        folds.push(r.map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })?);
    }

    let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let sv: Vec<f64> = folds.iter().map(|f| f.sv_count).collect();
    let hs: Vec<f64> = folds.iter().filter_map(|f| f.h).collect();
    let mba: Vec<f64> = folds.iter().filter_map(|f| f.mean_binary_accuracy).collect();
    let times: Vec<f64> = folds.iter().filter_map(|f| f.train_seconds).collect();
    Ok(CvReport {
        report_version: REPORT_VERSION,
        config: config.into(),
        folds_k: plan.k,
        seed: plan.seed,
        scaled: options.scale,
        std_kind: "population",
        sv_applicable: config.variant == Variant::SoftKernel,
        accuracy: Stat::of(&acc).expect("k >= 2"),
        mean_binary_accuracy: Stat::of(&mba),
        sv_count: Stat::of(&sv).expect("k >= 2"),
        h: Stat::of(&hs),
        h_defined_folds: hs.len(),
        train_seconds: Stat::of(&times),
        folds,
    })
}

// ---------------------------------------------------------------------------
// Grid search

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
}

impl Default for GridSpec {
    /// `C ∈ {2⁻⁵, 2⁻³, …, 2¹⁵}`, `gamma ∈ {2⁻¹⁵, 2⁻¹³, …, 2³}`.
    fn default() -> Self {
        Self {
            c_values: (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect(),
            gamma_values: (-15..=3).step_by(2).map(|e| 2f64.powi(e)).collect(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("C", &self.c_values), ("gamma", &self.gamma_values)] {
            if values.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} grid is empty")));
            }
            if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidParameter(format!("{name} grid values must be positive")));
            }
        }
        Ok(())
    }

    /// The training configurations of every cell, C-major.
    pub fn cells(&self, base: &TrainConfig) -> Vec<TrainConfig> {
        match base.variant {
            Variant::HardLinear => vec![*base],
            Variant::SoftLinear => self.c_values.iter().map(|&c| TrainConfig { c, ..*base }).collect(),
            Variant::SoftKernel if base.kernel.kind == KernelKind::Rbf => self
                .c_values
                .iter()
                .flat_map(|&c| {
                    self.gamma_values.iter().map(move |&g| TrainConfig {
                        c,
                        kernel: KernelSpec { gamma: g, ..base.kernel },
                        ..*base
                    })
                })
                .collect(),
            Variant::SoftKernel => self.c_values.iter().map(|&c| TrainConfig { c, ..*base }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub index: usize,
    pub config: ConfigSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CvReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub report_version: u32,
    pub folds_k: usize,
    pub seed: u64,
    pub scaled: bool,
    pub cells: Vec<GridCell>,
    /// Index into `cells` of the selected configuration.
    pub best: Option<usize>,
    pub best_config: Option<ConfigSummary>,
    #[serde(skip)]
    pub best_train_config: Option<TrainConfig>,
}

impl GridReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>4}  {:>12}  {:>12}  {:>17}  {:>15}  {}",
            "cell", "C", "gamma", "accuracy", "sv_count", "status"
        );
        for cell in &self.cells {
            let c = cell.config.c.map_or("-".into(), |v| format!("{v}"));
            let g = cell.config.gamma.map_or("-".into(), |v| format!("{v}"));
            match &cell.report {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "{:>4}  {:>12}  {:>12}  {:>8.4} ± {:<6.4}  {:>7.2} ± {:<5.2}  {}",
                        cell.index,
                        c,
                        g,
                        r.accuracy.mean,
                        r.accuracy.std,
                        r.sv_count.mean,
                        r.sv_count.std,
                        if Some(cell.index) == self.best { "best" } else { "ok" }
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{:>4}  {:>12}  {:>12}  {:>17}  {:>15}  failed: {}",
                        cell.index,
                        c,
                        g,
                        "-",
                        "-",
                        cell.error.as_deref().unwrap_or("")
                    );
                }
            }
        }
        out
    }
}

/// `true` when cell `a` should be preferred over the incumbent `b`: higher
/// mean accuracy, then fewer support vectors, then smaller C, then smaller gamma.
fn better(a: (&TrainConfig, &CvReport), b: (&TrainConfig, &CvReport)) -> bool {
    let (ca, ra) = a;
    let (cb, rb) = b;
    let key = |c: &TrainConfig, r: &CvReport| {
        (
            -r.accuracy.mean,
            r.sv_count.mean,
            c.penalty().unwrap_or(0.0),
            if c.variant == Variant::SoftKernel { c.kernel.gamma } else { 0.0 },
        )
    };
    let (ka, kb) = (key(ca, ra), key(cb, rb));
    ka.0.total_cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
        .then(ka.3.total_cmp(&kb.3))
        .is_lt()
}

/// Cross-validates every grid cell. Failing cells are recorded and skipped;
/// an error is returned only when every cell fails.
pub fn grid_search(
    dataset: &Dataset,
    base: &TrainConfig,
    grid: &GridSpec,
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<GridReport> {
    grid.validate()?;
    let configs = grid.cells(base);
    let results: Vec<Result<CvReport>> = configs
        .par_iter()
        .map(|cfg| cross_validate(dataset, cfg, plan, options))
        .collect();

    let mut best: Option<usize> = None;
    let mut cells = Vec::with_capacity(configs.len());
    let mut first_error = None;
    for (i, (cfg, result)) in configs.iter().zip(results).enumerate() {
        let (report, error) = match result {
            Ok(r) => (Some(r), None),
            Err(e) => {
                let msg = e.to_string();
                first_error.get_or_insert(e);
                (None, Some(msg))
            }
        };
        if let Some(r) = &report {
            let replace = match best {
                None => true,
                Some(b) => better((cfg, r), (&configs[b], cells_report(&cells, b))),
            };
            if replace {
                best = Some(i);
            }
        }
        cells.push(GridCell {
            index: i,
            config: cfg.into(),
            report,
            error,
        });
    }
    if best.is_none() {
        return Err(first_error.expect("grid has at least one cell"));
    }
    Ok(GridReport {
        report_version: REPORT_VERSION,
        folds_k: plan.k,
        seed: plan.seed,
        scaled: options.scale,
        best_config: best.map(|b| (&configs[b]).into()),
        best_train_config: best.map(|b| configs[b]),
        best,
        cells,
    })
}

fn cells_report(cells: &[GridCell], i: usize) -> &CvReport {
    cells[i].report.as_ref().expect("best cell has a report")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(spec: &[(&str, usize)]) -> Vec<String> {
        spec.iter()
            .flat_map(|(l, n)| std::iter::repeat_n(l.to_string(), *n))
            .collect()
    }

    #[test]
    fn balanced_folds_get_one_of_each() {
        let y = labels(&[("a", 5), ("b", 5)]);
        let plan = make_folds(&y, 5, 3).unwrap();
        for f in 0..5 {
            let idx = plan.test_indices(f);
            assert_eq!(idx.len(), 2);
            assert_eq!(idx.iter().filter(|&&i| y[i] == "a").count(), 1);
        }
    }

    #[test]
    fn seven_into_five() {
        let y = labels(&[("a", 4), ("b", 3)]);
        let mut sizes = make_folds(&y, 5, 0).unwrap().fold_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![2, 2, 1, 1, 1]);
    }

    #[test]
    fn folds_are_deterministic() {
        let y = labels(&[("a", 13), ("b", 8), ("c", 4)]);
        assert_eq!(make_folds(&y, 4, 99).unwrap(), make_folds(&y, 4, 99).unwrap());
        assert_ne!(
            make_folds(&y, 4, 99).unwrap().assignments,
            make_folds(&y, 4, 100).unwrap().assignments
        );
    }

    #[test]
    fn fold_errors() {
        let y = labels(&[("a", 2), ("b", 1)]);
        assert!(matches!(make_folds(&y, 4, 0), Err(Error::TooFewSamples(_))));
        assert!(matches!(make_folds(&y, 1, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn default_grid_sizes() {
        let g = GridSpec::default();
        assert_eq!(g.c_values.len(), 11);
        assert_eq!(g.gamma_values.len(), 10);
        assert_eq!(g.c_values[0], 2f64.powi(-5));
        assert_eq!(*g.gamma_values.last().unwrap(), 8.0);
        let k = TrainConfig::soft_kernel(1.0, KernelSpec::rbf(1.0));
        assert_eq!(g.cells(&k).len(), 110);
        assert_eq!(g.cells(&TrainConfig::soft_linear(1.0)).len(), 11);
        assert_eq!(g.cells(&TrainConfig::hard_linear()).len(), 1);
    }

    #[test]
    fn grid_validation() {
        let g = GridSpec {
            c_values: vec![],
            gamma_values: vec![1.0],
        };
        assert!(g.validate().is_err());
        let g = GridSpec {
            c_values: vec![1.0, -2.0],
            gamma_values: vec![1.0],
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn population_std() {
        let s = Stat::of(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert!(Stat::of(&[]).is_none());
    }

    fn fake_report(acc: f64, sv: f64) -> CvReport {
        CvReport {
            report_version: 1,
            config: (&TrainConfig::soft_linear(1.0)).into(),
            folds_k: 2,
            seed: 0,
            scaled: false,
            std_kind: "population",
            sv_applicable: true,
            folds: vec![],
            accuracy: Stat { mean: acc, std: 0.0 },
            mean_binary_accuracy: None,
            sv_count: Stat { mean: sv, std: 0.0 },
            h: None,
            h_defined_folds: 0,
            train_seconds: None,
        }
    }

    #[test]
    fn tie_breaks() {
        let k = |c, g| TrainConfig::soft_kernel(c, KernelSpec::rbf(g));
        let (a, b) = (k(1.0, 1.0), k(2.0, 1.0));
        // higher accuracy wins
        assert!(better((&b, &fake_report(0.9, 10.0)), (&a, &fake_report(0.8, 1.0))));
        // equal accuracy: fewer SVs
        assert!(better((&b, &fake_report(0.9, 3.0)), (&a, &fake_report(0.9, 4.0))));
        // then smaller C
        assert!(better((&a, &fake_report(0.9, 3.0)), (&b, &fake_report(0.9, 3.0))));
        // then smaller gamma
        let (c, d) = (k(1.0, 0.5), k(1.0, 2.0));
        assert!(better((&c, &fake_report(0.9, 3.0)), (&d, &fake_report(0.9, 3.0))));
        assert!(!better((&d, &fake_report(0.9, 3.0)), (&c, &fake_report(0.9, 3.0))));
    }
}
