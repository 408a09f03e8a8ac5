use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mcm_core::capacity::capacity_report;
use mcm_core::data::binarize_labels;
use mcm_core::eval::{
    binary_members, cross_validate, grid_search, make_folds, train_classifier, ConfigSummary,
    CvOptions, TrainOptions, REPORT_VERSION,
};
use mcm_core::lp::text::write_lp;
use mcm_core::model::{self, Classifier};
use mcm_core::{BinaryModel, KernelKind, KernelSpec, Model};
use serde::Serialize;

use crate::args::{CvArgs, Format, GridArgs, InspectArgs, PredictArgs, TrainArgs};
use crate::CliError;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_model(path: &Path) -> Result<Classifier, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    model::load(&text).map_err(|e| CliError::Context(format!("{}", path.display()), e))
}

/// Writes `text` to `out`, or returns it for stdout.
fn emit(out: Option<&Path>, text: String) -> Result<String, CliError> {
    match out {
        Some(p) => write_file(p, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

/// Renders a number for humans: ten significant digits, always with a
/// decimal point or exponent so it reads as a real.
fn num(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.9e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

// ---------------------------------------------------------------------------
// train

#[derive(Serialize)]
struct MemberReport {
    class: String,
    objective: f64,
    iterations: usize,
    h: Option<f64>,
    sv_count: usize,
    expected_error_bound: f64,
}

#[derive(Serialize)]
struct TrainReport {
    report_version: u32,
    config: ConfigSummary,
    scaled: bool,
    classes: Vec<String>,
    train_size: usize,
    n: usize,
    /// LP optimum; the mean over members for one-versus-rest.
    objective: f64,
    iterations: usize,
    /// `max/min` functional margin on the training set; for one-versus-rest
    /// the mean over members where it is defined.
    h: Option<f64>,
    h_squared: Option<f64>,
    radius_margin_ratio: Option<f64>,
    sv_count: f64,
    sv_applicable: bool,
    expected_error_bound: f64,
    training_accuracy: f64,
    train_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    members: Option<Vec<MemberReport>>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Inserts `.label` before the extension of `path`.
fn suffixed(path: &Path, label: &str) -> PathBuf {
    let safe: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{safe}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{safe}"),
    };
    path.with_file_name(name)
}

pub fn train(args: &TrainArgs) -> Result<String, CliError> {
    args.model.check()?;
    let ds = args.data.load(false)?;
    let config = args.model.config(ds.n_features());
    let options = TrainOptions {
        scale: args.model.scale,
        keep_problems: args.dump_lp.is_some(),
        ..TrainOptions::default()
    };
    let start = Instant::now();
    let outcome = train_classifier(&ds, &config, &options)?;
    let train_seconds = start.elapsed().as_secs_f64();
    let classifier = &outcome.classifier;

    if let Some(path) = &args.dump_lp {
        let members = binary_members(classifier);
        let ovr = matches!(classifier.model, Model::Ovr(_));
        for (problem, (_, positive)) in outcome.problems.iter().zip(&members) {
            let target = if ovr { suffixed(path, positive) } else { path.clone() };
            let title = format!("mcm {} positive={positive}", config.variant.as_str());
            write_file(&target, &write_lp(problem, &title))?;
        }
    }
    write_file(&args.out, &model::save(classifier))?;

    let samples = match &classifier.scale {
        Some(p) => p.apply_all(&ds.samples),
        None => ds.samples.clone(),
    };
    let mut member_reports = Vec::new();
    let mut caps = Vec::new();
    for ((member, positive), (obj, it)) in binary_members(classifier)
        .into_iter()
        .zip(outcome.objectives.iter().zip(&outcome.iterations))
    {
        let labels = binarize_labels(&ds.labels, &positive)?;
        let cap = capacity_report(&member, &samples, &labels)?;
        member_reports.push(MemberReport {
            class: positive,
            objective: *obj,
            iterations: *it,
            h: cap.h,
            sv_count: cap.sv_count,
            expected_error_bound: cap.expected_error_bound,
        });
        caps.push(cap);
    }
    let correct = ds
        .samples
        .iter()
        .zip(&ds.labels)
        .map(|(x, y)| classifier.predict_label(x).map(|p| p == *y))
        .collect::<Result<Vec<bool>, _>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();

    let hs: Vec<f64> = caps.iter().filter_map(|c| c.h).collect();
    let h = if caps.len() == 1 { caps[0].h } else { mean(&hs) };
    let sv: Vec<f64> = caps.iter().map(|c| c.sv_count as f64).collect();
    let bounds: Vec<f64> = caps.iter().map(|c| c.expected_error_bound).collect();
    let report = TrainReport {
        report_version: REPORT_VERSION,
        config: (&config).into(),
        scaled: args.model.scale,
        classes: ds.classes(),
        train_size: ds.len(),
        n: ds.n_features(),
        objective: mean(&outcome.objectives).unwrap_or(f64::NAN),
        iterations: outcome.iterations.iter().sum(),
        h,
        h_squared: h.map(|v| v * v),
        radius_margin_ratio: if caps.len() == 1 { caps[0].radius_margin_ratio } else { None },
        sv_count: mean(&sv).unwrap_or(0.0),
        sv_applicable: caps.iter().all(|c| c.sv_applicable),
        expected_error_bound: mean(&bounds).unwrap_or(0.0),
        training_accuracy: correct as f64 / ds.len() as f64,
        train_seconds,
        members: (member_reports.len() > 1).then_some(member_reports),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("reports always serialize");
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// predict

pub fn predict(args: &PredictArgs) -> Result<String, CliError> {
    if args.unlabeled && args.data.format == Format::Libsvm {
        return Err(CliError::Usage("--unlabeled applies to CSV input only".into()));
    }
    let classifier = read_model(&args.model)?;
    let ds = args.data.load(args.unlabeled)?;
    let n = classifier.n();
    let mut out = String::new();
    for (i, x) in ds.samples.iter().enumerate() {
        // LibSVM rows only extend to the largest index present in the file.
        let padded;
        let x = if args.data.format == Format::Libsvm && x.len() < n {
            padded = [x.as_slice(), &vec![0.0; n - x.len()]].concat();
            &padded
        } else {
            x
        };
        let row = |e| CliError::Context(format!("row {}", i + 1), e);
        let label = classifier.predict_label(x).map_err(row)?;
        out.push_str(&label);
        if args.scores {
            for s in classifier.scores(x).map_err(row)? {
                let _ = write!(out, "\t{s:?}");
            }
        }
        out.push('\n');
    }
    emit(args.out.as_deref(), out)
}

// ---------------------------------------------------------------------------
// cv and grid

pub fn cv(args: &CvArgs) -> Result<String, CliError> {
    args.model.check()?;
    args.eval.check()?;
    let ds = args.data.load(false)?;
    let config = args.model.config(ds.n_features());
    config.validate()?;
    let plan = make_folds(&ds.labels, args.eval.folds, args.eval.seed)?;
    let options = CvOptions {
        scale: args.model.scale,
        record_timings: args.eval.timings,
        ..CvOptions::default()
    };
    let report = cross_validate(&ds, &config, &plan, &options)?;
    let text = if args.eval.json { report.to_json() } else { report.to_table() };
    emit(args.eval.out.as_deref(), text)
}

pub fn grid(args: &GridArgs) -> Result<String, CliError> {
    args.check()?;
    let ds = args.data.load(false)?;
    let base = args.model.config(ds.n_features());
    let plan = make_folds(&ds.labels, args.eval.folds, args.eval.seed)?;
    let options = CvOptions {
        scale: args.model.scale,
        record_timings: args.eval.timings,
        ..CvOptions::default()
    };
    let report = grid_search(&ds, &base, &args.spec(), &plan, &options)?;
    let failed = report.cells.iter().filter(|c| c.report.is_none()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} grid cells failed", report.cells.len());
    }
    let text = if args.eval.json { report.to_json() } else { report.to_table() };
    emit(args.eval.out.as_deref(), text)
}

// ---------------------------------------------------------------------------
// inspect

#[derive(Serialize)]
struct MemberSummary {
    class: String,
    #[serde(rename = "type")]
    kind: &'static str,
    h: f64,
    sv_count: Option<usize>,
}

#[derive(Serialize)]
struct Summary {
    #[serde(rename = "type")]
    kind: &'static str,
    variant: &'static str,
    n: usize,
    classes: Option<Vec<String>>,
    #[serde(rename = "C")]
    c: Option<f64>,
    kernel: Option<String>,
    h: f64,
    h_squared: f64,
    /// Mean over members for one-versus-rest.
    sv_count: Option<f64>,
    train_size: Option<usize>,
    expected_error_bound: Option<f64>,
    scaled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    members: Option<Vec<MemberSummary>>,
}

fn kernel_text(k: &KernelSpec) -> String {
    match k.kind {
        KernelKind::Linear => "linear".into(),
        KernelKind::Rbf => format!("rbf gamma={}", num(k.gamma)),
        KernelKind::Polynomial => format!("poly degree={} coef0={}", k.degree, num(k.coef0)),
    }
}

struct Parts {
    variant: &'static str,
    c: Option<f64>,
    kernel: Option<String>,
    sv: Option<usize>,
    train_size: Option<usize>,
}

fn parts(m: &BinaryModel) -> Parts {
    match m {
        BinaryModel::Linear(l) => Parts {
            variant: l.variant().as_str(),
            c: l.c,
            kernel: None,
            sv: None,
            train_size: l.train_size,
        },
        BinaryModel::Kernel(k) => Parts {
            variant: "kernel",
            c: k.c,
            kernel: Some(kernel_text(&k.kernel)),
            sv: Some(k.sv_count()),
            train_size: k.train_size,
        },
    }
}

fn kind_of(m: &BinaryModel) -> &'static str {
    match m {
        BinaryModel::Linear(_) => "linear",
        BinaryModel::Kernel(_) => "kernel",
    }
}

fn summarize(classifier: &Classifier) -> Summary {
    let members = binary_members(classifier);
    let first = parts(&members[0].0);
    let h = members.iter().map(|(m, _)| m.h()).sum::<f64>() / members.len() as f64;
    let sv = first.sv.map(|_| {
        members.iter().filter_map(|(m, _)| parts(m).sv).sum::<usize>() as f64 / members.len() as f64
    });
    let bound = match (first.sv, first.train_size) {
        (Some(_), Some(t)) if t > 0 => {
            let per: f64 = members
                .iter()
                .filter_map(|(m, _)| parts(m).sv)
                .map(|s| s as f64 / t as f64)
                .sum();
            Some(per / members.len() as f64)
        }
        _ => None,
    };
    let ovr = matches!(classifier.model, Model::Ovr(_));
    Summary {
        kind: classifier.model.type_name(),
        variant: first.variant,
        n: classifier.n(),
        classes: match &classifier.model {
            Model::Ovr(o) => Some(o.class_labels.clone()),
            _ => classifier.classes.as_ref().map(|c| c.to_vec()),
        },
        c: first.c,
        kernel: first.kernel,
        h,
        h_squared: h * h,
        sv_count: sv,
        train_size: first.train_size,
        expected_error_bound: bound,
        scaled: classifier.scale.is_some(),
        members: ovr.then(|| {
            members
                .iter()
                .map(|(m, class)| MemberSummary {
                    class: class.clone(),
                    kind: kind_of(m),
                    h: m.h(),
                    sv_count: parts(m).sv,
                })
                .collect()
        }),
    }
}

pub fn inspect(args: &InspectArgs) -> Result<String, CliError> {
    let classifier = read_model(&args.model)?;
    let s = summarize(&classifier);
    if args.json {
        let mut text = serde_json::to_string_pretty(&s).expect("summaries always serialize");
        text.push('\n');
        return Ok(text);
    }
    let na = || "n/a".to_string();
    let mut out = String::new();
    let _ = writeln!(out, "type: {}", s.kind);
    let _ = writeln!(out, "variant: {}", s.variant);
    let _ = writeln!(out, "n: {}", s.n);
    if let Some(c) = &s.classes {
        let _ = writeln!(out, "classes: {}", c.join(", "));
    }
    let _ = writeln!(out, "C: {}", s.c.map_or_else(na, num));
    let _ = writeln!(out, "kernel: {}", s.kernel.clone().unwrap_or_else(|| "none (linear model)".into()));
    let _ = writeln!(out, "h: {}", num(s.h));
    let _ = writeln!(out, "h^2: {}", num(s.h_squared));
    let count = |v: f64| if v.fract() == 0.0 { format!("{v}") } else { num(v) };
    let _ = writeln!(out, "sv_count: {}", s.sv_count.map_or_else(na, count));
    let _ = writeln!(out, "train_size: {}", s.train_size.map_or_else(na, |v| v.to_string()));
    let _ = writeln!(out, "expected_error_bound: {}", s.expected_error_bound.map_or_else(na, num));
    let _ = writeln!(out, "scaled: {}", if s.scaled { "yes" } else { "no" });
    for m in s.members.iter().flatten() {
        let sv = m.sv_count.map_or_else(na, |v| v.to_string());
        let _ = writeln!(out, "member {}: {} h={} sv_count={}", m.class, m.kind, num(m.h), sv);
    }
    Ok(out)
}
