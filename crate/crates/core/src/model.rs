//! Trained models, decision functions and the `.mcm.json` model format.

use serde::{Deserialize, Serialize};

use crate::data::ScaleParams;
use crate::error::{Error, Result};
use crate::formulation::Variant;
use crate::kernel::{dot, KernelKind, KernelSpec};

pub const MODEL_FORMAT: &str = "mcm-model";
pub const MODEL_VERSION: u32 = 1;

/// `f(x) = wᵀx + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub b: f64,
    /// Optimal `h` reported by the training LP.
    pub h: f64,
    /// Slack penalty; `None` for a hard-margin model.
    pub c: Option<f64>,
    pub train_size: Option<usize>,
}

impl LinearModel {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn variant(&self) -> Variant {
        if self.c.is_some() {
            Variant::SoftLinear
        } else {
            Variant::HardLinear
        }
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n(), x)?;
        Ok(self.decision_unchecked(x))
    }

    pub fn decision_unchecked(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }
}

/// `f(x) = Σⱼ λⱼ K(x, xⱼ) + b` over the retained support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub lambda: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    pub n: usize,
    pub b: f64,
    pub h: f64,
    pub kernel: KernelSpec,
    pub c: Option<f64>,
    pub train_size: Option<usize>,
}

impl KernelModel {
    pub fn sv_count(&self) -> usize {
        self.lambda.len()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x)?;
        Ok(self.decision_unchecked(x))
    }

    pub fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.lambda
            .iter()
            .zip(&self.support_vectors)
            .map(|(l, sv)| l * self.kernel.eval_unchecked(x, sv))
            .sum::<f64>()
            + self.b
    }
}

fn check_dim(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum BinaryModel {
    Linear(LinearModel),
    Kernel(KernelModel),
}

impl BinaryModel {
    pub fn n(&self) -> usize {
        match self {
            BinaryModel::Linear(m) => m.n(),
            BinaryModel::Kernel(m) => m.n,
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            BinaryModel::Linear(m) => m.h,
            BinaryModel::Kernel(m) => m.h,
        }
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        match self {
            BinaryModel::Linear(m) => m.decision(x),
            BinaryModel::Kernel(m) => m.decision(x),
        }
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            BinaryModel::Linear(m) => m.decision_unchecked(x),
            BinaryModel::Kernel(m) => m.decision_unchecked(x),
        }
    }

    /// `+1` when the decision value is `>= 0`, else `-1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        self.decision(x).map(sign)
    }
}

pub fn sign(decision: f64) -> i8 {
    if decision >= 0.0 {
        1
    } else {
        -1
    }
}

/// One-versus-rest ensemble: member `k` separates `class_labels[k]` from the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrModel {
    pub class_labels: Vec<String>,
    pub members: Vec<BinaryModel>,
}

impl OvrModel {
    pub fn n(&self) -> usize {
        self.members.first().map_or(0, BinaryModel::n)
    }

    pub fn decisions(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.members.iter().map(|m| m.decision(x)).collect()
    }

    /// Index of the largest decision value; ties go to the lowest index.
    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        let d = self.decisions(x)?;
        let mut best = 0;
        for k in 1..d.len() {
            if d[k] > d[best] {
                best = k;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.class_labels[self.predict_index(x)?])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Kernel(KernelModel),
    Ovr(OvrModel),
}

impl Model {
    pub fn n(&self) -> usize {
        match self {
            Model::Linear(m) => m.n(),
            Model::Kernel(m) => m.n,
            Model::Ovr(m) => m.n(),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Kernel(_) => "kernel",
            Model::Ovr(_) => "ovr",
        }
    }

    /// The binary model, if this is not an ensemble.
    pub fn as_binary(&self) -> Option<BinaryModel> {
        match self {
            Model::Linear(m) => Some(BinaryModel::Linear(m.clone())),
            Model::Kernel(m) => Some(BinaryModel::Kernel(m.clone())),
            Model::Ovr(_) => None,
        }
    }
}

impl From<BinaryModel> for Model {
    fn from(m: BinaryModel) -> Self {
        match m {
            BinaryModel::Linear(m) => Model::Linear(m),
            BinaryModel::Kernel(m) => Model::Kernel(m),
        }
    }
}

/// A model together with what is needed to map raw features to raw labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub model: Model,
    /// For binary models: `[positive, negative]` raw label names.
    pub classes: Option<[String; 2]>,
    /// Min-max parameters applied to inputs before the model sees them.
    pub scale: Option<ScaleParams>,
}

impl Classifier {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            classes: None,
            scale: None,
        }
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    fn prepare<'a>(&self, x: &'a [f64]) -> Result<std::borrow::Cow<'a, [f64]>> {
        check_dim(self.n(), x)?;
        Ok(match &self.scale {
            Some(p) => std::borrow::Cow::Owned(p.apply(x)),
            None => std::borrow::Cow::Borrowed(x),
        })
    }

    /// Decision value(s): one for a binary model, one per class for OvR.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.prepare(x)?;
        match &self.model {
            Model::Linear(m) => Ok(vec![m.decision_unchecked(&x)]),
            Model::Kernel(m) => Ok(vec![m.decision_unchecked(&x)]),
            Model::Ovr(m) => m.decisions(&x),
        }
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<String> {
        let scores = self.scores(x)?;
        Ok(match &self.model {
            Model::Ovr(m) => {
                let mut best = 0;
                for k in 1..scores.len() {
                    if scores[k] > scores[best] {
                        best = k;
                    }
                }
                m.class_labels[best].clone()
            }
            _ => {
                let s = sign(scores[0]);
                match &self.classes {
                    Some([pos, neg]) => if s > 0 { pos } else { neg }.clone(),
                    None => if s > 0 { "1" } else { "-1" }.to_string(),
                }
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Debug, Serialize, Deserialize)]
struct KernelDoc {
    kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coef0: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    #[serde(rename = "type")]
    kind: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<KernelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support_vectors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    members: Option<Vec<ModelDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<ScaleParams>,
}

impl ModelDoc {
    fn empty(kind: &str, n: usize) -> Self {
        Self {
            format: None,
            version: None,
            kind: kind.into(),
            n,
            w: None,
            b: None,
            h: None,
            c: None,
            kernel: None,
            lambda: None,
            support_vectors: None,
            classes: None,
            members: None,
            train_size: None,
            scale: None,
        }
    }

    fn from_binary(model: &BinaryModel) -> Self {
        match model {
            BinaryModel::Linear(m) => {
                let mut d = Self::empty("linear", m.n());
                d.w = Some(m.w.clone());
                d.b = Some(m.b);
                d.h = Some(m.h);
                d.c = m.c;
                d.train_size = m.train_size;
                d
            }
            BinaryModel::Kernel(m) => {
                let mut d = Self::empty("kernel", m.n);
                let k = m.kernel;
                d.kernel = Some(KernelDoc {
                    kind: k.kind,
                    gamma: (k.kind == KernelKind::Rbf).then_some(k.gamma),
                    degree: (k.kind == KernelKind::Polynomial).then_some(k.degree),
                    coef0: (k.kind == KernelKind::Polynomial).then_some(k.coef0),
                });
                d.lambda = Some(m.lambda.clone());
                d.support_vectors = Some(m.support_vectors.clone());
                d.b = Some(m.b);
                d.h = Some(m.h);
                d.c = m.c;
                d.train_size = m.train_size;
                d
            }
        }
    }

    fn into_binary(self, path: &str) -> Result<BinaryModel> {
        let missing = |field: &str| Error::parse(0, format!("{path}{field}"), "missing field");
        let n = self.n;
        match self.kind.as_str() {
            "linear" => {
                let w = self.w.ok_or_else(|| missing("w"))?;
                if w.len() != n {
                    return Err(Error::parse(
                        0,
                        format!("{path}w"),
                        format!("length {} does not match n = {n}", w.len()),
                    ));
                }
                Ok(BinaryModel::Linear(LinearModel {
                    w,
                    b: self.b.ok_or_else(|| missing("b"))?,
                    h: self.h.ok_or_else(|| missing("h"))?,
                    c: self.c,
                    train_size: self.train_size,
                }))
            }
            "kernel" => {
                let kd = self.kernel.ok_or_else(|| missing("kernel"))?;
                let kernel = match kd.kind {
                    KernelKind::Linear => KernelSpec::linear(),
                    KernelKind::Rbf => {
                        KernelSpec::rbf(kd.gamma.ok_or_else(|| missing("kernel.gamma"))?)
                    }
                    KernelKind::Polynomial => KernelSpec::polynomial(
                        kd.degree.ok_or_else(|| missing("kernel.degree"))?,
                        kd.coef0.unwrap_or(0.0),
                    ),
                };
                kernel
                    .validate()
                    .map_err(|e| Error::parse(0, format!("{path}kernel"), e.to_string()))?;
                let lambda = self.lambda.ok_or_else(|| missing("lambda"))?;
                let support_vectors = self.support_vectors.ok_or_else(|| missing("support_vectors"))?;
                if lambda.len() != support_vectors.len() {
                    return Err(Error::parse(
                        0,
                        format!("{path}lambda"),
                        "length does not match support_vectors",
                    ));
                }
                if let Some(k) = support_vectors.iter().position(|sv| sv.len() != n) {
                    return Err(Error::parse(
                        0,
                        format!("{path}support_vectors[{k}]"),
                        format!("length does not match n = {n}"),
                    ));
                }
                Ok(BinaryModel::Kernel(KernelModel {
                    lambda,
                    support_vectors,
                    n,
                    b: self.b.ok_or_else(|| missing("b"))?,
                    h: self.h.ok_or_else(|| missing("h"))?,
                    kernel,
                    c: self.c,
                    train_size: self.train_size,
                }))
            }
            other => Err(Error::parse(
                0,
                format!("{path}type"),
                format!("unknown model type {other:?}"),
            )),
        }
    }
}

/// Serializes a classifier as pretty-printed UTF-8 JSON.
pub fn save(classifier: &Classifier) -> String {
    let mut doc = match &classifier.model {
        Model::Linear(m) => ModelDoc::from_binary(&BinaryModel::Linear(m.clone())),
        Model::Kernel(m) => ModelDoc::from_binary(&BinaryModel::Kernel(m.clone())),
        Model::Ovr(m) => {
            let mut d = ModelDoc::empty("ovr", m.n());
            d.classes = Some(m.class_labels.clone());
            d.members = Some(m.members.iter().map(ModelDoc::from_binary).collect());
            d
        }
    };
    if let Some(classes) = &classifier.classes {
        if !matches!(classifier.model, Model::Ovr(_)) {
            doc.classes = Some(classes.to_vec());
        }
    }
    doc.scale = classifier.scale.clone();
    doc.format = Some(MODEL_FORMAT.into());
    doc.version = Some(MODEL_VERSION);
    let mut out = serde_json::to_string_pretty(&doc).expect("model documents always serialize");
    out.push('\n');
    out
}

pub fn load(text: &str) -> Result<Classifier> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), format!("column {}", e.column()), e.to_string()))?;
    match value.get("format").and_then(|v| v.as_str()) {
        Some(MODEL_FORMAT) => {}
        other => {
            return Err(Error::VersionMismatch(format!(
                "expected format {MODEL_FORMAT:?}, found {other:?}"
            )))
        }
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == MODEL_VERSION as u64 => {}
        other => {
            return Err(Error::VersionMismatch(format!(
                "expected version {MODEL_VERSION}, found {other:?}"
            )))
        }
    }
    let doc: ModelDoc = serde_json::from_value(value)
        .map_err(|e| Error::parse(0, "document", e.to_string()))?;
    let scale = doc.scale.clone();
    if let Some(s) = &scale {
        if s.min.len() != doc.n || s.max.len() != doc.n {
            return Err(Error::parse(0, "scale", "length does not match n"));
        }
    }
    let mut classes = None;
    let model = match doc.kind.as_str() {
        "ovr" => {
            let n = doc.n;
            let labels = doc
                .classes
                .ok_or_else(|| Error::parse(0, "classes", "missing field"))?;
            let members = doc
                .members
                .ok_or_else(|| Error::parse(0, "members", "missing field"))?
                .into_iter()
                .enumerate()
                .map(|(k, m)| m.into_binary(&format!("members[{k}].")))
                .collect::<Result<Vec<_>>>()?;
            if labels.len() != members.len() || labels.len() < 2 {
                return Err(Error::parse(
                    0,
                    "members",
                    "need one member per class and at least two classes",
                ));
            }
            if members.iter().any(|m| m.n() != n) {
                return Err(Error::parse(0, "members", "member feature count differs from n"));
            }
            Model::Ovr(OvrModel {
                class_labels: labels,
                members,
            })
        }
        _ => {
            if let Some(c) = doc.classes.clone() {
                let pair: [String; 2] = c
                    .try_into()
                    .map_err(|_| Error::parse(0, "classes", "binary models name exactly two classes"))?;
                classes = Some(pair);
            }
            doc.into_binary("")?.into()
        }
    };
    Ok(Classifier {
        model,
        classes,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trivial() -> LinearModel {
        LinearModel {
            w: vec![1.0],
            b: 0.0,
            h: 1.0,
            c: None,
            train_size: None,
        }
    }

    fn kernel_model() -> KernelModel {
        KernelModel {
            lambda: vec![0.7, -1.3, 0.1 + 0.2],
            support_vectors: vec![vec![0.0, 1.0], vec![1.0, 1.0], vec![-0.5, 2.0]],
            n: 2,
            b: -0.125,
            h: 2.5,
            kernel: KernelSpec::rbf(0.3),
            c: Some(10.0),
            train_size: Some(12),
        }
    }

    #[test]
    fn linear_decision() {
        assert_eq!(trivial().decision(&[0.5]).unwrap(), 0.5);
        assert!(matches!(
            trivial().decision(&[0.5, 1.0]),
            Err(Error::DimensionMismatch { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn empty_support_gives_bias() {
        let m = KernelModel {
            lambda: vec![],
            support_vectors: vec![],
            n: 3,
            b: -0.75,
            h: 1.0,
            kernel: KernelSpec::rbf(1.0),
            c: Some(1.0),
            train_size: Some(4),
        };
        assert_eq!(m.decision(&[1.0, 2.0, 3.0]).unwrap(), -0.75);
        assert_eq!(m.decision(&[0.0, 0.0, 0.0]).unwrap(), -0.75);
    }

    #[test]
    fn sign_rule() {
        assert_eq!(sign(0.3), 1);
        assert_eq!(sign(-0.3), -1);
        assert_eq!(sign(0.0), 1);
        assert_eq!(sign(-0.0), 1);
    }

    #[test]
    fn ovr_ties_go_to_first_class() {
        let flat = |b: f64| {
            BinaryModel::Linear(LinearModel {
                w: vec![0.0],
                b,
                h: 1.0,
                c: Some(1.0),
                train_size: None,
            })
        };
        let ovr = OvrModel {
            class_labels: vec!["a".into(), "b".into(), "c".into()],
            members: vec![flat(0.5), flat(0.5), flat(0.5)],
        };
        assert_eq!(ovr.predict(&[1.0]).unwrap(), "a");
        let ovr = OvrModel {
            class_labels: vec!["a".into(), "b".into()],
            members: vec![flat(-0.1), flat(0.2)],
        };
        assert_eq!(ovr.predict(&[1.0]).unwrap(), "b");
    }

    #[test]
    fn minimal_file_loads() {
        let text = r#"{"format":"mcm-model","version":1,"type":"linear","n":1,"w":[1.0],"b":0.0,"h":1.0}"#;
        let c = load(text).unwrap();
        assert_eq!(c.model, Model::Linear(trivial()));
        assert!(c.classes.is_none() && c.scale.is_none());
    }

    #[test]
    fn linear_round_trip_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = LinearModel {
            w: (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            b: rng.gen_range(-1.0..1.0),
            h: 1.0 + rng.gen::<f64>(),
            c: Some(0.1 + 0.2),
            train_size: Some(40),
        };
        let c = Classifier {
            model: Model::Linear(m.clone()),
            classes: Some(["yes".into(), "no".into()]),
            scale: None,
        };
        let back = load(&save(&c)).unwrap();
        assert_eq!(back, c);
        let Model::Linear(b) = &back.model else { panic!() };
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
            assert_eq!(m.decision(&x).unwrap().to_bits(), b.decision(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn kernel_and_ovr_round_trip() {
        let k = kernel_model();
        let ovr = OvrModel {
            class_labels: vec!["x".into(), "y".into(), "z".into()],
            members: vec![
                BinaryModel::Kernel(k.clone()),
                BinaryModel::Kernel(KernelModel {
                    kernel: KernelSpec::polynomial(3, 0.5),
                    ..k.clone()
                }),
                BinaryModel::Kernel(KernelModel {
                    kernel: KernelSpec::linear(),
                    ..k.clone()
                }),
            ],
        };
        for model in [Model::Kernel(k), Model::Ovr(ovr)] {
            let c = Classifier {
                model,
                classes: None,
                scale: Some(ScaleParams {
                    min: vec![0.0, -1.0],
                    max: vec![2.0, 1.0],
                }),
            };
            let text = save(&c);
            assert_eq!(load(&text).unwrap(), c);
        }
    }

    #[test]
    fn truncated_stream_is_parse_error() {
        let text = save(&Classifier::new(Model::Linear(trivial())));
        let cut = &text[..text.len() / 2];
        assert!(matches!(load(cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_version_and_format() {
        let text = r#"{"format":"mcm-model","version":2,"type":"linear","n":1,"w":[1.0],"b":0.0,"h":1.0}"#;
        assert!(matches!(load(text), Err(Error::VersionMismatch(_))));
        let text = r#"{"format":"other","version":1,"type":"linear","n":1,"w":[1.0],"b":0.0,"h":1.0}"#;
        assert!(matches!(load(text), Err(Error::VersionMismatch(_))));
    }

    #[test]
    fn inconsistent_lengths_rejected() {
        let text = r#"{"format":"mcm-model","version":1,"type":"linear","n":2,"w":[1.0],"b":0.0,"h":1.0}"#;
        match load(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "w"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classifier_maps_labels_and_scales() {
        let c = Classifier {
            model: Model::Linear(LinearModel {
                w: vec![1.0],
                b: -0.5,
                h: 1.0,
                c: None,
                train_size: None,
            }),
            classes: Some(["pos".into(), "neg".into()]),
            scale: Some(ScaleParams {
                min: vec![10.0],
                max: vec![20.0],
            }),
        };
        assert_eq!(c.predict_label(&[18.0]).unwrap(), "pos");
        assert_eq!(c.predict_label(&[12.0]).unwrap(), "neg");
        assert_eq!(c.predict_label(&[15.0]).unwrap(), "pos");
        assert!(c.predict_label(&[1.0, 2.0]).is_err());
    }
}
