//! Dataset loading and preprocessing.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples with raw (string) labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub samples: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(samples: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let ds = Self {
            samples,
            labels,
            feature_names: None,
        };
        ds.check_shape()?;
        Ok(ds)
    }

    fn check_shape(&self) -> Result<()> {
        if self.samples.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.samples.len(),
                actual: self.labels.len(),
            });
        }
        let n = self.n_features();
        for (i, row) in self.samples.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRows {
                    row: i + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(i + 1, "features", "non-finite value"));
            }
        }
        Ok(())
    }

    /// Checks the invariants training relies on: at least two samples and
    /// rows of equal, finite width.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        if self.len() < 2 {
            return Err(Error::TooFewSamples(format!(
                "need at least 2 samples, got {}",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Distinct labels in [`class_order`].
    pub fn classes(&self) -> Vec<String> {
        class_order(&self.labels)
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            samples: rows.iter().map(|&i| self.samples[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Distinct labels, sorted numerically when every label parses as a number
/// and lexicographically otherwise.
pub fn class_order(labels: &[String]) -> Vec<String> {
    let mut distinct: Vec<String> = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    let numeric: Option<Vec<f64>> = distinct.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
    if let Some(values) = numeric {
        let mut paired: Vec<(f64, String)> = values.into_iter().zip(distinct).collect();
        paired.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        paired.into_iter().map(|(_, l)| l).collect()
    } else {
        distinct
    }
}

/// `+1` for rows labelled `positive`, `-1` for all others.
pub fn binarize(dataset: &Dataset, positive: &str) -> Result<Vec<f64>> {
    binarize_labels(&dataset.labels, positive)
}

pub fn binarize_labels(labels: &[String], positive: &str) -> Result<Vec<f64>> {
    if !labels.iter().any(|l| l == positive) {
        return Err(Error::UnknownLabel(positive.to_string()));
    }
    Ok(labels
        .iter()
        .map(|l| if l == positive { 1.0 } else { -1.0 })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    /// Zero-based column index.
    Index(usize),
    /// Every column is a feature; labels are left empty.
    Absent,
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label: LabelColumn,
    pub has_header: bool,
    /// Field separator; `None` splits on runs of whitespace.
    pub delimiter: Option<u8>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label: LabelColumn::Last,
            has_header: false,
            delimiter: Some(b','),
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(s)
}

pub fn load_csv(path: impl AsRef<Path>, label_column: usize, has_header: bool) -> Result<Dataset> {
    load_csv_with(
        path,
        &CsvOptions {
            label: LabelColumn::Index(label_column),
            has_header,
            ..CsvOptions::default()
        },
    )
}

pub fn load_csv_with(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    parse_csv(&read_file(path.as_ref())?, options)
}

fn parse_cell(cell: &str, line: usize, column: usize) -> Result<f64> {
    let t = cell.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("column {}", column + 1), format!("not a finite number: {t:?}"))),
    }
}

pub fn parse_csv(text: &str, options: &CsvOptions) -> Result<Dataset> {
    // (line number, fields)
    let records: Vec<(usize, Vec<String>)> = match options.delimiter {
        Some(delim) => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .delimiter(delim)
                .flexible(true)
                .comment(Some(b'#'))
                .from_reader(text.as_bytes());
            let mut out = Vec::new();
            for rec in reader.records() {
                let rec = rec.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    Error::parse(line, "record", e.to_string())
                })?;
                let line = rec.position().map_or(out.len() + 1, |p| p.line() as usize);
                if rec.len() == 1 && rec[0].trim().is_empty() {
                    continue;
                }
                out.push((line, rec.iter().map(|f| f.trim().to_string()).collect()));
            }
            out
        }
        None => text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("").trim();
                (!body.is_empty())
                    .then(|| (i + 1, body.split_whitespace().map(str::to_string).collect()))
            })
            .collect(),
    };

    let mut iter = records.into_iter();
    let header = if options.has_header { iter.next() } else { None };
    let rows: Vec<(usize, Vec<String>)> = iter.collect();

    let width = rows
        .first()
        .map(|(_, r)| r.len())
        .or_else(|| header.as_ref().map(|(_, h)| h.len()))
        .unwrap_or(0);
    let label_idx = match options.label {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Index(i) => Some(i),
        LabelColumn::Absent => None,
    };
    if let Some(li) = label_idx {
        if width > 0 && li >= width {
            return Err(Error::InvalidParameter(format!(
                "label column {li} out of range for {width} columns"
            )));
        }
    }

    let mut samples = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        if fields.len() != width {
            return Err(Error::RaggedRows {
                row: *line,
                expected: width,
                found: fields.len(),
            });
        }
        let mut x = Vec::with_capacity(width);
        for (c, cell) in fields.iter().enumerate() {
            if Some(c) == label_idx {
                labels.push(cell.clone());
            } else {
                x.push(parse_cell(cell, *line, c)?);
            }
        }
        if label_idx.is_none() {
            labels.push(String::new());
        }
        samples.push(x);
    }
    let feature_names = header.map(|(_, h)| {
        h.into_iter()
            .enumerate()
            .filter(|(c, _)| Some(*c) != label_idx)
            .map(|(_, name)| name)
            .collect()
    });
    Ok(Dataset {
        samples,
        labels,
        feature_names,
    })
}

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_libsvm(&read_file(path.as_ref())?)
}

/// Parses `label idx:val ...` lines with 1-based indices into a dense dataset.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(line, tok, "expected index:value"))?;
            let idx: i64 = idx
                .parse()
                .map_err(|_| Error::parse(line, tok, "index is not an integer"))?;
            if idx < 1 {
                return Err(Error::NonpositiveIndex { line });
            }
            let val: f64 = match val.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => return Err(Error::parse(line, tok, "value is not a finite number")),
            };
            n = n.max(idx as usize);
            row.push((idx as usize - 1, val));
        }
        labels.push(label.to_string());
        sparse.push(row);
    }
    let samples = sparse
        .into_iter()
        .map(|row| {
            let mut x = vec![0.0; n];
            for (j, v) in row {
                x[j] = v;
            }
            x
        })
        .collect();
    Ok(Dataset {
        samples,
        labels,
        feature_names: None,
    })
}

/// Per-feature min-max scaling fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScaleParams {
    pub fn fit(samples: &[Vec<f64>]) -> Self {
        let n = samples.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for x in samples {
            for j in 0..n {
                min[j] = min[j].min(x[j]);
                max[j] = max[j].max(x[j]);
            }
        }
        Self { min, max }
    }

    /// Maps `x` with the stored ranges. Values outside the fitted range are
    /// not clamped; constant features map to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    (v - self.min[j]) / span
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn apply_all(&self, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
        samples.iter().map(|x| self.apply(x)).collect()
    }
}

/// Fits scaling on `dataset` and returns the scaled copy with its parameters.
pub fn minmax_scale(dataset: &Dataset) -> (Dataset, ScaleParams) {
    let params = ScaleParams::fit(&dataset.samples);
    let scaled = Dataset {
        samples: params.apply_all(&dataset.samples),
        labels: dataset.labels.clone(),
        feature_names: dataset.feature_names.clone(),
    };
    (scaled, params)
}
