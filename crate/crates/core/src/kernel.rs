//! Kernel functions `K(p, q) = φ(p)ᵀφ(q)` and Gram matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
    #[serde(rename = "poly")]
    Polynomial,
}

/// Kernel choice and parameters.
///
/// `Rbf` is `exp(-gamma * ‖p - q‖²)`; `Polynomial` is `(pᵀq + coef0)^degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            gamma: 0.0,
            degree: 1,
            coef0: 0.0,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma,
            degree: 1,
            coef0: 0.0,
        }
    }

    pub fn polynomial(degree: u32, coef0: f64) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            gamma: 0.0,
            degree,
            coef0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Rbf if !(self.gamma > 0.0 && self.gamma.is_finite()) => Err(
                Error::InvalidParameter(format!("rbf gamma must be positive, got {}", self.gamma)),
            ),
            KernelKind::Polynomial if self.degree < 1 => Err(Error::InvalidParameter(
                "polynomial degree must be >= 1".into(),
            )),
            KernelKind::Polynomial if !self.coef0.is_finite() => {
                Err(Error::InvalidParameter("coef0 must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                actual: q.len(),
            });
        }
        Ok(self.eval_unchecked(p, q))
    }

    pub(crate) fn eval_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(p, q),
            KernelKind::Rbf => {
                let sq: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                (-self.gamma * sq).exp()
            }
            KernelKind::Polynomial => (dot(p, q) + self.coef0).powi(self.degree as i32),
        }
    }
}

pub(crate) fn dot(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

/// Symmetric `M x M` matrix of kernel evaluations over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Vec<f64>,
    size: usize,
    pub kernel: KernelSpec,
}

impl GramMatrix {
    /// Builds the Gram matrix of `samples`, evaluating the upper triangle and
    /// mirroring it.
    pub fn new(kernel: &KernelSpec, samples: &[Vec<f64>]) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(Error::TooFewSamples("Gram matrix needs at least one sample".into()));
        }
        let n = samples[0].len();
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        let mut entries = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = kernel.eval_unchecked(&samples[i], &samples[j]);
                entries[i * m + j] = v;
                entries[j * m + i] = v;
            }
        }
        Ok(Self {
            entries,
            size: m,
            kernel: *kernel,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_self_similarity_is_one() {
        let k = KernelSpec::rbf(3.7);
        assert_eq!(k.eval(&[0.3, -2.0, 5.0], &[0.3, -2.0, 5.0]).unwrap(), 1.0);
    }

    #[test]
    fn linear_orthogonal() {
        let k = KernelSpec::linear();
        assert_eq!(k.eval(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn rbf_scalar_value() {
        let k = KernelSpec::rbf(0.5);
        let v = k.eval(&[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert!((v - 0.135_335_283_236_612_7).abs() < 1e-15);
    }

    #[test]
    fn polynomial_value() {
        let k = KernelSpec::polynomial(2, 1.0);
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 144.0);
    }

    #[test]
    fn dimension_mismatch() {
        let k = KernelSpec::linear();
        assert!(matches!(
            k.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn invalid_parameters() {
        assert!(KernelSpec::rbf(0.0).validate().is_err());
        assert!(KernelSpec::rbf(-1.0).validate().is_err());
        assert!(KernelSpec::polynomial(0, 0.0).validate().is_err());
        assert!(KernelSpec::rbf(0.1).validate().is_ok());
    }

    #[test]
    fn single_sample_gram() {
        let g = GramMatrix::new(&KernelSpec::rbf(1.0), &[vec![4.0, 2.0]]).unwrap();
        assert_eq!(g.sample_count(), 1);
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn identity_samples_give_identity_gram() {
        let samples: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let g = GramMatrix::new(&KernelSpec::linear(), &samples).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gram_matches_pointwise_eval() {
        let samples = vec![
            vec![0.1, 0.7, -1.2],
            vec![2.0, -0.3, 0.0],
            vec![-0.5, 0.5, 0.5],
            vec![1.5, 1.5, -2.5],
            vec![0.0, 0.0, 0.9],
        ];
        let k = KernelSpec::rbf(0.8);
        let g = GramMatrix::new(&k, &samples).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let direct = k.eval(&samples[i], &samples[j]).unwrap();
                assert!((g.get(i, j) - direct).abs() <= 1e-14);
                assert_eq!(g.get(i, j), g.get(j, i));
                assert!(g.get(i, j) > 0.0 && g.get(i, j) <= 1.0);
            }
            assert_eq!(g.get(i, i), 1.0);
        }
    }
}
