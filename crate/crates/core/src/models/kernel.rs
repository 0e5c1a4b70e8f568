use serde::{Deserialize, Serialize};

use super::{ModelError, Result};

/// Kernel as written in a config; a missing `gamma` resolves to `1 / d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Polynomial {
        #[serde(default = "default_degree")]
        degree: u32,
        #[serde(default)]
        coef0: f64,
        #[serde(default)]
        gamma: Option<f64>,
    },
    Rbf {
        #[serde(default)]
        gamma: Option<f64>,
    },
    Sigmoid {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        coef0: f64,
    },
}

fn default_degree() -> u32 {
    3
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { gamma: None }
    }
}

impl KernelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "poly",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Sigmoid { .. } => "sigmoid",
        }
    }

    /// Fills in `gamma` for `n_features` inputs and validates parameters.
    pub fn resolve(&self, n_features: usize) -> Result<KernelFn> {
        let auto = 1.0 / n_features.max(1) as f64;
        let gamma_of = |g: Option<f64>| -> Result<f64> {
            let g = g.unwrap_or(auto);
            if g > 0.0 && g.is_finite() {
                Ok(g)
            } else {
                Err(ModelError::InvalidHyperparameter(format!("kernel gamma must be > 0, got {g}")))
            }
        };
        Ok(match *self {
            KernelSpec::Linear => KernelFn::Linear,
            KernelSpec::Polynomial { degree, coef0, gamma } => {
                if degree == 0 {
                    return Err(ModelError::InvalidHyperparameter("polynomial degree must be >= 1".into()));
                }
                KernelFn::Polynomial { degree, coef0, gamma: gamma_of(gamma)? }
            }
            KernelSpec::Rbf { gamma } => KernelFn::Rbf { gamma: gamma_of(gamma)? },
            KernelSpec::Sigmoid { gamma, coef0 } => KernelFn::Sigmoid { gamma: gamma_of(gamma)?, coef0 },
        })
    }
}

/// A kernel with every parameter fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelFn {
    Linear,
    Polynomial { degree: u32, coef0: f64, gamma: f64 },
    Rbf { gamma: f64 },
    Sigmoid { gamma: f64, coef0: f64 },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl KernelFn {
    /// Unchecked evaluation; `a` and `b` must have equal length.
    #[inline]
    pub fn apply(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelFn::Linear => dot(a, b),
            KernelFn::Polynomial { degree, coef0, gamma } => (gamma * dot(a, b) + coef0).powi(degree as i32),
            KernelFn::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            KernelFn::Sigmoid { gamma, coef0 } => (gamma * dot(a, b) + coef0).tanh(),
        }
    }
}

pub fn kernel_eval(k: &KernelFn, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ModelError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(k.apply(a, b))
}
