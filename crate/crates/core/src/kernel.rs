//! Kernel functions for support vector regression.

use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `x . y`
    Linear,
    /// `(1 + x . y)^degree`
    Polynomial,
    /// `exp(-|x - y|^2 / sigma^2)`
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// RBF width, in the units of the input space.
    pub sigma: f64,
    /// Polynomial degree.
    pub degree: u32,
}

impl KernelConfig {
    pub fn linear() -> Self {
        KernelConfig {
            kind: KernelKind::Linear,
            sigma: 1.0,
            degree: 1,
        }
    }

    pub fn polynomial(degree: u32) -> Result<Self> {
        let k = KernelConfig {
            kind: KernelKind::Polynomial,
            sigma: 1.0,
            degree,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn rbf(sigma: f64) -> Result<Self> {
        let k = KernelConfig {
            kind: KernelKind::Rbf,
            sigma,
            degree: 1,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Parameter(format!(
                "kernel sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.degree < 1 {
            return Err(Error::Parameter("polynomial degree must be at least 1".into()));
        }
        Ok(())
    }

    /// Evaluates the kernel; the slices must have equal length.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(x, y),
            KernelKind::Polynomial => (1.0 + dot(x, y)).powi(self.degree as i32),
            KernelKind::Rbf => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (self.sigma * self.sigma)).exp()
            }
        }
    }
}

pub fn kernel_eval(config: &KernelConfig, x: &[f64], y: &[f64]) -> Result<f64> {
    config.eval(x, y)
}

/// Row-major `n x n` kernel matrix over the rows of `table`.
pub fn gram_matrix(config: &KernelConfig, table: &Table) -> Vec<f64> {
    let n = table.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = config.eval_unchecked(table.row(i), table.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Median Euclidean distance over all distinct row pairs.
///
/// `None` when there are fewer than two rows or every pair coincides.
pub fn median_pairwise_distance(table: &Table) -> Option<f64> {
    let n = table.len();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = table
                .row(i)
                .iter()
                .zip(table.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d.push(s.sqrt());
        }
    }
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let med = if d.len() % 2 == 0 {
        0.5 * (d[mid - 1] + d[mid])
    } else {
        d[mid]
    };
    (med > 0.0).then_some(med)
}
