//! Principal component analysis on centered feature tables.
//!
//! The covariance matrix of zero-mean rows is diagonalized; its eigenvectors
//! are the principal directions and its eigenvalues the variance carried
//! along each. A model keeps the leading `retained` directions: the smallest
//! count whose cumulative eigenvalue share reaches the requested threshold.
//!
//! *Analysis* projects a vector onto the retained directions, *synthesis*
//! rebuilds a vector of the original dimension from those coefficients, and
//! the *truncation error* is what synthesis cannot recover. The error lies in
//! the span of the discarded directions, so it is orthogonal to the
//! reconstruction.

use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, eigendecompose, EigenSystem, SymMatrix};

/// Default cumulative variance share used to choose the retained count.
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.95;

/// Covariance `(1/n) sum_s x_s x_s^T` of a table whose columns are centered.
///
/// Rejects input whose column mean exceeds `1e-6` of that column's largest
/// magnitude.
pub fn covariance_matrix(table: &Table) -> Result<SymMatrix> {
    if table.len() < 2 {
        return Err(Error::Parameter(format!(
            "covariance needs at least 2 samples, got {}",
            table.len()
        )));
    }
    for (j, mean) in table.column_means().into_iter().enumerate() {
        let peak = table.column(j).fold(0.0_f64, |m, v| m.max(v.abs()));
        if mean.abs() > 1e-6 * peak {
            return Err(Error::Contract(format!(
                "column `{}` is not centered (mean {mean:e})",
                table.names()[j]
            )));
        }
    }

    let m = table.dim();
    let mut entries = vec![0.0; m * m];
    for row in table.rows() {
        for i in 0..m {
            for j in i..m {
                entries[i * m + j] += row[i] * row[j];
            }
        }
    }
    let n = table.len() as f64;
    for i in 0..m {
        for j in i..m {
            let v = entries[i * m + j] / n;
            entries[i * m + j] = v;
            entries[j * m + i] = v;
        }
    }
    SymMatrix::new(m, entries)
}

/// Fitted principal directions plus the truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    #[serde(flatten)]
    pub eigen: EigenSystem,
    pub retained: usize,
    pub variance_proportion: f64,
}

/// Centers the table, diagonalizes its covariance and picks the retained count.
pub fn fit_pca(table: &Table, variance_threshold: f64) -> Result<PcaModel> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(Error::Parameter(format!(
            "variance threshold must lie in (0, 1], got {variance_threshold}"
        )));
    }
    if table.len() < 2 {
        return Err(Error::Parameter(format!(
            "PCA needs at least 2 samples, got {}",
            table.len()
        )));
    }
    let mean = table.column_means();
    let centered = table.map_rows(table.names().to_vec(), |r| {
        Ok(r.iter().zip(&mean).map(|(v, m)| v - m).collect())
    })?;
    let eigen = eigendecompose(&covariance_matrix(&centered)?)?;
    let (retained, variance_proportion) = select_components(&eigen.eigenvalues, variance_threshold);
    Ok(PcaModel {
        mean,
        eigen,
        retained,
        variance_proportion,
    })
}

/// Cumulative share of the eigenvalue total after each component.
///
/// Rounding-level negative eigenvalues count as zero. The last entry is
/// exactly 1.0; a zero total (constant data) yields all ones.
pub fn cumulative_proportions(eigenvalues: &[f64]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(eigenvalues.len());
    let mut acc = 0.0;
    for l in eigenvalues {
        acc += l.max(0.0);
        cum.push(acc);
    }
    let total = acc;
    if total <= 0.0 {
        return vec![1.0; eigenvalues.len()];
    }
    cum.iter().map(|c| c / total).collect()
}

/// Smallest `l` whose cumulative proportion reaches `threshold`, with that proportion.
///
/// A threshold of 1.0 keeps every component, even when trailing eigenvalues
/// are zero to rounding.
pub fn select_components(eigenvalues: &[f64], threshold: f64) -> (usize, f64) {
    let cum = cumulative_proportions(eigenvalues);
    if threshold >= 1.0 {
        return (cum.len(), 1.0);
    }
    let l = cum
        .iter()
        .position(|&p| p >= threshold)
        .unwrap_or(cum.len() - 1);
    (l + 1, cum[l])
}

impl PcaModel {
    /// Input dimension `m`.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.eigenvalues
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.eigen.eigenvectors[j]
    }

    /// Coefficients `a_j = q_j . (x - mean)` for the retained directions.
    pub fn analyze(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let dx: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        Ok(self.eigen.eigenvectors[..self.retained]
            .iter()
            .map(|q| dot(q, &dx))
            .collect())
    }

    /// `mean + sum_j a_j q_j` over the retained directions.
    pub fn synthesize(&self, a: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.retained, a.len())?;
        let mut x = self.mean.clone();
        for (aj, q) in a.iter().zip(&self.eigen.eigenvectors) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += aj * qi;
            }
        }
        Ok(x)
    }

    /// Residual `(x - mean) - sum_j a_j q_j` and its Euclidean norm.
    pub fn truncation_error(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let a = self.analyze(x)?;
        let x_hat = self.synthesize(&a)?;
        let e: Vec<f64> = x.iter().zip(&x_hat).map(|(v, r)| v - r).collect();
        let norm = dot(&e, &e).sqrt();
        Ok((e, norm))
    }

    /// Same model with a different retained count.
    pub fn with_retained(&self, retained: usize) -> Result<PcaModel> {
        if retained == 0 || retained > self.dim() {
            return Err(Error::Parameter(format!(
                "retained count must be within 1..={}, got {retained}",
                self.dim()
            )));
        }
        let cum = cumulative_proportions(self.eigenvalues());
        Ok(PcaModel {
            retained,
            variance_proportion: cum[retained - 1],
            ..self.clone()
        })
    }

    /// Projects every row; targets pass through unchanged.
    pub fn transform_table(&self, table: &Table) -> Result<Table> {
        let names = (1..=self.retained).map(|j| format!("pc{j}")).collect();
        table.map_rows(names, |r| self.analyze(r))
    }
}
