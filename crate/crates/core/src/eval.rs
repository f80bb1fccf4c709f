//! Error metrics and the k-fold cross-validation harness.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{split_folds, Dataset, Table};
use crate::error::{check_dim, Error, Result};
use crate::pipeline::{Pipeline, PipelineConfig};

/// Default fold count.
pub const DEFAULT_FOLDS: usize = 4;

/// MAE, MSE, RMSE and the coefficient of determination.
///
/// `r_squared` is `None` when the targets have zero variance (including the
/// single-sample case); it serializes as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub r_squared: Option<f64>,
}

pub fn compute_metrics(predictions: &[f64], targets: &[f64]) -> Result<MetricsReport> {
    check_dim(targets.len(), predictions.len())?;
    if targets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = targets.len() as f64;
    let mut abs = 0.0;
    let mut sq = 0.0;
    for (p, y) in predictions.iter().zip(targets) {
        abs += (p - y).abs();
        sq += (p - y) * (p - y);
    }
    let mean = targets.iter().sum::<f64>() / n;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    let mse = sq / n;
    Ok(MetricsReport {
        mae: abs / n,
        mse,
        rmse: mse.sqrt(),
        r_squared: (ss_tot > 0.0).then(|| 1.0 - sq / ss_tot),
    })
}

/// One held-out prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPoint {
    pub index: usize,
    pub fold: usize,
    pub target: f64,
    pub prediction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub per_fold: Vec<MetricsReport>,
    pub mean: MetricsReport,
    /// Held-out predictions ordered by sample index.
    #[serde(skip)]
    pub validation: Vec<ValidationPoint>,
}

/// Field-wise mean; R² is defined only when every fold defines it.
fn mean_report(per_fold: &[MetricsReport]) -> MetricsReport {
    let k = per_fold.len() as f64;
    let avg = |f: fn(&MetricsReport) -> f64| per_fold.iter().map(f).sum::<f64>() / k;
    let r_squared = per_fold
        .iter()
        .map(|m| m.r_squared)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / k);
    MetricsReport {
        mae: avg(|m| m.mae),
        mse: avg(|m| m.mse),
        rmse: avg(|m| m.rmse),
        r_squared,
    }
}

/// Fits the pipeline for validation fold `fold`, using only the other folds.
pub fn fold_pipeline(
    table: &Table,
    folds: &[Vec<usize>],
    fold: usize,
    config: &PipelineConfig,
) -> Result<Pipeline> {
    let train: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(f, _)| *f != fold)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    Pipeline::fit(&table.subset(&train)?, config)
}

/// k-fold cross-validation with the whole pipeline refitted inside each fold.
///
/// Folds run in parallel; results are assembled in fold order.
pub fn cross_validate(
    dataset: &Dataset,
    k: usize,
    config: &PipelineConfig,
    seed: u64,
) -> Result<CvReport> {
    let table = dataset.to_table();
    let folds = split_folds(table.len(), k, seed)?;

    let outcomes = (0..k)
        .into_par_iter()
        .map(|f| -> Result<(MetricsReport, Vec<ValidationPoint>)> {
            let pipeline = fold_pipeline(&table, &folds, f, config)?;
            let mut points = Vec::with_capacity(folds[f].len());
            for &i in &folds[f] {
                points.push(ValidationPoint {
                    index: i,
                    fold: f,
                    target: table.targets()[i],
                    prediction: pipeline.predict_row(table.row(i))?,
                });
            }
            let preds: Vec<f64> = points.iter().map(|p| p.prediction).collect();
            let targets: Vec<f64> = points.iter().map(|p| p.target).collect();
            Ok((compute_metrics(&preds, &targets)?, points))
        })
        .collect::<Vec<_>>();

    let mut per_fold = Vec::with_capacity(k);
    let mut validation = Vec::with_capacity(table.len());
    for (f, outcome) in outcomes.into_iter().enumerate() {
        let (metrics, points) = outcome.map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })?;
        per_fold.push(metrics);
        validation.extend(points);
    }
    validation.sort_by_key(|p| p.index);

    Ok(CvReport {
        k,
        seed,
        mean: mean_report(&per_fold),
        per_fold,
        validation,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

impl CvReport {
    /// Fold rows labelled `Instance 1..k` under MAE, MSE, RMSE, RSquared,
    /// followed by a `Mean` row.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>10} {:>10} {:>10}",
            "No of instances", "MAE", "MSE", "RMSE", "RSquared"
        );
        let rows = self
            .per_fold
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("Instance {}", i + 1), m))
            .chain(std::iter::once(("Mean".to_string(), &self.mean)));
        for (label, m) in rows {
            let _ = writeln!(
                out,
                "{:<16} {:>10} {:>10} {:>10} {:>10}",
                label,
                cell(Some(m.mae)),
                cell(Some(m.mse)),
                cell(Some(m.rmse)),
                cell(m.r_squared)
            );
        }
        out
    }

    /// `index,fold,target,prediction` rows in sample order.
    pub fn to_scatter_csv(&self) -> String {
        let mut out = String::from("index,fold,target,prediction\n");
        for p in &self.validation {
            let _ = writeln!(out, "{},{},{},{}", p.index, p.fold, p.target, p.prediction);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let m = compute_metrics(&[0.1, 0.5, 0.9], &[0.1, 0.5, 0.9]).unwrap();
        assert_eq!((m.mae, m.mse, m.rmse, m.r_squared), (0.0, 0.0, 0.0, Some(1.0)));
    }

    #[test]
    fn hand_computed_pair() {
        // residuals (0, -1): SS_res = 1; mean target 2, SS_tot = 2
        let m = compute_metrics(&[1.0, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(m.mae, 0.5);
        assert_eq!(m.mse, 0.5);
        assert!((m.rmse - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.r_squared, Some(0.5));
    }

    #[test]
    fn mean_prediction_has_zero_r_squared() {
        let y = [0.2, 0.4, 0.9];
        let mean = (0.2 + 0.4 + 0.9) / 3.0;
        let m = compute_metrics(&[mean; 3], &y).unwrap();
        assert!(m.r_squared.unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_target_has_undefined_r_squared() {
        let m = compute_metrics(&[0.5], &[0.7]).unwrap();
        assert_eq!(m.r_squared, None);
        assert!((m.mae - 0.2).abs() < 1e-15);
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mean_row_propagates_undefined() {
        let a = compute_metrics(&[1.0, 2.0], &[1.0, 3.0]).unwrap();
        let b = compute_metrics(&[0.5], &[0.7]).unwrap();
        let m = mean_report(&[a, b]);
        assert_eq!(m.r_squared, None);
        assert!((m.mae - 0.35).abs() < 1e-15);
        assert_eq!(mean_report(&[a, a]).r_squared, Some(0.5));
    }

    #[test]
    fn table_layout() {
        let m = compute_metrics(&[1.0, 2.0], &[1.0, 3.0]).unwrap();
        let report = CvReport {
            k: 2,
            seed: 0,
            per_fold: vec![m, m],
            mean: m,
            validation: vec![],
        };
        let text = report.to_text_table();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].contains("MAE") && lines[0].ends_with("RSquared"));
        assert!(lines[1].starts_with("Instance 1"));
        assert!(lines[2].starts_with("Instance 2"));
        assert!(lines[3].starts_with("Mean"));
        assert!(lines[1].contains("0.500000") && lines[1].contains("0.707107"));
    }
}
