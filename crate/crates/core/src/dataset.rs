//! Feature records, numeric tables, centering and fold partitioning.
//!
//! A [`Dataset`] holds validated records exactly as they were ingested: six
//! bitstream features per sequence plus its SSIM score. Everything downstream
//! of ingest (centering, projection, training) works on a [`Table`], a dense
//! row-major matrix with one target per row, because centered or projected
//! rows are no longer valid feature records.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// CSV column names of the six features, in canonical order.
pub const FEATURE_COLUMNS: [&str; 6] = [
    "bitrate_kbps",
    "frame_rate_fps",
    "pct_inter_16x16",
    "pct_inter_8x8",
    "pct_inter_4x4",
    "avg_qp",
];

/// CSV column name of the SSIM target.
pub const TARGET_COLUMN: &str = "ssim";

/// Number of bitstream features per sequence.
pub const FEATURE_COUNT: usize = FEATURE_COLUMNS.len();

/// Bitstream-level description of one encoded sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Kilobits per second.
    pub bitrate: f64,
    /// Frames per second.
    pub frame_rate: f64,
    /// Percentage of inter macroblocks using 16x16 partitions.
    pub pct_inter_16x16: f64,
    /// Percentage of inter macroblocks using 8x8 partitions.
    pub pct_inter_8x8: f64,
    /// Percentage of inter macroblocks using 4x4 partitions.
    pub pct_inter_4x4: f64,
    /// Average quantization parameter.
    pub avg_qp: f64,
}

impl FeatureVector {
    /// Builds a feature vector from values in [`FEATURE_COLUMNS`] order.
    pub fn from_array(values: [f64; FEATURE_COUNT]) -> Result<Self> {
        let fv = FeatureVector {
            bitrate: values[0],
            frame_rate: values[1],
            pct_inter_16x16: values[2],
            pct_inter_8x8: values[3],
            pct_inter_4x4: values[4],
            avg_qp: values[5],
        };
        fv.validate().map_err(Error::Parameter)?;
        Ok(fv)
    }

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.bitrate,
            self.frame_rate,
            self.pct_inter_16x16,
            self.pct_inter_8x8,
            self.pct_inter_4x4,
            self.avg_qp,
        ]
    }

    /// Checks finiteness, strictly positive rates and percentages in `[0, 100]`.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let values = self.to_array();
        for (name, v) in FEATURE_COLUMNS.iter().zip(values) {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        if self.bitrate <= 0.0 {
            return Err(format!("bitrate_kbps must be positive, got {}", self.bitrate));
        }
        if self.frame_rate <= 0.0 {
            return Err(format!(
                "frame_rate_fps must be positive, got {}",
                self.frame_rate
            ));
        }
        for (name, v) in FEATURE_COLUMNS[2..5].iter().zip(&values[2..5]) {
            if !(0.0..=100.0).contains(v) {
                return Err(format!("{name} must be within [0, 100], got {v}"));
            }
        }
        Ok(())
    }
}

/// A feature vector paired with its measured SSIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: FeatureVector,
    pub target_ssim: f64,
}

impl Sample {
    pub fn new(features: FeatureVector, target_ssim: f64) -> Result<Self> {
        features.validate().map_err(Error::Parameter)?;
        check_ssim(target_ssim).map_err(Error::Parameter)?;
        Ok(Sample {
            features,
            target_ssim,
        })
    }
}

fn check_ssim(v: f64) -> std::result::Result<(), String> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(format!("ssim must be within [0, 1], got {v}"))
    }
}

/// Ordered, validated collection of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_names(&self) -> &'static [&'static str; FEATURE_COUNT] {
        &FEATURE_COLUMNS
    }

    /// Samples at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let samples = indices
            .iter()
            .map(|&i| {
                self.samples.get(i).copied().ok_or_else(|| {
                    Error::Parameter(format!("sample index {i} out of range 0..{}", self.len()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples)
    }

    pub fn to_table(&self) -> Table {
        let mut values = Vec::with_capacity(self.len() * FEATURE_COUNT);
        let mut targets = Vec::with_capacity(self.len());
        for s in &self.samples {
            values.extend_from_slice(&s.features.to_array());
            targets.push(s.target_ssim);
        }
        Table {
            names: FEATURE_COLUMNS.iter().map(|s| s.to_string()).collect(),
            dim: FEATURE_COUNT,
            values,
            targets,
        }
    }

    /// Writes the dataset in the same CSV layout [`parse_feature_csv`] reads.
    ///
    /// Values use the shortest decimal form that parses back to the same
    /// `f64`, so a write/parse cycle is lossless.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&FEATURE_COLUMNS.join(","));
        out.push(',');
        out.push_str(TARGET_COLUMN);
        out.push('\n');
        for s in &self.samples {
            for v in s.features.to_array() {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{}", s.target_ssim);
        }
        out
    }
}

/// Parses a labelled feature table.
///
/// The header must name exactly the six feature columns and `ssim`, in any
/// order. Lines starting with `#` are skipped.
pub fn parse_feature_csv(text: &str) -> Result<Dataset> {
    let rows = parse_rows(text, true)?;
    let samples = rows
        .into_iter()
        .map(|(line, features, target)| {
            let target = target.expect("target column is required");
            check_ssim(target).map_err(|message| Error::Row { line, message })?;
            Ok(Sample {
                features,
                target_ssim: target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)
}

/// Parses a feature table for prediction. The `ssim` column is optional and
/// returned when present.
pub fn parse_unlabeled_csv(text: &str) -> Result<Vec<(FeatureVector, Option<f64>)>> {
    let rows = parse_rows(text, false)?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows.into_iter().map(|(_, f, t)| (f, t)).collect())
}

type ParsedRow = (u64, FeatureVector, Option<f64>);

fn parse_rows(text: &str, require_target: bool) -> Result<Vec<ParsedRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::Row {
            line: 1,
            message: e.to_string(),
        })?
        .clone();

    // column position of each feature, then of the target
    let mut feature_pos = [usize::MAX; FEATURE_COUNT];
    let mut target_pos = None;
    for (pos, name) in header.iter().enumerate() {
        if name == TARGET_COLUMN {
            if target_pos.replace(pos).is_some() {
                return Err(schema(name, "duplicate column"));
            }
        } else if let Some(f) = FEATURE_COLUMNS.iter().position(|c| *c == name) {
            if feature_pos[f] != usize::MAX {
                return Err(schema(name, "duplicate column"));
            }
            feature_pos[f] = pos;
        } else {
            return Err(schema(name, "unknown column"));
        }
    }
    for (f, pos) in feature_pos.iter().enumerate() {
        if *pos == usize::MAX {
            return Err(schema(FEATURE_COLUMNS[f], "missing column"));
        }
    }
    if require_target && target_pos.is_none() {
        return Err(schema(TARGET_COLUMN, "missing column"));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Row {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let cell = |pos: usize, name: &str| -> Result<f64> {
            let raw = &record[pos];
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Row {
                    line,
                    message: format!("non-numeric value `{raw}` in column {name}"),
                }),
            }
        };
        let mut values = [0.0; FEATURE_COUNT];
        for (f, v) in values.iter_mut().enumerate() {
            *v = cell(feature_pos[f], FEATURE_COLUMNS[f])?;
        }
        let features = FeatureVector {
            bitrate: values[0],
            frame_rate: values[1],
            pct_inter_16x16: values[2],
            pct_inter_8x8: values[3],
            pct_inter_4x4: values[4],
            avg_qp: values[5],
        };
        features
            .validate()
            .map_err(|message| Error::Row { line, message })?;
        let target = target_pos
            .map(|pos| cell(pos, TARGET_COLUMN))
            .transpose()?;
        rows.push((line, features, target));
    }
    if require_target && rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows)
}

fn schema(column: &str, message: &'static str) -> Error {
    Error::Schema {
        column: column.to_string(),
        message,
    }
}

/// Dense numeric rows with one target each.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    names: Vec<String>,
    dim: usize,
    values: Vec<f64>,
    targets: Vec<f64>,
}

impl Table {
    /// Builds a table; every row must have `names.len()` entries.
    pub fn new(names: Vec<String>, rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let dim = names.len();
        if dim == 0 {
            return Err(Error::Parameter("table needs at least one column".into()));
        }
        check_dim(rows.len(), targets.len())?;
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            check_dim(dim, r.len())?;
            values.extend_from_slice(r);
        }
        Ok(Table {
            names,
            dim,
            values,
            targets,
        })
    }

    /// Builds a table with generated column names `x1..xm`.
    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let names = (1..=dim).map(|j| format!("x{j}")).collect();
        Table::new(names, rows, targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|j| self.column(j).sum::<f64>() / n)
            .collect()
    }

    /// Replaces every row by `f(row)`; all outputs must share one length.
    pub fn map_rows<F>(&self, names: Vec<String>, mut f: F) -> Result<Table>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let rows = self.rows().map(&mut f).collect::<Result<Vec<_>>>()?;
        Table::new(names, &rows, self.targets.clone())
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Table> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Parameter(format!(
                    "row index {i} out of range 0..{}",
                    self.len()
                )));
            }
            values.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Ok(Table {
            names: self.names.clone(),
            dim: self.dim,
            values,
            targets,
        })
    }

    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Table> {
        check_dim(self.len(), targets.len())?;
        Ok(Table {
            targets,
            ..self.clone()
        })
    }
}

/// Per-column shift and scale fitted on training data, plus the target mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringTransform {
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
    pub target_mean: f64,
    /// Columns whose variance was zero and kept scale 1.0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_columns: Vec<usize>,
}

impl CenteringTransform {
    pub fn dim(&self) -> usize {
        self.feature_means.len()
    }

    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(x.iter()
            .zip(&self.feature_means)
            .zip(&self.feature_scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn inverse_row(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), z.len())?;
        Ok(z.iter()
            .zip(&self.feature_means)
            .zip(&self.feature_scales)
            .map(|((v, m), s)| v * s + m)
            .collect())
    }

    /// Undoes [`apply_centering`].
    pub fn invert(&self, table: &Table) -> Result<Table> {
        let out = table.map_rows(table.names().to_vec(), |r| self.inverse_row(r))?;
        out.with_targets(table.targets().iter().map(|t| t + self.target_mean).collect())
    }
}

/// Fits column means, optional unit-variance scales, and the target mean.
///
/// Scales are sample standard deviations (`n - 1` denominator). A column with
/// zero variance keeps scale 1.0, is listed in `degenerate_columns`, and logs
/// a warning.
pub fn fit_centering(table: &Table, scale_to_unit_variance: bool) -> Result<CenteringTransform> {
    if table.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = table.len();
    let feature_means = table.column_means();
    let target_mean = table.targets().iter().sum::<f64>() / n as f64;

    let mut feature_scales = vec![1.0; table.dim()];
    let mut degenerate_columns = Vec::new();
    if scale_to_unit_variance {
        for (j, scale) in feature_scales.iter_mut().enumerate() {
            let ss: f64 = table
                .column(j)
                .map(|v| (v - feature_means[j]).powi(2))
                .sum();
            let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
            if sd > 0.0 && sd.is_finite() {
                *scale = sd;
            } else {
                log::warn!(
                    "column `{}` has zero variance; leaving it unscaled",
                    table.names()[j]
                );
                degenerate_columns.push(j);
            }
        }
    }
    Ok(CenteringTransform {
        feature_means,
        feature_scales,
        target_mean,
        degenerate_columns,
    })
}

/// Subtracts means and divides by scales column-wise; subtracts the target mean.
pub fn apply_centering(transform: &CenteringTransform, table: &Table) -> Result<Table> {
    check_dim(transform.dim(), table.dim())?;
    let out = table.map_rows(table.names().to_vec(), |r| transform.transform_row(r))?;
    out.with_targets(
        table
            .targets()
            .iter()
            .map(|t| t - transform.target_mean)
            .collect(),
    )
}

/// Deals a seeded permutation of `0..n` into `k` folds.
///
/// Fold sizes differ by at most one. Indices within a fold are sorted.
pub fn split_folds(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Parameter(format!(
            "fold count must satisfy 2 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}
