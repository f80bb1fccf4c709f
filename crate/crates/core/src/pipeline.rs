//! Centering, optional PCA and SVR fitted together as one shippable model.

use serde::{Deserialize, Serialize};

use crate::dataset::{apply_centering, fit_centering, CenteringTransform, Dataset, FeatureVector, Table};
use crate::error::{Error, Result};
use crate::kernel::{median_pairwise_distance, KernelConfig, KernelKind};
use crate::pca::{fit_pca, PcaModel, DEFAULT_VARIANCE_THRESHOLD};
use crate::svr::{train_svr, SolverConfig, SvrHyperParams, SvrModel};

pub const FORMAT_VERSION: u32 = 1;

/// Fallback RBF width when every training pair coincides.
const DEGENERATE_SIGMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaChoice {
    Fixed(f64),
    /// Median pairwise distance between training rows, after centering and PCA.
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Divide centered features by their standard deviations.
    pub scale: bool,
    /// Cumulative variance share for PCA; `None` skips PCA.
    pub pca_threshold: Option<f64>,
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelKind,
    pub sigma: SigmaChoice,
    pub degree: u32,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scale: true,
            pca_threshold: Some(DEFAULT_VARIANCE_THRESHOLD),
            c: 1.0,
            epsilon: 0.01,
            kernel: KernelKind::Rbf,
            sigma: SigmaChoice::Median,
            degree: 3,
            solver: SolverConfig::default(),
        }
    }
}

/// A fitted model bundle: raw features in, SSIM estimate out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub format_version: u32,
    pub centering: CenteringTransform,
    pub pca: Option<PcaModel>,
    pub svr: SvrModel,
}

impl Pipeline {
    /// Fits every stage on `table` (raw features, raw targets).
    pub fn fit(table: &Table, config: &PipelineConfig) -> Result<Pipeline> {
        let centering = fit_centering(table, config.scale)?;
        let centered = apply_centering(&centering, table)?;
        let pca = config
            .pca_threshold
            .map(|t| fit_pca(&centered, t))
            .transpose()?;
        let inputs = match &pca {
            Some(p) => p.transform_table(&centered)?,
            None => centered,
        };
        let sigma = match config.sigma {
            SigmaChoice::Fixed(s) => s,
            SigmaChoice::Median => median_pairwise_distance(&inputs).unwrap_or(DEGENERATE_SIGMA),
        };
        let hyper = SvrHyperParams {
            c: config.c,
            epsilon: config.epsilon,
            kernel: KernelConfig {
                kind: config.kernel,
                sigma,
                degree: config.degree,
            },
        };
        let svr = train_svr(&inputs, &hyper, &config.solver)?.with_target_offset(centering.target_mean);
        Ok(Pipeline {
            format_version: FORMAT_VERSION,
            centering,
            pca,
            svr,
        })
    }

    pub fn fit_dataset(dataset: &Dataset, config: &PipelineConfig) -> Result<Pipeline> {
        Pipeline::fit(&dataset.to_table(), config)
    }

    /// Maps a raw feature row to the SVR input space.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.centering.transform_row(x)?;
        match &self.pca {
            Some(p) => p.analyze(&z),
            None => Ok(z),
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        self.svr.predict(&self.embed(x)?)
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<f64> {
        self.predict_row(&features.to_array())
    }

    pub fn retained_components(&self) -> Option<usize> {
        self.pca.as_ref().map(|p| p.retained)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Pipeline> {
        let p: Pipeline = serde_json::from_str(text)?;
        if p.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(p.format_version));
        }
        Ok(p)
    }
}
