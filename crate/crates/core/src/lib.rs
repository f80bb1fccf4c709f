//! No-reference video quality estimation from H.264 bitstream features.
//!
//! Six per-sequence features (bitrate, frame rate, three inter-macroblock
//! partition percentages and the average quantization parameter) are mapped
//! to an SSIM estimate by a three-stage [`Pipeline`]:
//!
//! 1. [`dataset::fit_centering`] removes column means (and optionally scales
//!    to unit variance) and centers the SSIM targets;
//! 2. [`pca::fit_pca`] optionally projects onto the leading principal
//!    directions;
//! 3. [`svr::train_svr`] fits an epsilon-insensitive support vector regressor
//!    without a bias term.
//!
//! [`eval::cross_validate`] measures the whole pipeline under k-fold
//! cross-validation and [`ssim`] produces training targets from raw YUV
//! video.
//!
//! ```
//! use nrvqa::{cross_validate, Dataset, FeatureVector, PipelineConfig, Sample};
//!
//! let samples = (0..24)
//!     .map(|i| {
//!         let u = i as f64 / 23.0;
//!         let fv = FeatureVector::from_array([
//!             500.0 + 3000.0 * u, 30.0, 40.0 + 20.0 * u, 30.0 - 10.0 * u, 30.0 - 10.0 * u, 36.0 - 12.0 * u,
//!         ])?;
//!         Sample::new(fv, 0.80 + 0.15 * u)
//!     })
//!     .collect::<Result<Vec<_>, _>>()?;
//! let dataset = Dataset::new(samples)?;
//!
//! let report = cross_validate(&dataset, 4, &PipelineConfig::default(), 7)?;
//! assert_eq!(report.per_fold.len(), 4);
//! assert!(report.mean.rmse < 0.05);
//! # Ok::<(), nrvqa::Error>(())
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod kernel;
pub mod linalg;
pub mod pca;
pub mod pipeline;
pub mod plot;
pub mod ssim;
pub mod svr;

pub use dataset::{
    apply_centering, fit_centering, parse_feature_csv, split_folds, CenteringTransform, Dataset,
    FeatureVector, Sample, Table,
};
pub use error::{Error, Result};
pub use eval::{compute_metrics, cross_validate, CvReport, MetricsReport};
pub use kernel::{kernel_eval, KernelConfig, KernelKind};
pub use linalg::{eigendecompose, EigenSystem, SymMatrix};
pub use pca::{covariance_matrix, fit_pca, PcaModel};
pub use pipeline::{Pipeline, PipelineConfig, SigmaChoice};
pub use ssim::{read_yuv420p, ssim_frame, ssim_sequence, Frame};
pub use svr::{
    empirical_risk, epsilon_loss, predict, train_svr, SolverConfig, SvrHyperParams, SvrModel,
};

// Compiles and runs the Rust listings of the guide under `cargo test --doc`.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/pca.md")]
    mod pca {}
    #[doc = include_str!("../../../book/src/svr.md")]
    mod svr {}
    #[doc = include_str!("../../../book/src/ssim.md")]
    mod ssim {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
