//! Epsilon-insensitive support vector regression without a bias term.
//!
//! Targets are centered before training, so the regression function is the
//! pure kernel expansion `f(x) = sum_i beta_i K(x_i, x)` with
//! `beta_i = alpha_i - alpha_i*`. Dropping the bias removes the equality
//! constraint from the dual, leaving
//!
//! ```text
//! maximize   -1/2 sum_ij beta_i beta_j K_ij + sum_i beta_i y_i - eps sum_i |beta_i|
//! subject to -C <= beta_i <= C
//! ```
//!
//! which is separable in its constraints. [`train_svr`] solves it by cyclic
//! coordinate ascent: each step maximizes the objective exactly along one
//! coordinate (a soft-threshold followed by clipping to the box), so the
//! objective never decreases.

use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::error::{check_dim, Error, Result};
use crate::kernel::{gram_matrix, KernelConfig};

/// Coefficients with magnitude at or below this are treated as zero.
pub const PRUNE_THRESHOLD: f64 = 1e-10;

/// Loss that ignores deviations up to `epsilon`.
pub fn epsilon_loss(y: f64, f: f64, epsilon: f64) -> f64 {
    let d = (y - f).abs();
    if d <= epsilon {
        0.0
    } else {
        d - epsilon
    }
}

/// Box bound and tube half-width, as stored with a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrHyperParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelConfig,
}

impl SvrHyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Parameter(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        self.kernel.validate()
    }

    pub fn regularization(&self) -> Regularization {
        Regularization {
            c: self.c,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kkt_tolerance: f64,
    /// Cap on single-coordinate updates.
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kkt_tolerance: 1e-6,
            max_iterations: 1_000_000,
        }
    }
}

/// Trained regressor: the support-vector expansion plus the target offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: KernelConfig,
    pub hyper: Regularization,
    pub support_vectors: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub target_offset: f64,
}

impl SvrModel {
    pub fn support_vector_count(&self) -> usize {
        self.beta.len()
    }

    pub fn hyper_params(&self) -> SvrHyperParams {
        SvrHyperParams {
            c: self.hyper.c,
            epsilon: self.hyper.epsilon,
            kernel: self.kernel,
        }
    }

    pub fn with_target_offset(mut self, offset: f64) -> Self {
        self.target_offset = offset;
        self
    }

    /// `sum_i beta_i K(x_i, x) + target_offset`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if let Some(sv) = self.support_vectors.first() {
            check_dim(sv.len(), x.len())?;
        }
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.beta)
            .map(|(sv, b)| b * self.kernel.eval_unchecked(sv, x))
            .sum();
        Ok(s + self.target_offset)
    }
}

pub fn predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Mean epsilon-insensitive loss of the model over a table.
pub fn empirical_risk(model: &SvrModel, table: &Table) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (x, y) in table.rows().zip(table.targets()) {
        total += epsilon_loss(*y, model.predict(x)?, model.hyper.epsilon);
    }
    Ok(total / table.len() as f64)
}

/// Diagnostics from one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    /// Coefficient of every training row, before pruning.
    pub beta: Vec<f64>,
    /// Kernel expansion at each training row (without offset).
    pub fitted: Vec<f64>,
    /// Dual objective at the start and after every sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
    pub steps: usize,
    /// Largest distance from any coefficient to its coordinate-wise optimum,
    /// scaled by `max(1, K_ii)`.
    pub max_kkt_residual: f64,
}

impl SolverReport {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace starts with the initial value")
    }
}

/// Dual objective `-1/2 b^T K b + b^T y - eps |b|_1` for a row-major Gram matrix.
pub fn dual_objective(gram: &[f64], targets: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let n = beta.len();
    let mut obj = 0.0;
    for i in 0..n {
        let fi: f64 = (0..n).map(|j| gram[i * n + j] * beta[j]).sum();
        obj += beta[i] * (targets[i] - 0.5 * fi) - epsilon * beta[i].abs();
    }
    obj
}

/// Trains on a table whose targets are centered. The returned model has a
/// zero target offset; see [`SvrModel::with_target_offset`].
pub fn train_svr(table: &Table, hyper: &SvrHyperParams, solver: &SolverConfig) -> Result<SvrModel> {
    train_svr_with_report(table, hyper, solver).map(|(m, _)| m)
}

pub fn train_svr_with_report(
    table: &Table,
    hyper: &SvrHyperParams,
    solver: &SolverConfig,
) -> Result<(SvrModel, SolverReport)> {
    hyper.validate()?;
    if solver.kkt_tolerance.is_nan() || solver.kkt_tolerance <= 0.0 || solver.max_iterations == 0 {
        return Err(Error::Parameter(
            "solver tolerance and iteration cap must be positive".into(),
        ));
    }
    if table.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let n = table.len();
    let gram = gram_matrix(&hyper.kernel, table);
    let y = table.targets();
    let (c, eps, tol) = (hyper.c, hyper.epsilon, solver.kkt_tolerance);

    let mut beta = vec![0.0; n];
    let mut fitted = vec![0.0; n];
    let mut objective = 0.0;
    let mut trace = vec![objective];
    let mut steps = 0;
    let mut sweeps = 0;

    let residual = |beta: &[f64], fitted: &[f64]| -> f64 {
        (0..n)
            .map(|i| {
                let kii = gram[i * n + i];
                let g = y[i] - fitted[i] + kii * beta[i];
                (coordinate_optimum(g, kii, eps, c) - beta[i]).abs() * kii.max(1.0)
            })
            .fold(0.0, f64::max)
    };

    loop {
        let mut best_gain = 0.0_f64;
        for i in 0..n {
            let kii = gram[i * n + i];
            let old = beta[i];
            let g = y[i] - fitted[i] + kii * old;
            let new = coordinate_optimum(g, kii, eps, c);
            if new == old {
                continue;
            }
            let d = new - old;
            let gain = -0.5 * kii * (new * new - old * old) + d * g - eps * (new.abs() - old.abs());
            // rounding can make a vanishing move look like a loss
            if gain <= 0.0 {
                continue;
            }
            beta[i] = new;
            let col = &gram[i * n..(i + 1) * n];
            for (f, k) in fitted.iter_mut().zip(col) {
                *f += k * d;
            }
            objective += gain;
            best_gain = best_gain.max(gain);
        }
        steps += n;
        sweeps += 1;
        trace.push(objective);

        let kkt = residual(&beta, &fitted);
        if best_gain < tol * objective.abs().max(1.0) && kkt <= tol {
            let report = SolverReport {
                beta: beta.clone(),
                fitted,
                objective_trace: trace,
                sweeps,
                steps,
                max_kkt_residual: kkt,
            };
            let (support_vectors, beta) = table
                .rows()
                .zip(beta)
                .filter(|(_, b)| b.abs() > PRUNE_THRESHOLD)
                .map(|(x, b)| (x.to_vec(), b))
                .unzip();
            let model = SvrModel {
                kernel: hyper.kernel,
                hyper: hyper.regularization(),
                support_vectors,
                beta,
                target_offset: 0.0,
            };
            return Ok((model, report));
        }
        if steps >= solver.max_iterations {
            return Err(Error::SolverNoConvergence {
                steps,
                residual: kkt,
            });
        }
    }
}

/// Maximizer of `-1/2 k b^2 + g b - eps |b|` over `[-c, c]`.
fn coordinate_optimum(g: f64, kii: f64, eps: f64, c: f64) -> f64 {
    if kii > 0.0 {
        let b = if g > eps {
            (g - eps) / kii
        } else if g < -eps {
            (g + eps) / kii
        } else {
            0.0
        };
        b.clamp(-c, c)
    } else if g > eps {
        c
    } else if g < -eps {
        -c
    } else {
        0.0
    }
}
