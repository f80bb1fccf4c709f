//! Dense symmetric matrices and a cyclic Jacobi eigensolver.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Sweeps of the cyclic Jacobi method before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Convergence is declared once the off-diagonal Frobenius norm falls below
/// this fraction of the full Frobenius norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Square symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Wraps row-major `entries`, rejecting non-finite or asymmetric input.
    ///
    /// Mirror entries may differ by at most `1e-12 * max|entry|`; the stored
    /// matrix is the exact average of the two triangles.
    pub fn new(dim: usize, mut entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("matrix dimension must be positive".into()));
        }
        check_dim(dim * dim, entries.len())?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix has non-finite entries".into()));
        }
        let scale = entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in i + 1..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::Contract(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg;
            }
        }
        Ok(SymMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            check_dim(dim, r.len())?;
            entries.extend_from_slice(r);
        }
        SymMatrix::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            entries[i * dim + i] = *v;
        }
        SymMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok((0..self.dim).map(|i| dot(self.row(i), x)).collect())
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
///
/// Each eigenvector has its largest-magnitude entry positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds `sum_j lambda_j q_j q_j^T` as row-major entries.
    pub fn reconstruct(&self) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m * m];
        for (lambda, q) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] += lambda * q[i] * q[j];
                }
            }
        }
        out
    }
}

/// Diagonalizes a symmetric matrix with cyclic Jacobi rotations.
pub fn eigendecompose(matrix: &SymMatrix) -> Result<EigenSystem> {
    let n = matrix.dim;
    let mut a = matrix.entries.clone();
    let mut v = SymMatrix::identity(n).entries;
    let target = OFF_DIAGONAL_TOLERANCE * matrix.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep sweep order
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));

    let eigenvalues = order.iter().map(|&j| a[j * n + j]).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + j]).collect();
            // near-ties (within rounding) resolve to the first index
            let peak = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let lead = col
                .iter()
                .position(|x| x.abs() >= peak * (1.0 - 1e-12))
                .unwrap_or(0);
            if col[lead] < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with the rotation `A <- J^T A J`, accumulating `V <- V J`.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    // smaller root of t^2 + 2 theta t - 1 = 0
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
