//! Independent oracles and synthetic data shared by the integration suites.
//!
//! Nothing here calls into the solver or eigensolver under test.
#![allow(dead_code)]

use nrvqa::dataset::Table;
use nrvqa::{Dataset, FeatureVector, KernelConfig, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalues of a symmetric 3x3 matrix from the trigonometric solution of
/// its characteristic cubic, in descending order.
pub fn sym3_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    if p2 == 0.0 {
        return [q; 3];
    }
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    [l1, l2, l3]
}

/// Gram matrix computed pairwise through the public kernel function.
pub fn gram(kernel: &KernelConfig, rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = kernel.eval(&rows[i], &rows[j]).unwrap();
        }
    }
    k
}

pub fn dual_value(k: &[f64], y: &[f64], beta: &[f64], eps: f64) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * beta[j] * k[i * n + j];
        }
    }
    let lin: f64 = beta.iter().zip(y).map(|(b, y)| b * y).sum();
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    -0.5 * quad + lin - eps * l1
}

/// Accelerated projected-gradient ascent on the split dual
///
/// `max -1/2 (a - a*)^T K (a - a*) + y^T (a - a*) - eps 1^T (a + a*)`,
/// `0 <= a, a* <= C`, with function-value restarts. Runs until the
/// projected-gradient residual is below `tol` (or the iteration cap).
/// Returns `(beta, objective)`.
pub fn dual_oracle(k: &[f64], y: &[f64], c: f64, eps: f64, tol: f64) -> (Vec<f64>, f64) {
    let n = y.len();
    let lip = 2.0
        * (0..n)
            .map(|i| (0..n).map(|j| k[i * n + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let lip = if lip > 0.0 { lip } else { 1.0 };

    // Projected gradient step from `from` into `to`; returns the objective at `to`.
    let mut kb = vec![0.0; n];
    let mut step = |from: &[f64], to: &mut [f64]| -> f64 {
        for i in 0..n {
            kb[i] = (0..n).map(|j| k[i * n + j] * (from[j] - from[n + j])).sum();
        }
        for i in 0..n {
            to[i] = (from[i] + (y[i] - kb[i] - eps) / lip).clamp(0.0, c);
            to[n + i] = (from[n + i] + (kb[i] - y[i] - eps) / lip).clamp(0.0, c);
        }
        let beta: Vec<f64> = (0..n).map(|i| to[i] - to[n + i]).collect();
        dual_value(k, y, &beta, 0.0) - eps * to.iter().sum::<f64>()
    };

    let mut x = vec![0.0; 2 * n];
    let mut z = x.clone();
    let mut next = x.clone();
    let mut probe = x.clone();
    let mut t = 1.0_f64;
    let mut fx = f64::NEG_INFINITY;
    for iter in 0..20_000_000u64 {
        if iter % 64 == 0 {
            step(&x, &mut probe);
            let residual = probe
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                * lip;
            if residual <= tol {
                break;
            }
        }
        let fnext = step(&z, &mut next);
        if fnext < fx && t > 1.0 {
            // restart momentum; a plain step from `x` is accepted regardless
            // so rounding noise cannot stall the iteration
            t = 1.0;
            z.copy_from_slice(&x);
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let w = (t - 1.0) / t_next;
        for i in 0..2 * n {
            z[i] = next[i] + w * (next[i] - x[i]);
        }
        std::mem::swap(&mut x, &mut next);
        fx = fnext;
        t = t_next;
    }
    let beta: Vec<f64> = (0..n).map(|i| x[i] - x[n + i]).collect();
    let obj = dual_value(k, y, &beta, eps);
    (beta, obj)
}

/// Violations of the SVR optimality conditions (a)-(d) plus the tube
/// property, evaluated from scratch. Empty when all hold at `tol`.
pub fn kkt_violations(
    k: &[f64],
    y: &[f64],
    beta: &[f64],
    c: f64,
    eps: f64,
    tol: f64,
) -> Vec<String> {
    let n = y.len();
    let mut out = Vec::new();
    for i in 0..n {
        let f: f64 = (0..n).map(|j| k[i * n + j] * beta[j]).sum();
        let r = y[i] - f;
        let b = beta[i];
        if b.abs() > c + tol {
            out.push(format!("(a) beta[{i}] = {b} outside [-{c}, {c}]"));
        }
        if r.abs() < eps - tol && b.abs() > tol {
            out.push(format!("(b) beta[{i}] = {b} but residual {r} inside tube"));
        }
        if b > tol && b < c - tol && (f - (y[i] - eps)).abs() > tol {
            out.push(format!("(c) free beta[{i}] = {b} but f - (y - eps) = {}", f - (y[i] - eps)));
        }
        if b < -tol && b > -c + tol && (f - (y[i] + eps)).abs() > tol {
            out.push(format!("(c) free beta[{i}] = {b} but f - (y + eps) = {}", f - (y[i] + eps)));
        }
        let (alpha, alpha_star) = (b.max(0.0), (-b).max(0.0));
        if alpha * alpha_star != 0.0 {
            out.push(format!("(d) both sides active at {i}"));
        }
        if (b > tol && r < eps - tol) || (b < -tol && r > -eps + tol) {
            out.push(format!("(d) beta[{i}] = {b} active on the wrong side (residual {r})"));
        }
        let loss = (r.abs() - eps).max(0.0);
        if loss > tol && b.abs() < c - tol {
            out.push(format!("tube: loss {loss} at {i} but |beta| = {} < C", b.abs()));
        }
    }
    out
}

pub fn uniform_rows(rng: &mut impl Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

/// Correlated Gaussian rows: independent normals mixed by a random matrix
/// and shifted by a random offset.
pub fn correlated_rows(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mix: Vec<Vec<f64>> = uniform_rows(rng, m, m, -1.0, 1.0);
    let offset: Vec<f64> = (0..m).map(|_| rng.random_range(-50.0..50.0)).collect();
    let scale: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.random_range(-1.0..2.0))).collect();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
            (0..m)
                .map(|i| offset[i] + scale[i] * (0..m).map(|j| mix[i][j] * z[j]).sum::<f64>())
                .collect()
        })
        .collect()
}

pub fn table(rows: &[Vec<f64>], targets: Vec<f64>) -> Table {
    Table::from_rows(rows, targets).unwrap()
}

/// Six bitstream-like features driven by two latent factors with 1% noise,
/// and an SSIM target that is a smooth nonlinear function of the latents.
pub fn latent_factor_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    // (base, spread, weight on u, weight on v)
    let columns = [
        (3000.0, 1200.0, 0.8, 0.4),
        (27.0, 4.0, 0.3, -0.7),
        (45.0, 12.0, -0.6, 0.5),
        (28.0, 8.0, 0.5, 0.6),
        (20.0, 6.0, 0.7, -0.3),
        (32.0, 5.0, -0.9, -0.2),
    ];
    let samples = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(-1.0..1.0);
            let v: f64 = rng.random_range(-1.0..1.0);
            let mut values = [0.0; 6];
            for (j, (base, spread, wu, wv)) in columns.iter().enumerate() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                values[j] = base + spread * (wu * u + wv * v) + 0.01 * spread * noise;
            }
            let target = 0.85 + 0.06 * (1.5 * u).sin() + 0.04 * v * v - 0.03 * u * v;
            Sample::new(FeatureVector::from_array(values).unwrap(), target).unwrap()
        })
        .collect();
    Dataset::new(samples).unwrap()
}

/// Noisy 2-D regression surface used for sparsity checks.
pub fn noisy_surface(n: usize, seed: u64) -> Table {
    let mut rng = rng(seed);
    let rows = uniform_rows(&mut rng, n, 2, -1.0, 1.0);
    let targets = rows
        .iter()
        .map(|r| {
            let noise: f64 = StandardNormal.sample(&mut rng);
            0.1 * (2.0 * r[0]).sin() + 0.05 * r[1] * r[1] + 0.03 * noise
        })
        .collect();
    table(&rows, targets)
}
