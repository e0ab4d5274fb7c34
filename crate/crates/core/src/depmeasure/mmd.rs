//! Gaussian-kernel maximum mean discrepancy (biased V-statistic).

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{median_in_place, pairwise_sq_dists, sq_dist};
use crate::seed;

/// Bandwidth choice for `k(a, b) = exp(-‖a − b‖² / σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SigmaPolicy {
    /// Median squared pairwise distance of the pooled sample.
    MedianHeuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmdConfig {
    pub sigma_policy: SigmaPolicy,
}

impl Default for MmdConfig {
    fn default() -> Self {
        MmdConfig {
            sigma_policy: SigmaPolicy::MedianHeuristic,
        }
    }
}

impl MmdConfig {
    pub fn fixed(sigma: f64) -> Self {
        MmdConfig {
            sigma_policy: SigmaPolicy::Fixed(sigma),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.sigma_policy {
            SigmaPolicy::Fixed(s) if !(s > 0.0 && s.is_finite()) => {
                Err(Error::Config(format!("fixed sigma must be positive, got {s}")))
            }
            _ => Ok(()),
        }
    }
}

/// Median of the `n(n−1)/2` pairwise squared Euclidean distances.
pub fn median_heuristic_sigma(z: ArrayView2<'_, f64>) -> Result<f64> {
    let mut d = pairwise_sq_dists(z);
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid(
            "median heuristic needs at least two distinct rows; use a fixed sigma",
        ));
    }
    let m = median_in_place(&mut d).expect("non-empty");
    if m > 0.0 {
        Ok(m)
    } else {
        Err(Error::invalid(
            "median squared distance is zero (mostly duplicate rows); use a fixed sigma",
        ))
    }
}

#[inline]
pub(crate) fn gaussian(d2: f64, sigma: f64) -> f64 {
    (-d2 / sigma).exp()
}

/// Σ_i Σ_j k(a_i, b_j), row sums gathered in parallel and reduced in row order.
fn kernel_sum(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, sigma: f64) -> f64 {
    let brows: Vec<Vec<f64>> = b.rows().into_iter().map(|r| r.to_vec()).collect();
    let partial: Vec<f64> = (0..a.nrows())
        .into_par_iter()
        .map(|i| {
            let ai = a.row(i).to_vec();
            brows.iter().map(|bj| gaussian(sq_dist(&ai, bj), sigma)).sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

fn resolve_sigma(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, config: &MmdConfig) -> Result<f64> {
    config.validate()?;
    match config.sigma_policy {
        SigmaPolicy::Fixed(s) => Ok(s),
        SigmaPolicy::MedianHeuristic => {
            let pooled = concatenate(Axis(0), &[x, y]).map_err(|e| Error::shape(e.to_string()))?;
            median_heuristic_sigma(pooled.view())
        }
    }
}

/// Squared MMD with weights `1/n²`, `1/m²`, `2/(nm)`, clamped at zero.
pub fn mmd_squared(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, config: &MmdConfig) -> Result<f64> {
    let (n, m) = (x.nrows(), y.nrows());
    if n == 0 || m == 0 {
        return Err(Error::invalid("mmd needs at least one row per sample"));
    }
    if x.ncols() != y.ncols() {
        return Err(Error::shape(format!("mmd: {} vs {} columns", x.ncols(), y.ncols())));
    }
    let sigma = resolve_sigma(x, y, config)?;
    Ok(mmd_squared_with_sigma(x, y, sigma))
}

pub(crate) fn mmd_squared_with_sigma(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, sigma: f64) -> f64 {
    let (n, m) = (x.nrows() as f64, y.nrows() as f64);
    let kxx = kernel_sum(x, x, sigma) / (n * n);
    let kyy = kernel_sum(y, y, sigma) / (m * m);
    let kxy = kernel_sum(x, y, sigma) / (n * m);
    (kxx + kyy - 2.0 * kxy).max(0.0)
}

/// Empirical MMD between two samples of equal width.
pub fn mmd(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, config: &MmdConfig) -> Result<f64> {
    mmd_squared(x, y, config).map(f64::sqrt)
}

/// MMD values after `permutations` random relabellings of the pooled sample.
/// The bandwidth is resolved once on the pooled sample, which relabelling
/// does not change.
pub fn permutation_null(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    config: &MmdConfig,
    permutations: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sigma = resolve_sigma(x, y, config)?;
    let pooled: Array2<f64> = concatenate(Axis(0), &[x, y]).map_err(|e| Error::shape(e.to_string()))?;
    let (n, total) = (x.nrows(), pooled.nrows());
    let rows: Vec<Vec<f64>> = pooled.rows().into_iter().map(|r| r.to_vec()).collect();
    let kernel: Vec<f64> = (0..total)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rows = &rows;
            (0..total).map(move |j| gaussian(sq_dist(&rows[i], &rows[j]), sigma))
        })
        .collect();
    let (wx, wy) = (1.0 / n as f64, -1.0 / (total - n) as f64);
    let mut rng = seed::rng(seed::derive(seed, "mmd-permutation", &[]));
    let mut order: Vec<usize> = (0..total).collect();
    let mut w = vec![0.0; total];
    let mut out = Vec::with_capacity(permutations);
    for _ in 0..permutations {
        order.shuffle(&mut rng);
        for (p, &i) in order.iter().enumerate() {
            w[i] = if p < n { wx } else { wy };
        }
        // wᵀKw with w = 1/n on the first group and −1/m on the second.
        let q: f64 = kernel
            .chunks_exact(total)
            .zip(&w)
            .map(|(row, wi)| wi * row.iter().zip(&w).map(|(k, wj)| k * wj).sum::<f64>())
            .sum();
        out.push(q.max(0.0).sqrt());
    }
    Ok(out)
}
