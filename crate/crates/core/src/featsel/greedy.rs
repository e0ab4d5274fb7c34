//! Greedy forward selection of the feature subset with maximal dependence on
//! the class labels.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depmeasure::{
    copula_transform, gaussian, median_heuristic_sigma, mmd_squared, rdc, rdc_from_copulas, MmdConfig, RdcConfig,
};
use crate::error::{Error, Result};
use crate::featurize::FeatureMatrix;
use crate::linalg::median_in_place;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMethod {
    GreedyRdc,
    GreedyMmd,
    Pca,
}

/// Dependence score used by [`greedy_select`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scorer {
    /// RDC between the subset and the class codes as an `n × 1` column.
    Rdc(RdcConfig),
    /// Sum over unordered class pairs of the squared MMD between the
    /// class-conditional rows, with σ from the median heuristic on the subset.
    Mmd(MmdConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    pub selected: Vec<usize>,
    pub score_trajectory: Vec<f64>,
    pub target_dim: usize,
    /// Width of the matrix the selection was made on.
    pub source_dim: usize,
    pub seed: Option<u64>,
}

/// Seed used to score `candidate` in `round` (both zero-based).
pub fn candidate_seed(base: u64, round: usize, candidate: usize) -> u64 {
    seed::derive(base, "greedy-candidate", &[round as u64, candidate as u64])
}

fn label_column(labels: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((labels.len(), 1), |(i, _)| labels[i] as f64)
}

/// Dense class index per row plus the number of classes.
fn encode_classes(labels: &[usize]) -> (Vec<usize>, usize) {
    let distinct: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    (labels.iter().map(|l| distinct[l]).collect(), distinct.len())
}

/// RDC between `x` and the labels treated as one numeric column.
pub fn rdc_label_score(x: ArrayView2<'_, f64>, labels: &[usize], config: &RdcConfig) -> Result<f64> {
    rdc(x, label_column(labels).view(), config)
}

/// Summed pairwise class-conditional squared MMD of `x`. Direct evaluation,
/// used as the reference for the incremental path inside [`greedy_select`].
pub fn mmd_label_score(x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<f64> {
    let sigma = median_heuristic_sigma(x)?;
    let (codes, k) = encode_classes(labels);
    let groups: Vec<Array2<f64>> = (0..k)
        .map(|c| {
            let rows: Vec<usize> = (0..codes.len()).filter(|&i| codes[i] == c).collect();
            x.select(Axis(0), &rows)
        })
        .collect();
    let cfg = MmdConfig::fixed(sigma);
    let mut total = 0.0;
    for a in 0..k {
        for b in (a + 1)..k {
            total += mmd_squared(groups[a].view(), groups[b].view(), &cfg)?;
        }
    }
    Ok(total)
}

fn check_inputs(x: ArrayView2<'_, f64>, labels: &[usize], target_dim: usize) -> Result<usize> {
    let (n, d) = x.dim();
    if d == 0 {
        return Err(Error::invalid("feature matrix has no columns"));
    }
    if n <= 1 {
        return Err(Error::invalid("greedy selection needs at least two rows"));
    }
    if labels.len() != n {
        return Err(Error::shape(format!("{} labels for {n} rows", labels.len())));
    }
    if encode_classes(labels).1 < 2 {
        return Err(Error::invalid("labels span a single class"));
    }
    if target_dim == 0 {
        return Err(Error::invalid("target dimension must be at least 1"));
    }
    if target_dim > d {
        log::warn!("target dimension {target_dim} exceeds {d} columns; selecting all columns");
        return Ok(d);
    }
    Ok(target_dim)
}

/// Forward selection: each round scores `S ∪ {j}` for every unselected `j`
/// and keeps the best, ties going to the lowest index.
pub fn greedy_select(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    scorer: &Scorer,
    target_dim: usize,
) -> Result<SelectionResult> {
    let rounds = check_inputs(x, labels, target_dim)?;
    match scorer {
        Scorer::Rdc(cfg) => {
            cfg.validate()?;
            greedy_rdc(x, labels, cfg, rounds, target_dim)
        }
        Scorer::Mmd(cfg) => {
            cfg.validate()?;
            greedy_mmd(x, labels, rounds, target_dim)
        }
    }
}

fn argmax_lowest(scores: &[(usize, f64)]) -> (usize, f64) {
    let mut best = scores[0];
    for &(j, s) in &scores[1..] {
        if s > best.1 {
            best = (j, s);
        }
    }
    best
}

fn greedy_rdc(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    config: &RdcConfig,
    rounds: usize,
    target_dim: usize,
) -> Result<SelectionResult> {
    let d = x.ncols();
    let cx = copula_transform(x);
    let cy = copula_transform(label_column(labels).view());
    let mut selected: Vec<usize> = Vec::with_capacity(rounds);
    let mut trajectory = Vec::with_capacity(rounds);

    for round in 0..rounds {
        let candidates: Vec<usize> = (0..d).filter(|j| !selected.contains(j)).collect();
        let scores = candidates
            .par_iter()
            .map(|&j| {
                let mut cols = selected.clone();
                cols.push(j);
                let sub = cx.select(Axis(1), &cols);
                let cfg = config.with_seed(candidate_seed(config.seed, round, j));
                rdc_from_copulas(sub.view(), cy.view(), &cfg).map(|s| (j, s))
            })
            .collect::<Result<Vec<_>>>()?;
        let (j, s) = argmax_lowest(&scores);
        selected.push(j);
        trajectory.push(s);
        log::debug!("rdc round {round}: column {j} score {s:.4}");
    }
    Ok(SelectionResult {
        method: SelectionMethod::GreedyRdc,
        selected,
        score_trajectory: trajectory,
        target_dim,
        source_dim: d,
        seed: Some(config.seed),
    })
}

/// Incremental form of [`mmd_label_score`]: squared distances on the current
/// subset are kept for every row pair `a < b` (row-major upper triangle) and
/// extended by one column per candidate.
fn greedy_mmd(x: ArrayView2<'_, f64>, labels: &[usize], rounds: usize, target_dim: usize) -> Result<SelectionResult> {
    let (n, d) = x.dim();
    let (codes, k) = encode_classes(labels);
    let mut class_sizes = vec![0usize; k];
    for &c in &codes {
        class_sizes[c] += 1;
    }
    let columns: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut base = vec![0.0; n * (n - 1) / 2];
    let mut selected: Vec<usize> = Vec::with_capacity(rounds);
    let mut trajectory = Vec::with_capacity(rounds);

    let extend = |base: &[f64], col: &[f64], out: &mut Vec<f64>| {
        out.clear();
        let mut off = 0;
        for a in 0..n {
            let len = n - a - 1;
            let ca = col[a];
            out.extend(base[off..off + len].iter().zip(&col[a + 1..]).map(|(s, cb)| {
                let t = ca - cb;
                s + t * t
            }));
            off += len;
        }
    };

    let score_candidate = |base: &[f64], col: &[f64]| -> Result<f64> {
        let mut dist = Vec::with_capacity(base.len());
        extend(base, col, &mut dist);
        let mut scratch = dist.clone();
        if scratch.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid("all rows identical on candidate subset"));
        }
        let sigma = median_in_place(&mut scratch).expect("non-empty");
        if sigma <= 0.0 {
            return Err(Error::invalid("median squared distance is zero on candidate subset"));
        }
        // block[a][b] sums k(x_i, x_j) over pairs i < j with classes {a, b}.
        let mut block = vec![0.0; k * k];
        let mut acc = vec![0.0; k];
        let mut off = 0;
        for a in 0..n {
            let len = n - a - 1;
            acc.iter_mut().for_each(|v| *v = 0.0);
            for (&d2, &cb) in dist[off..off + len].iter().zip(&codes[a + 1..]) {
                acc[cb] += gaussian(d2, sigma);
            }
            let ca = codes[a];
            for (cb, &v) in acc.iter().enumerate() {
                let (lo, hi) = if ca <= cb { (ca, cb) } else { (cb, ca) };
                block[lo * k + hi] += v;
            }
            off += len;
        }
        let mut total = 0.0;
        for a in 0..k {
            let na = class_sizes[a] as f64;
            let within_a = (2.0 * block[a * k + a] + na) / (na * na);
            for b in (a + 1)..k {
                let nb = class_sizes[b] as f64;
                let within_b = (2.0 * block[b * k + b] + nb) / (nb * nb);
                let cross = block[a * k + b] / (na * nb);
                total += (within_a + within_b - 2.0 * cross).max(0.0);
            }
        }
        Ok(total)
    };

    for round in 0..rounds {
        let candidates: Vec<usize> = (0..d).filter(|j| !selected.contains(j)).collect();
        let scores = candidates
            .par_iter()
            .map(|&j| score_candidate(&base, &columns[j]).map(|s| (j, s)))
            .collect::<Result<Vec<_>>>()?;
        let (j, s) = argmax_lowest(&scores);
        let mut next = Vec::with_capacity(base.len());
        extend(&base, &columns[j], &mut next);
        base = next;
        selected.push(j);
        trajectory.push(s);
        log::debug!("mmd round {round}: column {j} score {s:.4}");
    }
    Ok(SelectionResult {
        method: SelectionMethod::GreedyMmd,
        selected,
        score_trajectory: trajectory,
        target_dim,
        source_dim: d,
        seed: None,
    })
}

/// Column subset in selection order.
pub fn apply_selection(x: &FeatureMatrix, result: &SelectionResult) -> Result<FeatureMatrix> {
    if result.method == SelectionMethod::Pca {
        return Err(Error::invalid("PCA results are applied through the fitted PCA model"));
    }
    if result.selected.is_empty() {
        return Err(Error::invalid("selection is empty"));
    }
    if x.ncols() != result.source_dim {
        return Err(Error::shape(format!(
            "selection was made on {} columns, matrix has {}",
            result.source_dim,
            x.ncols()
        )));
    }
    x.select_columns(&result.selected)
}
